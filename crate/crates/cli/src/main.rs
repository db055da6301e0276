use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use recovery_core::io::{
    apply_orders, generate_instance, read_instance, write_instance, Format, GeneratorConfig, OrderKind, PlanDocument,
};
use recovery_core::model::{apply_disruptions, validate_instance, DisruptedState, ProblemInstance};
use recovery_core::pipeline::{recover, RecoveryConfig};
use recovery_core::plot::{plot_problem, plot_solution, plot_tsn};
use recovery_core::report::{BenchReport, BenchRow};
use recovery_core::solver::{Backend, ExternalEngine};
use recovery_core::space::{build_initial_space, SpaceConfig};
use recovery_core::tsn::{build_tsn, Resource};

#[derive(Parser)]
#[command(name = "airline-recovery", version, about = "Aircraft, crew and passenger disruption recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance; prints one line per problem found.
    Validate {
        instance: PathBuf,
        #[arg(long)]
        format: Option<FormatArg>,
    },
    /// Recover a disrupted instance and write change orders.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        format: Option<FormatArg>,
        /// Output directory for plan.json, report.csv and plots.
        #[arg(long, short, default_value = "out")]
        out: PathBuf,
        /// Also write problem.svg and solution.svg.
        #[arg(long)]
        plots: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate a synthetic instance.
    GenInstance {
        #[arg(long, default_value = "small")]
        preset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `.json` file or a directory of tables.
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        format: Option<FormatArg>,
        /// Lighter loads and spare connections for passenger rerouting.
        #[arg(long)]
        reroute_slack: bool,
    },
    /// Draw an instance, its first network, or a plan as SVG.
    Plot {
        instance: PathBuf,
        #[arg(long)]
        format: Option<FormatArg>,
        #[arg(long, value_enum, default_value = "problem")]
        kind: PlotKind,
        /// Plan document for `--kind solution`.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Aircraft or crew id to restrict a network plot to.
        #[arg(long)]
        resource: Option<String>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Solve generated instances over a seed range and report timings and costs.
    Bench {
        #[arg(long, default_value = "small")]
        preset: String,
        /// `a..b` (inclusive), `a,b,c` or a single seed.
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long)]
        reroute_slack: bool,
        /// Per-run rows.
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
        /// Per-instance averages.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Run seeds concurrently (timings become noisy).
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Global time budget in seconds.
    #[arg(long, env = "AIRLINE_RECOVERY_BUDGET", default_value_t = 600.0)]
    budget: f64,
    /// Share of the budget given to aircraft and crew recovery.
    #[arg(long, default_value_t = 0.6)]
    acr_share: f64,
    #[arg(long, default_value_t = 10)]
    max_iterations: usize,
    /// Fixed number of improvement generations instead of a time budget;
    /// makes runs reproducible.
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for schedule improvement; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, env = "AIRLINE_RECOVERY_BACKEND", default_value = "builtin")]
    backend: BackendArg,
}

impl RunArgs {
    fn config(&self) -> Result<RecoveryConfig> {
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            bail!("--budget must be a nonnegative number of seconds");
        }
        let mut cfg = RecoveryConfig::with_budget(Duration::from_secs_f64(self.budget), self.acr_share);
        cfg.acr.max_iterations = self.max_iterations;
        cfg.acr.backend = match self.backend {
            BackendArg::Builtin => Backend::Builtin,
            BackendArg::Cbc => Backend::External(ExternalEngine::Cbc),
            BackendArg::Highs => Backend::External(ExternalEngine::Highs),
        };
        cfg.ga.seed = self.seed;
        cfg.ga.workers = self.threads;
        if let Some(g) = self.generations {
            cfg.ga.max_generations = Some(g);
            cfg.ga.budget = None;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Tables,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Tables => Format::Tables,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Builtin,
    Cbc,
    Highs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Problem,
    Tsn,
    Solution,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Diagnostics,
}

fn load(path: &Path, format: Option<FormatArg>) -> Result<ProblemInstance> {
    read_instance(path, format.map(Into::into)).with_context(|| format!("reading {}", path.display()))
}

/// Prints diagnostics; `None` when the instance is clean.
fn checked_state(inst: &ProblemInstance) -> Result<Option<DisruptedState>> {
    let diags = validate_instance(inst);
    if !diags.is_empty() {
        for d in &diags {
            println!("{d}");
        }
        return Ok(None);
    }
    Ok(Some(apply_disruptions(inst)?))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().context("seed range start")?;
        let b: u64 = b.trim_start_matches('=').trim().parse().context("seed range end")?;
        if b < a {
            bail!("empty seed range {s}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().with_context(|| format!("bad seed {x:?}")))
        .collect()
}

fn preset(name: &str, seed: u64, slack: bool) -> Result<GeneratorConfig> {
    let cfg = GeneratorConfig::preset(name, seed)
        .with_context(|| format!("unknown preset {name:?}; use tiny, small, medium or large"))?;
    Ok(if slack { cfg.with_reroute_slack() } else { cfg })
}

fn solve(instance: &Path, format: Option<FormatArg>, out: &Path, plots: bool, run: &RunArgs) -> Result<Status> {
    let inst = load(instance, format)?;
    let Some(state) = checked_state(&inst)? else { return Ok(Status::Diagnostics) };
    let cfg = run.config()?;
    let result = recover(&state, &cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let doc = PlanDocument {
        orders: result.orders.clone(),
    };
    fs::write(out.join("plan.json"), doc.to_json())?;
    let mut report = BenchReport::default();
    let name = if inst.name.is_empty() { "instance" } else { &inst.name };
    report.push(BenchRow::from_run(name, run.seed, &result));
    report.write_rows_csv(fs::File::create(out.join("report.csv"))?)?;
    if plots {
        fs::write(out.join("problem.svg"), plot_problem(&state))?;
        fs::write(out.join("solution.svg"), plot_solution(&state, result.schedule()))?;
    }

    let sched = result.schedule();
    let count = |f: fn(&OrderKind) -> bool| result.orders.iter().filter(|o| f(&o.kind)).count();
    println!("objective      {:.2}", sched.objective);
    println!("iterations     {}", result.acr.iteration_log.len());
    println!("delays         {}", count(|k| matches!(k, OrderKind::Delay { .. })));
    println!("cancellations  {}", count(|k| matches!(k, OrderKind::Cancel { .. })));
    println!(
        "swaps          {}",
        count(|k| matches!(k, OrderKind::AircraftSwap { .. } | OrderKind::CrewSwap { .. }))
    );
    println!("rebookings     {}", count(|k| matches!(k, OrderKind::ItineraryRebooking { .. })));
    let (initial, fin) = result.pax_costs();
    println!("pax cost       {initial:.2} -> {fin:.2}");
    println!("plan           {}", out.join("plan.json").display());
    Ok(Status::Ok)
}

fn plot(
    instance: &Path,
    format: Option<FormatArg>,
    kind: PlotKind,
    plan: Option<&Path>,
    resource: Option<&str>,
    out: &Path,
) -> Result<Status> {
    let inst = load(instance, format)?;
    let Some(state) = checked_state(&inst)? else { return Ok(Status::Diagnostics) };
    let svg = match kind {
        PlotKind::Problem => plot_problem(&state),
        PlotKind::Tsn => {
            let only = match resource {
                None => None,
                Some(id) => Some(
                    state
                        .index
                        .aircraft
                        .get(id)
                        .map(|&a| Resource::Aircraft(a))
                        .or_else(|| state.index.crews.get(id).map(|&c| Resource::Crew(c)))
                        .with_context(|| format!("no aircraft or crew {id:?}"))?,
                ),
            };
            let space = build_initial_space(&state, &SpaceConfig::default());
            let tsn = build_tsn(&space, &state)?;
            plot_tsn(&tsn, &state, only)
        }
        PlotKind::Solution => {
            let plan = plan.context("--kind solution needs --plan")?;
            let text = fs::read_to_string(plan).with_context(|| format!("reading {}", plan.display()))?;
            let doc = PlanDocument::from_json(&text)?;
            let (schedule, _) = apply_orders(&state, &doc.orders)?;
            plot_solution(&state, &schedule)
        }
    };
    fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(Status::Ok)
}

fn bench(
    preset_name: &str,
    seeds: &str,
    slack: bool,
    out: &Path,
    summary: Option<&Path>,
    parallel: bool,
    run: &RunArgs,
) -> Result<Status> {
    let seeds = parse_seeds(seeds)?;
    let cfg = run.config()?;
    let one = |seed: u64| -> Result<BenchRow> {
        let gen = preset(preset_name, seed, slack)?;
        let inst = generate_instance(&gen)?;
        let state = apply_disruptions(&inst)?;
        let mut cfg = cfg.clone();
        cfg.ga.seed = run.seed.wrapping_add(seed);
        let result = recover(&state, &cfg).with_context(|| format!("seed {seed}"))?;
        log::info!("seed {seed} done in {:.1} s", result.total_time.as_secs_f64());
        Ok(BenchRow::from_run(preset_name, seed, &result))
    };
    let rows: Vec<BenchRow> = if parallel {
        seeds.par_iter().map(|&s| one(s)).collect::<Result<_>>()?
    } else {
        seeds.iter().map(|&s| one(s)).collect::<Result<_>>()?
    };
    let report = BenchReport { rows };
    report.write_rows_csv(fs::File::create(out).with_context(|| format!("creating {}", out.display()))?)?;
    if let Some(p) = summary {
        report.write_summary_csv(fs::File::create(p)?)?;
    }
    println!(
        "{:<10} {:>4} {:>9} {:>6} {:>8} {:>8} {:>9} {:>8} {:>9} {:>9} {:>7} {:>12} {:>12}",
        "instance", "runs", "full_s", "iters", "prox_s", "space_s", "tsn_ms", "solve_s", "iter_s", "paxr_s", "gens",
        "pax_initial", "pax_final"
    );
    for s in report.summary() {
        println!(
            "{:<10} {:>4} {:>9.2} {:>6.1} {:>8.3} {:>8.3} {:>9.1} {:>8.3} {:>9.3} {:>9.2} {:>7.1} {:>12.0} {:>12.0}",
            s.instance,
            s.runs,
            s.full_s,
            s.acr_iterations,
            s.proximity_s,
            s.space_s,
            s.tsn_ms,
            s.solve_s,
            s.iteration_s,
            s.paxr_s,
            s.generations,
            s.initial_pax_cost,
            s.final_pax_cost
        );
    }
    Ok(Status::Ok)
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Validate { instance, format } => {
            let inst = load(&instance, format)?;
            let diags = validate_instance(&inst);
            for d in &diags {
                println!("{d}");
            }
            Ok(if diags.is_empty() { Status::Ok } else { Status::Diagnostics })
        }
        Command::Solve {
            instance,
            format,
            out,
            plots,
            run,
        } => solve(&instance, format, &out, plots, &run),
        Command::GenInstance {
            preset: name,
            seed,
            out,
            format,
            reroute_slack,
        } => {
            let inst = generate_instance(&preset(&name, seed, reroute_slack)?)?;
            if out.extension().is_none() {
                fs::create_dir_all(&out)?;
            }
            write_instance(&inst, &out, format.map(Into::into))?;
            Ok(Status::Ok)
        }
        Command::Plot {
            instance,
            format,
            kind,
            plan,
            resource,
            out,
        } => plot(&instance, format, kind, plan.as_deref(), resource.as_deref(), &out),
        Command::Bench {
            preset: name,
            seeds,
            reroute_slack,
            out,
            summary,
            parallel,
            run,
        } => bench(&name, &seeds, reroute_slack, &out, summary.as_deref(), parallel, &run),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Diagnostics) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("1..=2").unwrap(), vec![1, 2]);
        assert_eq!(parse_seeds("4, 7").unwrap(), vec![4, 7]);
        assert_eq!(parse_seeds("5").unwrap(), vec![5]);
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
