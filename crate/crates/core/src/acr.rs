//! The iterative recovery loop: build a search space, its time-space
//! network and model, solve, read the plan back, grow the space around the
//! plan's weak spots and repeat.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::milp::{encode, warm_start_from, EncodeError, MilpModel};
use crate::model::{
    DisruptedState, FlightDisposition, IterationStats, MaintenanceDisposition, Minutes, RecoverySchedule, Violation,
};
use crate::solver::{solve, Backend, SolveLimits, SolveOutcome, TOL};
use crate::space::{
    build_initial_space_with, expand_space, proximity, Entity, OptionKind, SearchSpace, SolutionFeedback, SpaceConfig,
};
use crate::tsn::{build_tsn, TimeSpaceNetwork, TsnError};

pub use crate::model::check_feasibility;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcrConfig {
    pub space: SpaceConfig,
    /// Whole-loop budget; `None` runs until another criterion stops it.
    pub wall: Option<Duration>,
    pub max_iterations: usize,
    /// Consecutive non-improving iterations tolerated.
    pub patience: usize,
    /// Per-solve limits, further capped by what is left of `wall`.
    pub solve: SolveLimits,
    pub backend: Backend,
}

impl Default for AcrConfig {
    fn default() -> Self {
        Self {
            space: SpaceConfig::default(),
            wall: Some(Duration::from_secs(360)),
            max_iterations: 10,
            patience: 2,
            solve: SolveLimits::default(),
            backend: Backend::Builtin,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AcrError {
    #[error(transparent)]
    Tsn(#[from] TsnError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Interpret(#[from] InterpretError),
    #[error("solver returned no solution ({0:?})")]
    NoSolution(crate::solver::SolveStatus),
    #[error("iteration {iteration} plan breaks {} rule(s): {first:?}", count)]
    Infeasible {
        iteration: usize,
        count: usize,
        first: Violation,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterpretError {
    #[error("model carries no encoding metadata")]
    NoMeta,
    #[error("no solution to interpret")]
    NoSolution,
    #[error("group {entity} sums to {sum}")]
    Group { entity: String, sum: f64 },
}

/// Decodes the selected options into dispositions, starting from the
/// baseline for anything the model does not decide.
pub fn interpret_solution(
    outcome: &SolveOutcome,
    model: &MilpModel,
    tsn: &TimeSpaceNetwork,
    state: &DisruptedState,
    threshold: Minutes,
) -> Result<(RecoverySchedule, SolutionFeedback), InterpretError> {
    let meta = model.meta.as_ref().ok_or(InterpretError::NoMeta)?;
    if !outcome.has_solution() || outcome.assignment.len() != model.variables.len() {
        return Err(InterpretError::NoSolution);
    }
    debug_assert_eq!(meta.groups.len(), tsn.space.groups.len());
    let x = &outcome.assignment;
    let mut schedule = state.baseline.clone();
    schedule.iteration_log.clear();
    for (entity, opts) in &meta.groups {
        let sum: f64 = opts.iter().map(|&(_, v)| x[v]).sum();
        let picked: Vec<_> = opts.iter().filter(|&&(_, v)| x[v] > 0.5).collect();
        if (sum - 1.0).abs() > TOL || picked.len() != 1 {
            let entity = match *entity {
                Entity::Flight(f) => state.instance.flights[f].id.clone(),
                Entity::Maintenance(m) => state.instance.maintenances[m].id.clone(),
            };
            return Err(InterpretError::Group { entity, sum });
        }
        match (*entity, picked[0].0) {
            (Entity::Flight(f), OptionKind::Scheduled { departure, aircraft, crew }) => {
                schedule.flights[f] = FlightDisposition::Scheduled {
                    departure,
                    aircraft,
                    crew,
                };
            }
            (Entity::Flight(f), _) => schedule.flights[f] = FlightDisposition::Canceled,
            (Entity::Maintenance(m), OptionKind::SucceedingMaintenance { airport, start }) => {
                schedule.maintenances[m] = MaintenanceDisposition::Succeeded { airport, start };
            }
            (Entity::Maintenance(m), _) => schedule.maintenances[m] = MaintenanceDisposition::Failed,
        }
    }
    schedule.objective = outcome.objective;
    let fb = SolutionFeedback::from_schedule(state, &schedule, threshold);
    Ok((schedule, fb))
}

/// Final plan and the space it was found in.
#[derive(Debug, Clone)]
pub struct AcrRun {
    pub schedule: RecoverySchedule,
    /// Plan of the first iteration.
    pub first: RecoverySchedule,
    pub space: SearchSpace,
    pub feedback: SolutionFeedback,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn run_acr(state: &DisruptedState, cfg: &AcrConfig) -> Result<RecoverySchedule, AcrError> {
    run_acr_traced(state, cfg).map(|r| r.schedule)
}

/// Runs the loop, also returning the last search space.
pub fn run_acr_traced(state: &DisruptedState, cfg: &AcrConfig) -> Result<AcrRun, AcrError> {
    let started = Instant::now();
    let threshold = cfg.space.delay_threshold;
    let mut log = Vec::new();
    let mut best: Option<(RecoverySchedule, SolutionFeedback)> = None;
    let mut space: Option<SearchSpace> = None;
    let mut first: Option<RecoverySchedule> = None;
    let mut stale = 0;

    for iteration in 1..=cfg.max_iterations.max(1) {
        let it_start = Instant::now();
        let mut stats = IterationStats {
            iteration,
            ..Default::default()
        };

        let t = Instant::now();
        let next = match (&space, &best) {
            (Some(prev), Some((sched, fb))) => {
                let grown = expand_space(prev, state, sched, fb, &cfg.space);
                stats.space_ms = ms(t.elapsed());
                grown
            }
            _ => {
                let prox = proximity(state, &state.baseline);
                stats.proximity_ms = ms(t.elapsed());
                let t = Instant::now();
                let s = build_initial_space_with(state, &cfg.space, &prox);
                stats.space_ms = ms(t.elapsed());
                s
            }
        };
        if let Some(prev) = &space {
            if next.option_count() == prev.option_count() {
                log::debug!("iteration {iteration}: space did not grow");
                break;
            }
        }
        stats.options = next.option_count();
        stats.change_options = next.change_option_count(state);

        let t = Instant::now();
        let tsn = build_tsn(&next, state)?;
        stats.tsn_ms = ms(t.elapsed());

        let t = Instant::now();
        let model = encode(&tsn, state)?;
        let reference = best.as_ref().map_or(&state.baseline, |(s, _)| s);
        let (model, report) = warm_start_from(&model, state, reference);
        stats.encode_ms = ms(t.elapsed());
        stats.variables = model.variables.len();
        stats.constraints = model.constraints.len();
        if !report.missing.is_empty() {
            log::debug!("iteration {iteration}: warm start misses {:?}", report.missing);
        }

        let mut limits = cfg.solve;
        if let Some(w) = cfg.wall {
            let left = w.saturating_sub(started.elapsed());
            limits.time = Some(limits.time.map_or(left, |t| t.min(left)));
        }
        let t = Instant::now();
        let outcome = solve(&model, &limits, &cfg.backend);
        stats.solve_ms = ms(t.elapsed());
        stats.bound = outcome.bound;
        stats.solve_objective = outcome.objective;
        stats.solver_nodes = outcome.stats.nodes;
        stats.optimal = outcome.status == crate::solver::SolveStatus::Optimal;

        let candidate = if outcome.has_solution() {
            let (sched, fb) = interpret_solution(&outcome, &model, &tsn, state, threshold)?;
            let violations = check_feasibility(&sched, state);
            if let Some(first) = violations.first() {
                return Err(AcrError::Infeasible {
                    iteration,
                    count: violations.len(),
                    first: first.clone(),
                });
            }
            if first.is_none() {
                first = Some(sched.clone());
            }
            Some((sched, fb))
        } else if best.is_none() {
            return Err(AcrError::NoSolution(outcome.status));
        } else {
            None
        };

        // Keep the better of the new plan and the previous one.
        let prev_obj = best.as_ref().map(|(s, _)| s.objective);
        let improved = match (&candidate, prev_obj) {
            (Some((s, _)), Some(p)) => s.objective < p - TOL * p.abs().max(1.0),
            (Some(_), None) => true,
            _ => false,
        };
        if improved || (best.is_none() && candidate.is_some()) {
            best = candidate;
            stale = 0;
        } else {
            stale += 1;
        }
        space = Some(next);
        stats.objective = best.as_ref().map_or(f64::INFINITY, |(s, _)| s.objective);
        stats.iteration_ms = ms(it_start.elapsed());
        log::info!(
            "iteration {iteration}: objective {} options {} solve {:.0} ms",
            stats.objective,
            stats.options,
            stats.solve_ms
        );
        log.push(stats);

        let (_, fb) = best.as_ref().expect("first iteration yields a plan");
        if fb.is_empty() || stale >= cfg.patience.max(1) {
            break;
        }
        if cfg.wall.is_some_and(|w| started.elapsed() >= w) {
            break;
        }
    }

    let (mut schedule, feedback) = best.expect("at least one iteration");
    schedule.iteration_log = log;
    Ok(AcrRun {
        first: first.expect("first iteration yields a plan"),
        schedule,
        space: space.expect("at least one iteration"),
        feedback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::example_instance;
    use crate::model::{apply_disruptions, operating_cost, DisruptedState};

    #[test]
    fn undisrupted_returns_baseline() {
        let inst = example_instance();
        let state = DisruptedState::undisrupted(&inst).unwrap();
        let s = run_acr(&state, &AcrConfig::default()).unwrap();
        assert_eq!(s.iteration_log.len(), 1);
        assert_eq!(s.objective, 0.0);
        assert!(s.same_plan(&state.baseline));
    }

    #[test]
    fn example_delays_only() {
        let state = apply_disruptions(&example_instance()).unwrap();
        let s = run_acr(&state, &AcrConfig::default()).unwrap();
        assert!(s.iteration_log.len() <= 3);
        assert_eq!(s.cancellations(), 0);
        assert!(check_feasibility(&s, &state).is_empty());
        for (f, d) in s.flights.iter().enumerate() {
            if let FlightDisposition::Scheduled { aircraft, crew, .. } = *d {
                assert_eq!(aircraft, state.index.flight_aircraft[f]);
                assert_eq!(crew, state.index.flight_crew[f]);
            }
        }
        assert!((operating_cost(&state, &s) - s.objective).abs() < 1e-6);
        let objs: Vec<f64> = s.iteration_log.iter().map(|r| r.objective).collect();
        assert!(objs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn interpret_rejects_split_group() {
        let state = apply_disruptions(&example_instance()).unwrap();
        let space = crate::space::build_initial_space(&state, &SpaceConfig::default());
        let tsn = build_tsn(&space, &state).unwrap();
        let model = encode(&tsn, &state).unwrap();
        let out = solve(&model, &SolveLimits::default(), &Backend::Builtin);
        let (sched, _) = interpret_solution(&out, &model, &tsn, &state, 60).unwrap();
        assert_eq!(sched.objective, out.objective);

        let mut bad = out.clone();
        let g = &model.groups[0];
        for &v in g {
            bad.assignment[v] = 0.5;
        }
        assert!(matches!(
            interpret_solution(&bad, &model, &tsn, &state, 60),
            Err(InterpretError::Group { .. })
        ));
    }

    #[test]
    fn canceled_option_shows_in_feedback() {
        let state = apply_disruptions(&example_instance()).unwrap();
        let space = crate::space::build_initial_space(&state, &SpaceConfig::default());
        let tsn = build_tsn(&space, &state).unwrap();
        let model = encode(&tsn, &state).unwrap();
        let mut out = solve(&model, &SolveLimits::default(), &Backend::Builtin);
        let meta = model.meta.as_ref().unwrap();
        let (entity, opts) = meta
            .groups
            .iter()
            .find(|(e, _)| matches!(e, Entity::Flight(_)))
            .unwrap();
        let Entity::Flight(f) = *entity else { unreachable!() };
        for &(k, v) in opts {
            out.assignment[v] = if k == OptionKind::Canceled { 1.0 } else { 0.0 };
        }
        let (sched, fb) = interpret_solution(&out, &model, &tsn, &state, 60).unwrap();
        assert_eq!(sched.flights[f], FlightDisposition::Canceled);
        assert!(fb.cancellations.contains(&f));
    }
}
