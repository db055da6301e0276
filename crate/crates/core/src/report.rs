//! Benchmark rows: one per run, averaged per instance.
//!
//! Column groups: recovery-loop sub-steps averaged per iteration (proximity,
//! space generation, network build, solve, whole iteration); passenger stage
//! time and generations; run summary (runs, full time, iterations per run,
//! initial and final passenger-stage cost).

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::pipeline::RecoveryRun;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub seed: u64,
    pub full_s: f64,
    pub acr_iterations: usize,
    pub proximity_s: f64,
    pub space_s: f64,
    pub tsn_ms: f64,
    pub solve_s: f64,
    pub iteration_s: f64,
    pub paxr_s: f64,
    pub generations: usize,
    pub initial_pax_cost: f64,
    pub final_pax_cost: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl BenchRow {
    pub fn from_run(instance: &str, seed: u64, run: &RecoveryRun) -> Self {
        let log = &run.acr.iteration_log;
        let (initial, fin) = run.pax_costs();
        Self {
            instance: instance.to_string(),
            seed,
            full_s: run.total_time.as_secs_f64(),
            acr_iterations: log.len(),
            proximity_s: mean(log.iter().map(|r| r.proximity_ms)) / 1e3,
            space_s: mean(log.iter().map(|r| r.space_ms)) / 1e3,
            tsn_ms: mean(log.iter().map(|r| r.tsn_ms)),
            solve_s: mean(log.iter().map(|r| r.solve_ms)) / 1e3,
            iteration_s: mean(log.iter().map(|r| r.iteration_ms)) / 1e3,
            paxr_s: run.paxr_time.as_secs_f64(),
            generations: run.paxr.generations,
            initial_pax_cost: initial,
            final_pax_cost: fin,
        }
    }
}

/// Per-instance averages over its rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub instance: String,
    pub runs: usize,
    pub full_s: f64,
    pub acr_iterations: f64,
    pub proximity_s: f64,
    pub space_s: f64,
    pub tsn_ms: f64,
    pub solve_s: f64,
    pub iteration_s: f64,
    pub paxr_s: f64,
    pub generations: f64,
    pub initial_pax_cost: f64,
    pub final_pax_cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn push(&mut self, row: BenchRow) {
        self.rows.push(row);
    }

    /// Averages per instance, in instance order.
    pub fn summary(&self) -> Vec<BenchSummary> {
        let mut by: BTreeMap<&str, Vec<&BenchRow>> = BTreeMap::new();
        for r in &self.rows {
            by.entry(&r.instance).or_default().push(r);
        }
        by.into_iter()
            .map(|(instance, rows)| {
                let m = |f: fn(&BenchRow) -> f64| mean(rows.iter().map(|r| f(r)));
                BenchSummary {
                    instance: instance.to_string(),
                    runs: rows.len(),
                    full_s: m(|r| r.full_s),
                    acr_iterations: m(|r| r.acr_iterations as f64),
                    proximity_s: m(|r| r.proximity_s),
                    space_s: m(|r| r.space_s),
                    tsn_ms: m(|r| r.tsn_ms),
                    solve_s: m(|r| r.solve_s),
                    iteration_s: m(|r| r.iteration_s),
                    paxr_s: m(|r| r.paxr_s),
                    generations: m(|r| r.generations as f64),
                    initial_pax_cost: m(|r| r.initial_pax_cost),
                    final_pax_cost: m(|r| r.final_pax_cost),
                }
            })
            .collect()
    }

    pub fn write_rows_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in self.summary() {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Cost columns only, for comparing runs where timings differ.
    pub fn cost_columns(&self) -> Vec<(String, u64, usize, f64, f64)> {
        self.rows
            .iter()
            .map(|r| (r.instance.clone(), r.seed, r.acr_iterations, r.initial_pax_cost, r.final_pax_cost))
            .collect()
    }
}
