//! Both stages end to end: aircraft and crew recovery, then passenger
//! re-accommodation with schedule improvement, then change orders.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::acr::{run_acr, AcrConfig, AcrError};
use crate::io::{write_plan, ChangeOrder, OrderError};
use crate::model::{check_feasibility, operating_cost, DisruptedState, RecoverySchedule, Violation};
use crate::paxr::{evolve, GaConfig, GaResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub acr: AcrConfig,
    pub ga: GaConfig,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self::with_budget(Duration::from_secs(600), 0.6)
    }
}

impl RecoveryConfig {
    /// Splits `total` between the two stages, `acr_share` going to the first.
    pub fn with_budget(total: Duration, acr_share: f64) -> Self {
        let share = acr_share.clamp(0.0, 1.0);
        let acr = AcrConfig {
            wall: Some(total.mul_f64(share)),
            ..AcrConfig::default()
        };
        let ga = GaConfig {
            budget: Some(total.mul_f64(1.0 - share)),
            ..GaConfig::default()
        };
        Self { acr, ga }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecoverError {
    #[error(transparent)]
    Acr(#[from] AcrError),
    #[error(transparent)]
    Orders(#[from] OrderError),
    #[error("final plan breaks {} rule(s), first: {:?}", .0.len(), .0.first())]
    Infeasible(Vec<Violation>),
    #[error("flight {flight} cabin {cabin} carries {load} over {capacity} seats")]
    Overbooked {
        flight: String,
        cabin: String,
        load: u32,
        capacity: u32,
    },
}

#[derive(Debug, Clone)]
pub struct RecoveryRun {
    /// Plan after the first stage, with its iteration log.
    pub acr: RecoverySchedule,
    pub acr_time: Duration,
    pub paxr: GaResult,
    pub paxr_time: Duration,
    pub total_time: Duration,
    pub orders: Vec<ChangeOrder>,
}

impl RecoveryRun {
    pub fn schedule(&self) -> &RecoverySchedule {
        &self.paxr.best.schedule
    }

    /// Operating plus passenger cost before and after schedule improvement.
    pub fn pax_costs(&self) -> (f64, f64) {
        (self.paxr.initial_fitness, self.paxr.best.fitness)
    }
}

pub fn recover(state: &DisruptedState, cfg: &RecoveryConfig) -> Result<RecoveryRun, RecoverError> {
    let started = Instant::now();
    let acr = run_acr(state, &cfg.acr)?;
    let acr_time = started.elapsed();

    let t = Instant::now();
    let mut paxr = evolve(state, &acr, &cfg.ga);
    let paxr_time = t.elapsed();
    paxr.best.schedule.objective = operating_cost(state, &paxr.best.schedule);

    let best = &paxr.best;
    let violations = check_feasibility(&best.schedule, state);
    if !violations.is_empty() {
        return Err(RecoverError::Infeasible(violations));
    }
    if let Some(&(f, cabin, load, capacity)) = best.assignment.capacity_violations(state).first() {
        return Err(RecoverError::Overbooked {
            flight: state.instance.flights[f].id.clone(),
            cabin: format!("{cabin:?}"),
            load,
            capacity,
        });
    }
    let orders = write_plan(state, &best.schedule, &best.assignment)?;
    Ok(RecoveryRun {
        acr,
        acr_time,
        paxr,
        paxr_time,
        total_time: started.elapsed(),
        orders,
    })
}
