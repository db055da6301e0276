use serde::{Deserialize, Serialize};

use super::instance::Minutes;
use super::state::DisruptedState;

/// What happens to one flight. Resources are instance indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlightDisposition {
    Scheduled {
        departure: Minutes,
        aircraft: usize,
        crew: usize,
    },
    Canceled,
}

impl FlightDisposition {
    pub fn is_scheduled(&self) -> bool {
        matches!(self, FlightDisposition::Scheduled { .. })
    }

    pub fn departure(&self) -> Option<Minutes> {
        match *self {
            FlightDisposition::Scheduled { departure, .. } => Some(departure),
            FlightDisposition::Canceled => None,
        }
    }

    pub fn aircraft(&self) -> Option<usize> {
        match *self {
            FlightDisposition::Scheduled { aircraft, .. } => Some(aircraft),
            FlightDisposition::Canceled => None,
        }
    }

    pub fn crew(&self) -> Option<usize> {
        match *self {
            FlightDisposition::Scheduled { crew, .. } => Some(crew),
            FlightDisposition::Canceled => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaintenanceDisposition {
    Succeeded { airport: usize, start: Minutes },
    Failed,
}

/// Timing and size of one ACR iteration, in the column layout of the
/// benchmark report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub options: usize,
    pub change_options: usize,
    pub variables: usize,
    pub constraints: usize,
    pub proximity_ms: f64,
    pub space_ms: f64,
    pub tsn_ms: f64,
    pub encode_ms: f64,
    pub solve_ms: f64,
    pub iteration_ms: f64,
    /// Best plan objective after this iteration.
    pub objective: f64,
    /// Objective the solver returned in this iteration.
    #[serde(default)]
    pub solve_objective: f64,
    pub bound: f64,
    pub solver_nodes: usize,
    pub optimal: bool,
}

/// Per-flight and per-maintenance dispositions plus the ACR objective.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecoverySchedule {
    pub flights: Vec<FlightDisposition>,
    pub maintenances: Vec<MaintenanceDisposition>,
    pub objective: f64,
    pub iteration_log: Vec<IterationStats>,
}

impl RecoverySchedule {
    /// True when the dispositions (not the log or objective) are equal.
    pub fn same_plan(&self, other: &RecoverySchedule) -> bool {
        self.flights == other.flights && self.maintenances == other.maintenances
    }

    pub fn cancellations(&self) -> usize {
        self.flights.iter().filter(|d| !d.is_scheduled()).count()
    }
}

/// Operating cost of a schedule: delays against the original timetable,
/// cancellations, resource swaps, failed maintenance and penalized slot
/// underuse. Equals the MILP objective of the same decisions.
pub fn operating_cost(state: &DisruptedState, schedule: &RecoverySchedule) -> f64 {
    let inst = &state.instance;
    let c = &inst.costs;
    let mut cost = 0.0;
    for (f, disp) in schedule.flights.iter().enumerate() {
        let fs = &state.flights[f];
        if fs.is_past() || fs.removed {
            continue;
        }
        cost += match *disp {
            FlightDisposition::Canceled => c.cancellation_per_flight,
            FlightDisposition::Scheduled {
                departure,
                aircraft,
                crew,
            } => scheduled_cost(state, f, departure, aircraft, crew),
        };
    }
    for (m, disp) in schedule.maintenances.iter().enumerate() {
        if *disp == MaintenanceDisposition::Failed {
            cost += inst.maintenances[m].fail_penalty;
        }
    }
    for (s, slot) in inst.slots.iter().enumerate() {
        if slot.nonuse_penalty == 0.0 {
            continue;
        }
        let used = state.slot_members(s, schedule).count() as i64;
        let unused = (state.effective_slot_capacity(s) as i64 - used).max(0);
        cost += slot.nonuse_penalty * unused as f64;
    }
    cost
}

/// Cost of flying flight `f` at `departure` with the given resources.
pub fn scheduled_cost(
    state: &DisruptedState,
    f: usize,
    departure: Minutes,
    aircraft: usize,
    crew: usize,
) -> f64 {
    let c = &state.instance.costs;
    let delay = (departure - state.instance.flights[f].sched_departure).max(0);
    let mut cost = c.delay_per_minute * delay as f64;
    if aircraft != state.index.flight_aircraft[f] {
        cost += c.swap_penalty;
    }
    if crew != state.index.flight_crew[f] {
        cost += c.swap_penalty;
    }
    cost
}
