//! Schedule legality checks, derived directly from the business rules and
//! independent of the time-space network and MILP machinery.

use std::fmt;

use super::instance::Minutes;
use super::schedule::{FlightDisposition, MaintenanceDisposition, RecoverySchedule};
use super::state::{DisruptedState, FlightStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    /// Aircraft not where its next flight departs.
    Rotation,
    /// Aircraft turnaround or transit minimum not respected.
    Turnaround,
    /// Crew not where its next flight departs, or connection too short.
    CrewConnection,
    CrewDuty,
    SlotCapacity,
    /// Departure at a slotted airport outside every slot window.
    SlotCoverage,
    Maintenance,
    MultilegIntegrity,
    /// Advanced, over-delayed, or moved into the pre-recovery gap.
    TimeRule,
    /// A past, removed, or post-finish flight changed.
    FixedChanged,
    AircraftUnavailable,
    AirportClosed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub entity: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}]: {}", self.kind, self.entity, self.detail)
    }
}

/// Options for [`check_schedule`].
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub maintenance: bool,
    pub time_rules: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            maintenance: true,
            time_rules: true,
        }
    }
}

/// Every rule a recovery schedule must satisfy; empty means feasible.
pub fn check_feasibility(schedule: &RecoverySchedule, state: &DisruptedState) -> Vec<Violation> {
    check_schedule(schedule, state, CheckOptions::default())
}

pub fn check_schedule(
    schedule: &RecoverySchedule,
    state: &DisruptedState,
    opts: CheckOptions,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let inst = &state.instance;
    let idx = &state.index;
    let mut push = |kind, entity: &str, detail: String| {
        out.push(Violation {
            kind,
            entity: entity.to_string(),
            detail,
        })
    };

    if schedule.flights.len() != inst.flights.len()
        || schedule.maintenances.len() != inst.maintenances.len()
    {
        push(
            ViolationKind::FixedChanged,
            "schedule",
            "disposition count does not match the instance".into(),
        );
        return out;
    }

    // Per-flight rules.
    for (f, disp) in schedule.flights.iter().enumerate() {
        let fl = &inst.flights[f];
        let fs = &state.flights[f];
        let planned = FlightDisposition::Scheduled {
            departure: fs.departure,
            aircraft: idx.flight_aircraft[f],
            crew: idx.flight_crew[f],
        };
        if fs.removed {
            if disp.is_scheduled() {
                push(ViolationKind::FixedChanged, &fl.id, "flight canceled by disruption is scheduled".into());
            }
            continue;
        }
        match fs.status {
            FlightStatus::Past => {
                if *disp != planned {
                    push(ViolationKind::FixedChanged, &fl.id, "past flight changed".into());
                }
                continue;
            }
            FlightStatus::FixedAfterFinish => {
                if disp.is_scheduled() && *disp != planned {
                    push(ViolationKind::FixedChanged, &fl.id, "flight after recovery finish changed".into());
                }
                continue;
            }
            FlightStatus::Open => {}
        }
        let FlightDisposition::Scheduled {
            departure,
            aircraft,
            ..
        } = *disp
        else {
            continue;
        };
        if opts.time_rules && !state.time_allowed(f, departure) {
            push(
                ViolationKind::TimeRule,
                &fl.id,
                format!(
                    "departure {departure} outside allowed range [{}, {}]",
                    fs.departure,
                    state.latest_departure(f)
                ),
            );
        }
        if state.closed_at(f, departure) {
            push(ViolationKind::AirportClosed, &fl.id, format!("airport closed at {departure}"));
        }
        if state.aircraft_unavailable(aircraft, departure, departure + fl.duration) {
            push(
                ViolationKind::AircraftUnavailable,
                &fl.id,
                format!("aircraft {} unavailable", inst.aircraft[aircraft].id),
            );
        }
        if !state.slot_covered(f, departure) {
            push(ViolationKind::SlotCoverage, &fl.id, format!("no slot at {departure}"));
        }
    }

    // Aircraft rotations and maintenance.
    for (a, ac) in inst.aircraft.iter().enumerate() {
        let rot = state.rotation(a, schedule);
        let mut at = idx.airports[&ac.initial_position];
        let mut ready = ac.available_from;
        let mut prev: Option<usize> = None;
        for &f in &rot {
            let dep = schedule.flights[f].departure().unwrap_or_default();
            let fl = &inst.flights[f];
            if idx.flight_origin[f] != at {
                push(
                    ViolationKind::Rotation,
                    &fl.id,
                    format!("aircraft {} is at {} not {}", ac.id, inst.airports[at].id, fl.origin),
                );
            } else if dep < ready {
                let detail = match prev {
                    Some(p) => format!("departs {dep} before aircraft {} is ready after {} at {ready}", ac.id, inst.flights[p].id),
                    None => format!("departs {dep} before aircraft {} is available at {ready}", ac.id),
                };
                push(ViolationKind::Turnaround, &fl.id, detail);
            }
            at = idx.flight_destination[f];
            ready = dep + fl.duration + state.ground_time_after(f);
            prev = Some(f);
        }

        if !opts.maintenance {
            continue;
        }
        for &m in &idx.maintenances_by_aircraft[a] {
            let mt = &inst.maintenances[m];
            match schedule.maintenances[m] {
                MaintenanceDisposition::Succeeded { airport, start } => {
                    let in_window = mt.allowed_windows.iter().any(|w| {
                        idx.airports[&w.airport] == airport
                            && w.earliest_start <= start
                            && start <= w.latest_start
                    });
                    if !in_window {
                        push(ViolationKind::Maintenance, &mt.id, format!("start {start} outside every allowed window"));
                        continue;
                    }
                    let fits = state
                        .ground_gaps(a, schedule)
                        .iter()
                        .any(|&(p, from, next)| p == airport && from <= start && start.saturating_add(mt.duration) <= next);
                    if !fits {
                        push(ViolationKind::Maintenance, &mt.id, format!("aircraft {} not on ground at {} during [{start}, {})", ac.id, inst.airports[airport].id, start + mt.duration));
                    }
                }
                MaintenanceDisposition::Failed => {
                    let latest = mt.latest_start();
                    let last_ready = rot
                        .iter()
                        .filter(|&&f| !state.flights[f].is_past())
                        .map(|&f| {
                            schedule.flights[f].departure().unwrap_or_default()
                                + inst.flights[f].duration
                                + state.ground_time_after(f)
                        })
                        .max();
                    if let Some(r) = last_ready {
                        if r > latest {
                            push(ViolationKind::Maintenance, &mt.id, format!("aircraft {} keeps flying after failing maintenance (ready {r} > latest start {latest})", ac.id));
                        }
                    }
                }
            }
        }
    }

    // Crew sequences and duty limits.
    for (c, cg) in inst.crew_groups.iter().enumerate() {
        let seq = state.crew_sequence(c, schedule);
        let mut at = idx.airports[&cg.initial_position];
        let mut ready_ground = cg.available_from;
        let mut last: Option<(usize, Minutes)> = None; // (flight, arrival)
        let mut flown: Minutes = 0;
        for &f in &seq {
            let fl = &inst.flights[f];
            let FlightDisposition::Scheduled {
                departure,
                aircraft,
                ..
            } = schedule.flights[f]
            else {
                continue;
            };
            flown += fl.duration;
            let origin = idx.flight_origin[f];
            if origin != at {
                push(
                    ViolationKind::CrewConnection,
                    &fl.id,
                    format!("crew {} is at {} not {}", cg.id, inst.airports[at].id, fl.origin),
                );
            } else {
                let ok = match last {
                    Some((p, arr)) if idx.consecutive_legs(p, f) => departure >= arr,
                    Some((p, arr)) if schedule.flights[p].aircraft() == Some(aircraft) => departure >= arr,
                    Some((_, arr)) => departure - state.crew_connection(origin) >= arr,
                    None => departure - state.crew_connection(origin) >= ready_ground,
                };
                if !ok {
                    push(
                        ViolationKind::CrewConnection,
                        &fl.id,
                        format!("crew {} cannot connect to departure {departure}", cg.id),
                    );
                }
            }
            at = idx.flight_destination[f];
            let arr = departure + fl.duration;
            ready_ground = arr;
            last = Some((f, arr));
        }
        if flown > cg.flight_time_limit {
            push(
                ViolationKind::CrewDuty,
                &cg.id,
                format!("flight time {flown} exceeds limit {}", cg.flight_time_limit),
            );
        }
    }

    // Slot capacities.
    for (s, slot) in inst.slots.iter().enumerate() {
        let used = state.slot_members(s, schedule).count() as u32;
        let cap = state.effective_slot_capacity(s);
        if used > cap {
            push(
                ViolationKind::SlotCapacity,
                &slot.id,
                format!("{used} departures exceed capacity {cap}"),
            );
        }
    }

    // Multi-leg integrity.
    for g in &idx.multileg_groups {
        let legs: Vec<_> = g
            .legs
            .iter()
            .map(|&f| schedule.flights[f])
            .collect();
        let scheduled: Vec<_> = legs.iter().filter(|d| d.is_scheduled()).collect();
        if scheduled.is_empty() {
            continue;
        }
        let pairs: Vec<_> = scheduled
            .iter()
            .map(|d| (d.aircraft(), d.crew()))
            .collect();
        if scheduled.len() != legs.len() || pairs.windows(2).any(|w| w[0] != w[1]) {
            push(
                ViolationKind::MultilegIntegrity,
                &g.id,
                "legs not all flown by one aircraft and crew".into(),
            );
        }
    }

    out
}
