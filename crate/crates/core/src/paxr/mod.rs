//! Passenger re-accommodation on a recovered schedule, and a mutation-only
//! genetic search over schedule variants.

use crate::model::{CabinClass, DisruptedState, FlightStatus, Minutes, RecoverySchedule, SeatCapacity};

mod assign;
mod ga;
mod path;

pub use assign::{assign_feasible, assign_fixed, assign_infeasible, assign_itineraries, PaxConfig, PaxWork};
pub use ga::{evolve, evolve_with, mutate, score, GaConfig, GaResult, GenerationStats, Individual, Mutation};
pub use path::{earliest_arrival_path, PathQuery};

/// One flight of a passenger path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub flight: usize,
    pub cabin: CabinClass,
}

/// Passengers of one itinerary travelling the same path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaxGroup {
    pub segments: Vec<Segment>,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ItineraryAssignment {
    /// Paths ending at the itinerary's destination.
    pub groups: Vec<PaxGroup>,
    /// Passengers left without a path, after flying `stranded` legs if any.
    pub unassigned: u32,
    /// Legs already flown by passengers who are then stranded.
    pub stranded: Vec<PaxGroup>,
}

impl ItineraryAssignment {
    pub fn assigned(&self) -> u32 {
        self.groups.iter().map(|g| g.count).sum()
    }
}

/// Per-itinerary paths plus the passenger part of the cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PassengerAssignment {
    pub itineraries: Vec<ItineraryAssignment>,
    pub cost: PaxCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PaxCost {
    pub cancellation: f64,
    pub delay: f64,
    pub downgrade: f64,
}

impl PaxCost {
    pub fn total(&self) -> f64 {
        self.cancellation + self.delay + self.downgrade
    }
}

impl PassengerAssignment {
    /// Everyone on their booked legs, as before any disruption.
    pub fn original(state: &DisruptedState) -> Self {
        let idx = &state.index;
        let itineraries = state
            .instance
            .itineraries
            .iter()
            .map(|it| ItineraryAssignment {
                groups: vec![PaxGroup {
                    segments: it
                        .legs
                        .iter()
                        .map(|l| Segment {
                            flight: idx.flights[&l.flight],
                            cabin: l.cabin,
                        })
                        .collect(),
                    count: it.passenger_count,
                }],
                unassigned: 0,
                stranded: Vec::new(),
            })
            .collect();
        Self {
            itineraries,
            cost: PaxCost::default(),
        }
    }

    /// Seats taken per flight and cabin, recomputed from the paths.
    pub fn loads(&self, n_flights: usize) -> Vec<SeatCapacity> {
        let mut loads = vec![SeatCapacity::default(); n_flights];
        for it in &self.itineraries {
            for g in it.groups.iter().chain(&it.stranded) {
                for s in &g.segments {
                    *loads[s.flight].get_mut(s.cabin) += g.count;
                }
            }
        }
        loads
    }

    /// `(flight, cabin, load, capacity)` for every overbooked cabin on a
    /// flight that is not yet flown.
    pub fn capacity_violations(&self, state: &DisruptedState) -> Vec<(usize, CabinClass, u32, u32)> {
        let loads = self.loads(state.instance.flights.len());
        let mut out = Vec::new();
        for (f, load) in loads.iter().enumerate() {
            if state.flights[f].status == FlightStatus::Past {
                continue;
            }
            for c in CabinClass::ALL {
                let cap = state.instance.flights[f].seats.get(c);
                if load.get(c) > cap {
                    out.push((f, c, load.get(c), cap));
                }
            }
        }
        out
    }

    pub fn total_unassigned(&self) -> u64 {
        self.itineraries.iter().map(|i| i.unassigned as u64).sum()
    }
}

/// Passenger cost of an assignment under `schedule`: cancellations for
/// unassigned passengers, arrival delay against the booked arrival, and
/// class steps lost per segment.
pub fn pax_cost(state: &DisruptedState, schedule: &RecoverySchedule, pax: &PassengerAssignment) -> PaxCost {
    let inst = &state.instance;
    let idx = &state.index;
    let mut cost = PaxCost::default();
    for (it, a) in inst.itineraries.iter().zip(&pax.itineraries) {
        cost.cancellation += a.unassigned as f64 * it.cancellation_cost(&inst.costs);
        let last = idx.flights[&it.legs.last().expect("itinerary has legs").flight];
        let booked_arrival = inst.flights[last].sched_arrival();
        let booked = it.booked_class();
        for g in &a.groups {
            let Some(end) = g.segments.last() else { continue };
            let arrival = arrival_of(state, schedule, end.flight);
            let late = (arrival - booked_arrival).max(0);
            cost.delay += it.delay_cost(&inst.costs) * g.count as f64 * late as f64;
            for s in &g.segments {
                let booked = it
                    .legs
                    .iter()
                    .find(|l| idx.flights[&l.flight] == s.flight)
                    .map_or(booked, |l| l.cabin);
                let steps = booked.rank().saturating_sub(s.cabin.rank());
                cost.downgrade += it.downgrade_cost(&inst.costs) * steps as f64 * g.count as f64;
            }
        }
    }
    cost
}

pub(crate) fn arrival_of(state: &DisruptedState, schedule: &RecoverySchedule, f: usize) -> Minutes {
    let dep = schedule.flights[f]
        .departure()
        .unwrap_or(state.flights[f].departure);
    dep + state.instance.flights[f].duration
}
