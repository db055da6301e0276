//! Greedy passes: itineraries already under way, then untouched itineraries
//! on their booked flights, then rerouting of whoever is left.

use serde::{Deserialize, Serialize};

use super::path::{earliest_arrival_path, PathQuery};
use super::{arrival_of, pax_cost, ItineraryAssignment, PassengerAssignment, PaxGroup, Segment};
use crate::model::{DisruptedState, Minutes, RecoverySchedule, SeatCapacity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaxConfig {
    pub max_transfers: usize,
}

impl Default for PaxConfig {
    fn default() -> Self {
        Self { max_transfers: 3 }
    }
}

/// Working state shared by the three passes.
pub struct PaxWork<'a> {
    state: &'a DisruptedState,
    schedule: &'a RecoverySchedule,
    cfg: &'a PaxConfig,
    left: Vec<SeatCapacity>,
    out: Vec<ItineraryAssignment>,
    /// Passengers still to place, per itinerary.
    pending: Vec<u32>,
}

impl<'a> PaxWork<'a> {
    pub fn new(state: &'a DisruptedState, schedule: &'a RecoverySchedule, cfg: &'a PaxConfig) -> Self {
        let inst = &state.instance;
        Self {
            state,
            schedule,
            cfg,
            left: inst.flights.iter().map(|f| f.seats).collect(),
            out: vec![ItineraryAssignment::default(); inst.itineraries.len()],
            pending: inst.itineraries.iter().map(|i| i.passenger_count).collect(),
        }
    }

    fn legs(&self, i: usize) -> Vec<Segment> {
        self.state.instance.itineraries[i]
            .legs
            .iter()
            .map(|l| Segment {
                flight: self.state.index.flights[&l.flight],
                cabin: l.cabin,
            })
            .collect()
    }

    fn take(&mut self, segs: &[Segment], n: u32) {
        for s in segs {
            let c = self.left[s.flight].get_mut(s.cabin);
            *c = c.saturating_sub(n);
        }
    }

    fn room(&self, segs: &[Segment]) -> u32 {
        segs.iter()
            .map(|s| self.left[s.flight].get(s.cabin))
            .min()
            .unwrap_or(u32::MAX)
    }

    fn departure(&self, f: usize) -> Option<Minutes> {
        self.schedule.flights[f].departure()
    }

    /// Whether the legs are flown and connect at the minimum passenger
    /// connection time, given an arrival `after` the previous leg.
    fn connects(&self, segs: &[Segment], mut after: Option<(usize, Minutes)>) -> bool {
        let idx = &self.state.index;
        for s in segs {
            let Some(dep) = self.departure(s.flight) else {
                return false;
            };
            if let Some((airport, arr)) = after {
                let mct = self.state.instance.airports[airport].min_pax_connection;
                if idx.flight_origin[s.flight] != airport || dep < arr + mct {
                    return false;
                }
            }
            after = Some((idx.flight_destination[s.flight], arrival_of(self.state, self.schedule, s.flight)));
        }
        true
    }

    /// Repeated earliest-arrival paths for `n` passengers; returns those placed.
    fn reroute(&mut self, i: usize, prefix: &[Segment], q: PathQuery, mut n: u32) -> u32 {
        let mut placed = 0;
        while n > 0 {
            let Some(path) = earliest_arrival_path(self.state, self.schedule, &self.left, &q) else {
                break;
            };
            let k = self.room(&path).min(n);
            if k == 0 {
                break;
            }
            self.take(&path, k);
            let mut segments = prefix.to_vec();
            segments.extend(path);
            self.push_group(i, segments, k);
            n -= k;
            placed += k;
        }
        placed
    }

    fn push_group(&mut self, i: usize, segments: Vec<Segment>, count: u32) {
        let groups = &mut self.out[i].groups;
        match groups.iter_mut().find(|g| g.segments == segments) {
            Some(g) => g.count += count,
            None => groups.push(PaxGroup { segments, count }),
        }
    }

    fn destination(&self, i: usize) -> usize {
        let last = self.legs(i).last().unwrap().flight;
        self.state.index.flight_destination[last]
    }

    fn begun(&self, i: usize) -> bool {
        self.legs(i)
            .first()
            .is_some_and(|s| self.state.flights[s.flight].is_past())
    }

    pub fn finish(self) -> PassengerAssignment {
        let mut out = self.out;
        for (a, &p) in out.iter_mut().zip(&self.pending) {
            a.unassigned = p;
        }
        let mut pax = PassengerAssignment {
            itineraries: out,
            cost: Default::default(),
        };
        pax.cost = pax_cost(self.state, self.schedule, &pax);
        pax
    }
}

/// Pass 1: itineraries with flown legs, shortest remaining trip first. The
/// flown prefix stays; the booked continuation keeps as many passengers as
/// fit without downgrade; the rest are rerouted from where they stand.
pub fn assign_fixed(w: &mut PaxWork) {
    let inst = &w.state.instance;
    let mut order: Vec<(Minutes, usize)> = (0..inst.itineraries.len())
        .filter(|&i| w.begun(i))
        .map(|i| {
            let legs = w.legs(i);
            let flown = legs
                .iter()
                .take_while(|s| w.state.flights[s.flight].is_past())
                .last()
                .unwrap();
            let last = legs.last().unwrap();
            let remaining = inst.flights[last.flight].sched_arrival()
                - arrival_of(w.state, w.schedule, flown.flight);
            (remaining, i)
        })
        .collect();
    order.sort();
    for (_, i) in order {
        let legs = w.legs(i);
        let cut = legs
            .iter()
            .position(|s| !w.state.flights[s.flight].is_past())
            .unwrap_or(legs.len());
        let (prefix, rest) = legs.split_at(cut);
        let n = w.pending[i];
        let last = prefix.last().unwrap().flight;
        let at = (
            w.state.index.flight_destination[last],
            arrival_of(w.state, w.schedule, last),
        );
        let kept = if rest.is_empty() {
            n
        } else if w.connects(rest, Some(at)) {
            w.room(rest).min(n)
        } else {
            0
        };
        // Seats on flown legs were taken when they were booked.
        w.take(prefix, n);
        if kept > 0 {
            w.take(rest, kept);
            w.push_group(i, legs.clone(), kept);
        }
        let mut stranded = n - kept;
        if stranded > 0 {
            let q = PathQuery {
                origin: at.0,
                destination: w.destination(i),
                ready: at.1 + inst.airports[at.0].min_pax_connection,
                booked: inst.itineraries[i].booked_class(),
                max_transfers: w.cfg.max_transfers,
            };
            stranded -= w.reroute(i, prefix, q, stranded);
        }
        if stranded > 0 {
            w.out[i].stranded.push(PaxGroup {
                segments: prefix.to_vec(),
                count: stranded,
            });
        }
        w.pending[i] = stranded;
    }
}

/// Untouched itineraries by decreasing estimated cancellation cost.
fn by_cancellation_cost(w: &PaxWork) -> Vec<usize> {
    let inst = &w.state.instance;
    let mut order: Vec<usize> = (0..inst.itineraries.len()).filter(|&i| !w.begun(i)).collect();
    order.sort_by(|&a, &b| {
        let ca = inst.itineraries[a].estimated_cancellation_cost(&inst.costs);
        let cb = inst.itineraries[b].estimated_cancellation_cost(&inst.costs);
        cb.total_cmp(&ca).then(a.cmp(&b))
    });
    order
}

/// Pass 2: untouched itineraries keep their booked flights when they still
/// connect, as many passengers as seats allow without downgrade.
pub fn assign_feasible(w: &mut PaxWork) {
    for i in by_cancellation_cost(w) {
        let legs = w.legs(i);
        if !w.connects(&legs, None) {
            continue;
        }
        let k = w.room(&legs).min(w.pending[i]);
        if k > 0 {
            w.take(&legs, k);
            w.push_group(i, legs, k);
            w.pending[i] -= k;
        }
    }
}

/// Pass 3: everyone left goes on earliest-arrival paths from the origin, no
/// earlier than the booked departure.
pub fn assign_infeasible(w: &mut PaxWork) {
    let inst = &w.state.instance;
    for i in by_cancellation_cost(w) {
        let n = w.pending[i];
        if n == 0 {
            continue;
        }
        let legs = w.legs(i);
        let first = legs[0].flight;
        let q = PathQuery {
            origin: w.state.index.flight_origin[first],
            destination: w.destination(i),
            ready: inst.flights[first].sched_departure.max(inst.anchors.current_time),
            booked: inst.itineraries[i].booked_class(),
            max_transfers: w.cfg.max_transfers,
        };
        let placed = w.reroute(i, &[], q, n);
        w.pending[i] -= placed;
    }
}

/// Runs the three passes on `schedule`.
pub fn assign_itineraries(
    state: &DisruptedState,
    schedule: &RecoverySchedule,
    cfg: &PaxConfig,
) -> PassengerAssignment {
    let mut w = PaxWork::new(state, schedule, cfg);
    assign_fixed(&mut w);
    assign_feasible(&mut w);
    assign_infeasible(&mut w);
    w.finish()
}
