use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::Segment;
use crate::model::{CabinClass, DisruptedState, Minutes, RecoverySchedule, SeatCapacity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathQuery {
    pub origin: usize,
    pub destination: usize,
    /// Earliest departure of the first flight.
    pub ready: Minutes,
    pub booked: CabinClass,
    pub max_transfers: usize,
}

/// Highest class at or below `booked` with a free seat.
pub(crate) fn best_cabin(left: &SeatCapacity, booked: CabinClass) -> Option<CabinClass> {
    booked.downgrade_ladder().find(|&c| left.get(c) > 0)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Label {
    downgrade: u32,
    flight: usize,
}

/// Earliest-arrival path with a free seat on every segment, over scheduled
/// flights that have not departed. Ties go to fewer transfers, then fewer
/// class steps lost, then lower flight index.
pub fn earliest_arrival_path(
    state: &DisruptedState,
    schedule: &RecoverySchedule,
    left: &[SeatCapacity],
    q: &PathQuery,
) -> Option<Vec<Segment>> {
    let inst = &state.instance;
    let idx = &state.index;
    let now = inst.anchors.current_time;
    let layers = q.max_transfers + 1;
    let n_airports = inst.airports.len();

    // Departure events in time order.
    let mut deps: Vec<(Minutes, usize)> = schedule
        .flights
        .iter()
        .enumerate()
        .filter_map(|(f, d)| d.departure().map(|t| (t, f)))
        .filter(|&(t, f)| t >= now && t >= q.ready && !state.flights[f].is_past())
        .collect();
    deps.sort_unstable();

    // best[airport][k]: best label among arrivals ready to connect, k = legs flown.
    let mut best: Vec<Vec<Option<Label>>> = vec![vec![None; layers]; n_airports];
    // label[f][k] with k = legs before f; pred flight.
    let mut label: Vec<Vec<Option<(u32, Option<usize>)>>> = vec![Vec::new(); inst.flights.len()];
    let mut arrivals: BinaryHeap<Reverse<(Minutes, usize, usize)>> = BinaryHeap::new();
    let mut found: Option<(Minutes, usize, u32, usize)> = None;

    for &(t, f) in &deps {
        if found.is_some_and(|(arr, ..)| t >= arr) {
            break;
        }
        while let Some(&Reverse((ready, g, k))) = arrivals.peek() {
            if ready > t {
                break;
            }
            arrivals.pop();
            let d = idx.flight_destination[g];
            let l = Label {
                downgrade: label[g][k].unwrap().0,
                flight: g,
            };
            if k + 1 < layers && best[d][k + 1].is_none_or(|b| l < b) {
                best[d][k + 1] = Some(l);
            }
        }
        let Some(cabin) = best_cabin(&left[f], q.booked) else {
            continue;
        };
        let steps = q.booked.rank() - cabin.rank();
        let o = idx.flight_origin[f];
        let mut row = vec![None; layers];
        let mut any = false;
        for (k, slot) in row.iter_mut().enumerate() {
            let from = if k == 0 {
                (o == q.origin).then_some((0, None))
            } else {
                best[o][k].map(|l| (l.downgrade, Some(l.flight)))
            };
            if let Some((d, pred)) = from {
                *slot = Some((d + steps, pred));
                any = true;
            }
        }
        if !any {
            continue;
        }
        let d = idx.flight_destination[f];
        let arr = t + inst.flights[f].duration;
        label[f] = row;
        for k in 0..layers {
            let Some((dg, _)) = label[f][k] else { continue };
            if d == q.destination {
                let cand = (arr, k, dg, f);
                if found.is_none_or(|b| cand < b) {
                    found = Some(cand);
                }
            } else {
                arrivals.push(Reverse((arr + inst.airports[d].min_pax_connection, f, k)));
            }
        }
    }

    let (_, mut k, _, mut f) = found?;
    let mut path = Vec::new();
    loop {
        let cabin = best_cabin(&left[f], q.booked).unwrap();
        path.push(Segment { flight: f, cabin });
        match label[f][k].unwrap().1 {
            Some(p) => {
                f = p;
                k -= 1;
            }
            None => break,
        }
    }
    path.reverse();
    Some(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn ap(id: &str) -> Airport {
        Airport {
            id: id.into(),
            min_turnaround: 30,
            min_transit: 20,
            min_crew_connection: 30,
            min_pax_connection: 30,
        }
    }

    fn fl(id: &str, o: &str, d: &str, dep: Minutes, dur: Minutes, ac: &str) -> Flight {
        Flight {
            id: id.into(),
            origin: o.into(),
            destination: d.into(),
            sched_departure: dep,
            duration: dur,
            original_aircraft: ac.into(),
            original_crew: "C".into(),
            multileg_group: None,
            leg_index: 0,
            seats: SeatCapacity {
                economy: 10,
                premium: 0,
                business: 2,
            },
        }
    }

    /// X to Z nonstop at 600 (arrives 700), or via Y at 500 and 580 (arrives 640).
    fn toy() -> DisruptedState {
        let inst = ProblemInstance {
            name: "p".into(),
            anchors: TimeAnchors {
                current_time: 400,
                recovery_start: 400,
                recovery_finish: 2000,
                max_delay: 60,
            },
            costs: CostCoefficients::default(),
            airports: vec![ap("X"), ap("Y"), ap("Z")],
            aircraft: ["A", "B", "D"]
                .iter()
                .map(|a| Aircraft {
                    id: a.to_string(),
                    initial_position: if *a == "D" { "Y".into() } else { "X".into() },
                    available_from: 0,
                })
                .collect(),
            crew_groups: vec![CrewGroup {
                id: "C".into(),
                initial_position: "X".into(),
                available_from: 0,
                flight_time_limit: 1000,
            }],
            flights: vec![
                fl("N", "X", "Z", 600, 100, "A"),
                fl("L1", "X", "Y", 500, 40, "B"),
                fl("L2", "Y", "Z", 580, 60, "D"),
            ],
            maintenances: vec![],
            slots: vec![],
            itineraries: vec![],
            disruptions: vec![],
        };
        DisruptedState::undisrupted(&inst).unwrap()
    }

    fn query(booked: CabinClass) -> PathQuery {
        PathQuery {
            origin: 0,
            destination: 2,
            ready: 400,
            booked,
            max_transfers: 3,
        }
    }

    #[test]
    fn connection_beats_later_nonstop() {
        let s = toy();
        let left: Vec<_> = s.instance.flights.iter().map(|f| f.seats).collect();
        let p = earliest_arrival_path(&s, &s.baseline, &left, &query(CabinClass::Economy)).unwrap();
        assert_eq!(p.iter().map(|x| x.flight).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn full_or_missed_connection_falls_back() {
        let s = toy();
        let mut left: Vec<_> = s.instance.flights.iter().map(|f| f.seats).collect();
        left[2] = SeatCapacity::default();
        let p = earliest_arrival_path(&s, &s.baseline, &left, &query(CabinClass::Economy)).unwrap();
        assert_eq!(p, vec![Segment { flight: 0, cabin: CabinClass::Economy }]);

        let left: Vec<_> = s.instance.flights.iter().map(|f| f.seats).collect();
        let mut q = query(CabinClass::Economy);
        q.max_transfers = 0;
        let p = earliest_arrival_path(&s, &s.baseline, &left, &q).unwrap();
        assert_eq!(p.len(), 1);
        q.ready = 601;
        assert!(earliest_arrival_path(&s, &s.baseline, &left, &q).is_none());
    }

    #[test]
    fn downgrade_only_when_needed() {
        let s = toy();
        let mut left: Vec<_> = s.instance.flights.iter().map(|f| f.seats).collect();
        let p = earliest_arrival_path(&s, &s.baseline, &left, &query(CabinClass::Business)).unwrap();
        assert!(p.iter().all(|x| x.cabin == CabinClass::Business));
        left[1].business = 0;
        let p = earliest_arrival_path(&s, &s.baseline, &left, &query(CabinClass::Business)).unwrap();
        assert_eq!(p[0].cabin, CabinClass::Economy);
        assert_eq!(p[1].cabin, CabinClass::Business);
    }
}
