//! Change orders: the difference between a recovery plan and the disrupted
//! baseline, as instructions that replay to the plan exactly.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::model::{
    DisruptedState, FlightDisposition, ItineraryLeg, MaintenanceDisposition, Minutes, RecoverySchedule,
};
use crate::paxr::{ItineraryAssignment, PassengerAssignment, PaxGroup, Segment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RebookedGroup {
    pub count: u32,
    pub legs: Vec<ItineraryLeg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderKind {
    Delay {
        flight: String,
        departure: Minutes,
        minutes: Minutes,
    },
    Cancel {
        flight: String,
    },
    /// Consecutive flights of one rotation moved to `aircraft`.
    AircraftSwap {
        flights: Vec<String>,
        aircraft: String,
    },
    CrewSwap {
        flights: Vec<String>,
        crew: String,
    },
    /// `airport` and `start` are absent when the maintenance is not performed.
    MaintenancePlacement {
        maintenance: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        airport: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Minutes>,
    },
    ItineraryRebooking {
        itinerary: String,
        groups: Vec<RebookedGroup>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        stranded: Vec<RebookedGroup>,
        unassigned: u32,
    },
}

impl OrderKind {
    fn rank(&self) -> u8 {
        match self {
            OrderKind::Cancel { .. } => 0,
            OrderKind::Delay { .. } => 1,
            OrderKind::AircraftSwap { .. } => 2,
            OrderKind::CrewSwap { .. } => 3,
            OrderKind::MaintenancePlacement { .. } => 4,
            OrderKind::ItineraryRebooking { .. } => 5,
        }
    }

    pub fn target(&self) -> &str {
        match self {
            OrderKind::Delay { flight, .. } | OrderKind::Cancel { flight } => flight,
            OrderKind::AircraftSwap { flights, .. } | OrderKind::CrewSwap { flights, .. } => {
                flights.first().map_or("", String::as_str)
            }
            OrderKind::MaintenancePlacement { maintenance, .. } => maintenance,
            OrderKind::ItineraryRebooking { itinerary, .. } => itinerary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeOrder {
    pub effective_time: Minutes,
    #[serde(flatten)]
    pub kind: OrderKind,
}

/// Serialized form of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub orders: Vec<ChangeOrder>,
}

impl PlanDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("orders serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("schedule does not match the instance: {0}")]
    Shape(String),
    #[error("itinerary {0}: paths carry more passengers than booked")]
    Overbooked(String),
    #[error("unknown {entity} {id:?} in change order")]
    Unknown { entity: &'static str, id: String },
    #[error("change order touches fixed flight {0}")]
    Fixed(String),
}

fn cmp_orders(a: &ChangeOrder, b: &ChangeOrder) -> Ordering {
    (a.effective_time, a.kind.rank(), a.kind.target()).cmp(&(b.effective_time, b.kind.rank(), b.kind.target()))
}

/// Orders turning the disrupted baseline into `(schedule, pax)`, sorted by
/// effective time.
pub fn write_plan(
    state: &DisruptedState,
    schedule: &RecoverySchedule,
    pax: &PassengerAssignment,
) -> Result<Vec<ChangeOrder>, OrderError> {
    let inst = &state.instance;
    let idx = &state.index;
    let base = &state.baseline;
    if schedule.flights.len() != inst.flights.len() || schedule.maintenances.len() != inst.maintenances.len() {
        return Err(OrderError::Shape("disposition counts differ".into()));
    }
    if pax.itineraries.len() != inst.itineraries.len() {
        return Err(OrderError::Shape("itinerary counts differ".into()));
    }
    let now = inst.anchors.current_time;
    let mut orders = Vec::new();

    for (f, (new, old)) in schedule.flights.iter().zip(&base.flights).enumerate() {
        let id = inst.flights[f].id.clone();
        match (*old, *new) {
            (FlightDisposition::Scheduled { departure: d0, .. }, FlightDisposition::Canceled) => {
                orders.push(ChangeOrder {
                    effective_time: d0.max(now),
                    kind: OrderKind::Cancel { flight: id },
                });
            }
            (FlightDisposition::Scheduled { departure: d0, .. }, FlightDisposition::Scheduled { departure: d1, .. })
                if d0 != d1 =>
            {
                orders.push(ChangeOrder {
                    effective_time: d0.max(now),
                    kind: OrderKind::Delay {
                        flight: id,
                        departure: d1,
                        minutes: d1 - d0,
                    },
                });
            }
            (FlightDisposition::Canceled, FlightDisposition::Scheduled { .. }) => {
                return Err(OrderError::Fixed(id));
            }
            _ => {}
        }
    }

    // Swap chains: maximal runs of reassigned flights in the new rotation.
    for (aircraft, is_aircraft) in (0..inst.aircraft.len())
        .map(|a| (a, true))
        .chain((0..inst.crew_groups.len()).map(|c| (c, false)))
    {
        let seq = if is_aircraft {
            state.rotation(aircraft, schedule)
        } else {
            state.crew_sequence(aircraft, schedule)
        };
        let mut run: Vec<usize> = Vec::new();
        let flush = |run: &mut Vec<usize>, orders: &mut Vec<ChangeOrder>| {
            if run.is_empty() {
                return;
            }
            let flights: Vec<String> = run.iter().map(|&f| inst.flights[f].id.clone()).collect();
            let effective_time = schedule.flights[run[0]].departure().unwrap_or(now).max(now);
            let kind = if is_aircraft {
                OrderKind::AircraftSwap {
                    flights,
                    aircraft: inst.aircraft[aircraft].id.clone(),
                }
            } else {
                OrderKind::CrewSwap {
                    flights,
                    crew: inst.crew_groups[aircraft].id.clone(),
                }
            };
            orders.push(ChangeOrder { effective_time, kind });
            run.clear();
        };
        for f in seq {
            let moved = if is_aircraft {
                base.flights[f].aircraft() != Some(aircraft)
            } else {
                base.flights[f].crew() != Some(aircraft)
            };
            if moved {
                run.push(f);
            } else {
                flush(&mut run, &mut orders);
            }
        }
        flush(&mut run, &mut orders);
    }

    for (m, (new, old)) in schedule.maintenances.iter().zip(&base.maintenances).enumerate() {
        if new == old {
            continue;
        }
        let mt = &inst.maintenances[m];
        let (airport, start) = match *new {
            MaintenanceDisposition::Succeeded { airport, start } => (Some(inst.airports[airport].id.clone()), Some(start)),
            MaintenanceDisposition::Failed => (None, None),
        };
        let old_start = match *old {
            MaintenanceDisposition::Succeeded { start, .. } => Some(start),
            MaintenanceDisposition::Failed => None,
        };
        let effective_time = [start, old_start]
            .into_iter()
            .flatten()
            .min()
            .unwrap_or(now)
            .max(now);
        orders.push(ChangeOrder {
            effective_time,
            kind: OrderKind::MaintenancePlacement {
                maintenance: mt.id.clone(),
                airport,
                start,
            },
        });
    }

    let original = PassengerAssignment::original(state);
    for (i, (new, old)) in pax.itineraries.iter().zip(&original.itineraries).enumerate() {
        let it = &inst.itineraries[i];
        let carried: u32 = new.assigned() + new.unassigned;
        if carried > it.passenger_count || new.stranded.iter().map(|g| g.count).sum::<u32>() > new.unassigned {
            return Err(OrderError::Overbooked(it.id.clone()));
        }
        if new == old {
            continue;
        }
        let legs = |g: &PaxGroup| RebookedGroup {
            count: g.count,
            legs: g
                .segments
                .iter()
                .map(|s| ItineraryLeg {
                    flight: inst.flights[s.flight].id.clone(),
                    cabin: s.cabin,
                })
                .collect(),
        };
        let effective_time = it
            .legs
            .iter()
            .map(|l| state.flights[idx.flights[&l.flight]].departure)
            .filter(|&d| d >= now)
            .min()
            .unwrap_or(now);
        orders.push(ChangeOrder {
            effective_time,
            kind: OrderKind::ItineraryRebooking {
                itinerary: it.id.clone(),
                groups: new.groups.iter().map(legs).collect(),
                stranded: new.stranded.iter().map(legs).collect(),
                unassigned: new.unassigned,
            },
        });
    }

    orders.sort_by(cmp_orders);
    Ok(orders)
}

/// Replays orders on the disrupted baseline.
pub fn apply_orders(
    state: &DisruptedState,
    orders: &[ChangeOrder],
) -> Result<(RecoverySchedule, PassengerAssignment), OrderError> {
    let inst = &state.instance;
    let idx = &state.index;
    let mut schedule = RecoverySchedule {
        flights: state.baseline.flights.clone(),
        maintenances: state.baseline.maintenances.clone(),
        ..Default::default()
    };
    let mut pax = PassengerAssignment::original(state);
    let flight = |id: &str| {
        idx.flights.get(id).copied().ok_or_else(|| OrderError::Unknown {
            entity: "flight",
            id: id.into(),
        })
    };
    let scheduled = |s: &mut RecoverySchedule, f: usize| -> Result<(), OrderError> {
        if s.flights[f].is_scheduled() {
            Ok(())
        } else {
            Err(OrderError::Fixed(inst.flights[f].id.clone()))
        }
    };
    for o in orders {
        match &o.kind {
            OrderKind::Delay { flight: id, departure, .. } => {
                let f = flight(id)?;
                scheduled(&mut schedule, f)?;
                if let FlightDisposition::Scheduled { departure: d, .. } = &mut schedule.flights[f] {
                    *d = *departure;
                }
            }
            OrderKind::Cancel { flight: id } => {
                let f = flight(id)?;
                schedule.flights[f] = FlightDisposition::Canceled;
            }
            OrderKind::AircraftSwap { flights, aircraft } => {
                let a = *idx.aircraft.get(aircraft).ok_or_else(|| OrderError::Unknown {
                    entity: "aircraft",
                    id: aircraft.clone(),
                })?;
                for id in flights {
                    let f = flight(id)?;
                    scheduled(&mut schedule, f)?;
                    if let FlightDisposition::Scheduled { aircraft: x, .. } = &mut schedule.flights[f] {
                        *x = a;
                    }
                }
            }
            OrderKind::CrewSwap { flights, crew } => {
                let c = *idx.crews.get(crew).ok_or_else(|| OrderError::Unknown {
                    entity: "crew group",
                    id: crew.clone(),
                })?;
                for id in flights {
                    let f = flight(id)?;
                    scheduled(&mut schedule, f)?;
                    if let FlightDisposition::Scheduled { crew: x, .. } = &mut schedule.flights[f] {
                        *x = c;
                    }
                }
            }
            OrderKind::MaintenancePlacement {
                maintenance,
                airport,
                start,
            } => {
                let m = *idx.maintenances.get(maintenance).ok_or_else(|| OrderError::Unknown {
                    entity: "maintenance",
                    id: maintenance.clone(),
                })?;
                schedule.maintenances[m] = match (airport, start) {
                    (Some(p), Some(s)) => MaintenanceDisposition::Succeeded {
                        airport: *idx.airports.get(p).ok_or_else(|| OrderError::Unknown {
                            entity: "airport",
                            id: p.clone(),
                        })?,
                        start: *s,
                    },
                    _ => MaintenanceDisposition::Failed,
                };
            }
            OrderKind::ItineraryRebooking {
                itinerary,
                groups,
                stranded,
                unassigned,
            } => {
                let i = *idx.itineraries.get(itinerary).ok_or_else(|| OrderError::Unknown {
                    entity: "itinerary",
                    id: itinerary.clone(),
                })?;
                let convert = |g: &RebookedGroup| -> Result<PaxGroup, OrderError> {
                    Ok(PaxGroup {
                        count: g.count,
                        segments: g
                            .legs
                            .iter()
                            .map(|l| {
                                Ok(Segment {
                                    flight: flight(&l.flight)?,
                                    cabin: l.cabin,
                                })
                            })
                            .collect::<Result<_, OrderError>>()?,
                    })
                };
                pax.itineraries[i] = ItineraryAssignment {
                    groups: groups.iter().map(convert).collect::<Result<_, _>>()?,
                    stranded: stranded.iter().map(convert).collect::<Result<_, _>>()?,
                    unassigned: *unassigned,
                };
            }
        }
    }
    Ok((schedule, pax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::example_instance;
    use crate::model::apply_disruptions;

    fn setup() -> (DisruptedState, RecoverySchedule, PassengerAssignment) {
        let state = apply_disruptions(&example_instance()).unwrap();
        let sched = state.baseline.clone();
        let pax = PassengerAssignment::original(&state);
        (state, sched, pax)
    }

    #[test]
    fn baseline_gives_no_orders() {
        let (state, sched, pax) = setup();
        assert!(write_plan(&state, &sched, &pax).unwrap().is_empty());
    }

    #[test]
    fn single_delay() {
        let (state, mut sched, pax) = setup();
        let f = state.index.flights["F07"];
        if let FlightDisposition::Scheduled { departure, .. } = &mut sched.flights[f] {
            *departure += 20;
        }
        let orders = write_plan(&state, &sched, &pax).unwrap();
        assert_eq!(orders.len(), 1);
        assert_eq!(
            orders[0].kind,
            OrderKind::Delay {
                flight: "F07".into(),
                departure: 660,
                minutes: 20
            }
        );
        let (s2, p2) = apply_orders(&state, &orders).unwrap();
        assert!(s2.same_plan(&sched));
        assert_eq!(p2, pax);
    }

    #[test]
    fn swapped_tail_gives_one_order_per_chain() {
        let (state, mut sched, pax) = setup();
        // F13 and F14 move to A#2 after its last return, flown by the spare crew.
        let a2 = state.index.aircraft["A#2"];
        let c5 = state.index.crews["C#5"];
        for id in ["F13", "F14"] {
            if let FlightDisposition::Scheduled { aircraft, crew, .. } = &mut sched.flights[state.index.flights[id]] {
                *aircraft = a2;
                *crew = c5;
            }
        }
        let orders = write_plan(&state, &sched, &pax).unwrap();
        let swaps: Vec<_> = orders
            .iter()
            .filter(|o| matches!(o.kind, OrderKind::AircraftSwap { .. } | OrderKind::CrewSwap { .. }))
            .collect();
        assert_eq!(swaps.len(), 2, "{swaps:#?}");
        assert!(swaps.iter().all(|o| o.effective_time == 1060));
        assert!(orders.windows(2).all(|w| cmp_orders(&w[0], &w[1]) != Ordering::Greater));
        let (s2, _) = apply_orders(&state, &orders).unwrap();
        assert!(s2.same_plan(&sched));
    }

    #[test]
    fn json_round_trip_and_replay() {
        let (state, mut sched, mut pax) = setup();
        let f = state.index.flights["F06"];
        sched.flights[f] = FlightDisposition::Canceled;
        sched.maintenances[0] = MaintenanceDisposition::Failed;
        pax.itineraries[4] = ItineraryAssignment {
            groups: vec![],
            stranded: vec![],
            unassigned: 8,
        };
        let doc = PlanDocument {
            orders: write_plan(&state, &sched, &pax).unwrap(),
        };
        let back = PlanDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let (s2, p2) = apply_orders(&state, &back.orders).unwrap();
        assert!(s2.same_plan(&sched));
        assert_eq!(p2, pax);
    }

    #[test]
    fn overbooked_paths_are_rejected() {
        let (state, sched, mut pax) = setup();
        pax.itineraries[0].unassigned = 1;
        assert!(matches!(write_plan(&state, &sched, &pax), Err(OrderError::Overbooked(_))));
    }
}
