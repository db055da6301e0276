use std::collections::HashMap;

use super::instance::ProblemInstance;

/// A multi-leg flight: flight indices ordered by leg.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilegGroup {
    pub id: String,
    pub legs: Vec<usize>,
}

/// Position of a flight inside its multi-leg group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegPosition {
    pub group: usize,
    pub position: usize,
    pub len: usize,
}

impl LegPosition {
    pub fn is_first(&self) -> bool {
        self.position == 0
    }

    pub fn is_last(&self) -> bool {
        self.position + 1 == self.len
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum IndexError {
    #[error("duplicate {entity} id {id:?}")]
    DuplicateId { entity: &'static str, id: String },
    #[error("{entity} {id:?} references unknown {field} {target:?}")]
    DanglingReference {
        entity: &'static str,
        id: String,
        field: &'static str,
        target: String,
    },
}

/// Id-to-position lookups and derived relations for a [`ProblemInstance`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceIndex {
    pub airports: HashMap<String, usize>,
    pub aircraft: HashMap<String, usize>,
    pub crews: HashMap<String, usize>,
    pub flights: HashMap<String, usize>,
    pub maintenances: HashMap<String, usize>,
    pub slots: HashMap<String, usize>,
    pub itineraries: HashMap<String, usize>,

    pub flight_origin: Vec<usize>,
    pub flight_destination: Vec<usize>,
    pub flight_aircraft: Vec<usize>,
    pub flight_crew: Vec<usize>,
    pub multileg_groups: Vec<MultilegGroup>,
    pub flight_leg: Vec<Option<LegPosition>>,
    pub slot_airport: Vec<usize>,
    pub slots_by_airport: Vec<Vec<usize>>,
    pub maintenance_aircraft: Vec<usize>,
    pub maintenances_by_aircraft: Vec<Vec<usize>>,
}

fn unique_ids<'a>(
    entity: &'static str,
    ids: impl Iterator<Item = &'a String>,
) -> Result<HashMap<String, usize>, IndexError> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(IndexError::DuplicateId {
                entity,
                id: id.clone(),
            });
        }
    }
    Ok(map)
}

fn resolve(
    map: &HashMap<String, usize>,
    entity: &'static str,
    id: &str,
    field: &'static str,
    target: &str,
) -> Result<usize, IndexError> {
    map.get(target)
        .copied()
        .ok_or_else(|| IndexError::DanglingReference {
            entity,
            id: id.to_string(),
            field,
            target: target.to_string(),
        })
}

impl InstanceIndex {
    pub fn build(inst: &ProblemInstance) -> Result<Self, IndexError> {
        let airports = unique_ids("airport", inst.airports.iter().map(|a| &a.id))?;
        let aircraft = unique_ids("aircraft", inst.aircraft.iter().map(|a| &a.id))?;
        let crews = unique_ids("crew_group", inst.crew_groups.iter().map(|c| &c.id))?;
        let flights = unique_ids("flight", inst.flights.iter().map(|f| &f.id))?;
        let maintenances = unique_ids("maintenance", inst.maintenances.iter().map(|m| &m.id))?;
        let slots = unique_ids("slot", inst.slots.iter().map(|s| &s.id))?;
        let itineraries = unique_ids("itinerary", inst.itineraries.iter().map(|i| &i.id))?;

        for a in &inst.aircraft {
            resolve(&airports, "aircraft", &a.id, "initial_position", &a.initial_position)?;
        }
        for c in &inst.crew_groups {
            resolve(&airports, "crew_group", &c.id, "initial_position", &c.initial_position)?;
        }

        let n = inst.flights.len();
        let mut flight_origin = Vec::with_capacity(n);
        let mut flight_destination = Vec::with_capacity(n);
        let mut flight_aircraft = Vec::with_capacity(n);
        let mut flight_crew = Vec::with_capacity(n);
        let mut groups: Vec<(String, Vec<(u32, usize)>)> = Vec::new();
        let mut group_pos: HashMap<String, usize> = HashMap::new();
        for (i, f) in inst.flights.iter().enumerate() {
            flight_origin.push(resolve(&airports, "flight", &f.id, "origin", &f.origin)?);
            flight_destination.push(resolve(
                &airports,
                "flight",
                &f.id,
                "destination",
                &f.destination,
            )?);
            flight_aircraft.push(resolve(
                &aircraft,
                "flight",
                &f.id,
                "original_aircraft",
                &f.original_aircraft,
            )?);
            flight_crew.push(resolve(&crews, "flight", &f.id, "original_crew", &f.original_crew)?);
            if let Some(g) = &f.multileg_group {
                let gi = *group_pos.entry(g.clone()).or_insert_with(|| {
                    groups.push((g.clone(), Vec::new()));
                    groups.len() - 1
                });
                groups[gi].1.push((f.leg_index, i));
            }
        }

        let mut flight_leg = vec![None; n];
        let mut multileg_groups = Vec::with_capacity(groups.len());
        for (gi, (id, mut legs)) in groups.into_iter().enumerate() {
            legs.sort();
            let len = legs.len();
            for (position, &(_, f)) in legs.iter().enumerate() {
                flight_leg[f] = Some(LegPosition {
                    group: gi,
                    position,
                    len,
                });
            }
            multileg_groups.push(MultilegGroup {
                id,
                legs: legs.into_iter().map(|(_, f)| f).collect(),
            });
        }

        let mut slot_airport = Vec::with_capacity(inst.slots.len());
        let mut slots_by_airport = vec![Vec::new(); inst.airports.len()];
        for (i, s) in inst.slots.iter().enumerate() {
            let a = resolve(&airports, "slot", &s.id, "airport", &s.airport)?;
            slot_airport.push(a);
            slots_by_airport[a].push(i);
        }
        for list in &mut slots_by_airport {
            list.sort_by_key(|&s| inst.slots[s].window.start);
        }

        let mut maintenance_aircraft = Vec::with_capacity(inst.maintenances.len());
        let mut maintenances_by_aircraft = vec![Vec::new(); inst.aircraft.len()];
        for (i, m) in inst.maintenances.iter().enumerate() {
            let a = resolve(&aircraft, "maintenance", &m.id, "aircraft", &m.aircraft)?;
            for w in &m.allowed_windows {
                resolve(&airports, "maintenance", &m.id, "allowed_windows.airport", &w.airport)?;
            }
            maintenance_aircraft.push(a);
            maintenances_by_aircraft[a].push(i);
        }

        for it in &inst.itineraries {
            for leg in &it.legs {
                resolve(&flights, "itinerary", &it.id, "legs.flight", &leg.flight)?;
            }
        }

        for d in &inst.disruptions {
            use super::instance::Disruption as D;
            let (map, field) = match d {
                D::FlightDelay { .. } | D::FlightCancellation { .. } => (&flights, "target flight"),
                D::AircraftUnavailability { .. } => (&aircraft, "target aircraft"),
                D::SlotChange { .. } => (&slots, "target slot"),
                D::AirportClosure { .. } => (&airports, "target airport"),
            };
            resolve(map, "disruption", d.kind_name(), field, d.target())?;
        }

        Ok(Self {
            airports,
            aircraft,
            crews,
            flights,
            maintenances,
            slots,
            itineraries,
            flight_origin,
            flight_destination,
            flight_aircraft,
            flight_crew,
            multileg_groups,
            flight_leg,
            slot_airport,
            slots_by_airport,
            maintenance_aircraft,
            maintenances_by_aircraft,
        })
    }

    pub fn is_slotted(&self, airport: usize) -> bool {
        !self.slots_by_airport[airport].is_empty()
    }

    /// The slot whose window contains `t` at `airport`, if any.
    pub fn slot_at(&self, inst: &ProblemInstance, airport: usize, t: i64) -> Option<usize> {
        self.slots_by_airport[airport]
            .iter()
            .copied()
            .find(|&s| inst.slots[s].window.contains(t))
    }

    /// True when flights `a` then `b` are consecutive legs of one multi-leg group.
    pub fn consecutive_legs(&self, a: usize, b: usize) -> bool {
        match (self.flight_leg[a], self.flight_leg[b]) {
            (Some(la), Some(lb)) => la.group == lb.group && la.position + 1 == lb.position,
            _ => false,
        }
    }
}
