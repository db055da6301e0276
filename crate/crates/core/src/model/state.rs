use super::index::{IndexError, InstanceIndex};
use super::instance::{Disruption, Minutes, ProblemInstance, Window};
use super::schedule::{FlightDisposition, MaintenanceDisposition, RecoverySchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlightStatus {
    /// Departed before the current time; fixed.
    Past,
    /// May be retimed, reassigned or canceled.
    Open,
    /// Departs after the recovery finish; keeps its plan or is canceled.
    FixedAfterFinish,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightState {
    /// Departure in the disrupted baseline.
    pub departure: Minutes,
    /// Delay imposed by disruptions.
    pub imposed_delay: Minutes,
    /// Canceled by a disruption.
    pub removed: bool,
    /// Directly touched by a disruption.
    pub disrupted: bool,
    pub status: FlightStatus,
}

impl FlightState {
    pub fn is_past(&self) -> bool {
        self.status == FlightStatus::Past
    }

    pub fn immutable(&self) -> bool {
        self.status != FlightStatus::Open
    }

    /// Part of the decision model: not flown yet and not removed.
    pub fn is_decision(&self) -> bool {
        !self.is_past() && !self.removed
    }
}

/// Where a resource enters the recovery horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceStart {
    pub airport: usize,
    pub time: Minutes,
    /// Crew only: the aircraft the crew is still aboard after its last past flight.
    pub on_aircraft: Option<usize>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum StateError {
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// The baseline schedule with every disruption folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct DisruptedState {
    pub instance: ProblemInstance,
    pub index: InstanceIndex,
    pub flights: Vec<FlightState>,
    /// Slot capacities after slot changes and closures.
    pub slot_capacity: Vec<u32>,
    /// Per aircraft.
    pub unavailability: Vec<Vec<Window>>,
    /// Per airport.
    pub closures: Vec<Vec<Window>>,
    pub aircraft_start: Vec<ResourceStart>,
    pub crew_start: Vec<ResourceStart>,
    /// Minutes already flown by each crew before the current time.
    pub crew_flown: Vec<Minutes>,
    /// Slot usage by past departures.
    pub slot_past_usage: Vec<u32>,
    pub baseline: RecoverySchedule,
}

/// Folds the instance's disruptions into its baseline schedule.
pub fn apply_disruptions(instance: &ProblemInstance) -> Result<DisruptedState, StateError> {
    DisruptedState::build(instance.clone(), true)
}

impl DisruptedState {
    /// The baseline with disruptions ignored.
    pub fn undisrupted(instance: &ProblemInstance) -> Result<Self, StateError> {
        Self::build(instance.clone(), false)
    }

    fn build(instance: ProblemInstance, with_disruptions: bool) -> Result<Self, StateError> {
        let index = InstanceIndex::build(&instance)?;
        let anchors = instance.anchors;
        let mut flights: Vec<FlightState> = instance
            .flights
            .iter()
            .map(|f| FlightState {
                departure: f.sched_departure,
                imposed_delay: 0,
                removed: false,
                disrupted: false,
                status: FlightStatus::Open,
            })
            .collect();
        let mut slot_capacity: Vec<u32> = instance.slots.iter().map(|s| s.capacity).collect();
        let mut unavailability = vec![Vec::new(); instance.aircraft.len()];
        let mut closures = vec![Vec::new(); instance.airports.len()];

        if with_disruptions {
            for d in &instance.disruptions {
                match d {
                    Disruption::FlightDelay { target, minutes } => {
                        let f = index.flights[target];
                        flights[f].imposed_delay += *minutes;
                        flights[f].departure += *minutes;
                        flights[f].disrupted = true;
                    }
                    Disruption::FlightCancellation { target } => {
                        let f = index.flights[target];
                        let legs = match index.flight_leg[f] {
                            Some(l) => index.multileg_groups[l.group].legs.clone(),
                            None => vec![f],
                        };
                        for g in legs {
                            flights[g].removed = true;
                            flights[g].disrupted = true;
                        }
                    }
                    Disruption::AircraftUnavailability { target, window } => {
                        unavailability[index.aircraft[target]].push(*window);
                    }
                    Disruption::SlotChange { target, capacity } => {
                        slot_capacity[index.slots[target]] = *capacity;
                    }
                    Disruption::AirportClosure { target, window } => {
                        closures[index.airports[target]].push(*window);
                    }
                }
            }
            for (a, windows) in unavailability.iter().enumerate() {
                for (f, fl) in instance.flights.iter().enumerate() {
                    if index.flight_aircraft[f] != a {
                        continue;
                    }
                    let dep = flights[f].departure;
                    if windows.iter().any(|w| w.overlaps(dep, dep + fl.duration)) {
                        flights[f].disrupted = true;
                    }
                }
            }
            for (f, fl) in instance.flights.iter().enumerate() {
                let dep = flights[f].departure;
                let o = index.flight_origin[f];
                let d = index.flight_destination[f];
                let arr = dep + fl.duration;
                if closures[o].iter().any(|w| w.contains(dep))
                    || closures[d].iter().any(|w| w.contains(arr))
                {
                    flights[f].disrupted = true;
                }
            }
            for (s, slot) in instance.slots.iter().enumerate() {
                let a = index.slot_airport[s];
                if closures[a]
                    .iter()
                    .any(|w| w.overlaps(slot.window.start, slot.window.end))
                {
                    slot_capacity[s] = 0;
                }
            }
        }

        for fs in &mut flights {
            fs.status = if fs.departure < anchors.current_time {
                FlightStatus::Past
            } else if fs.departure > anchors.recovery_finish {
                FlightStatus::FixedAfterFinish
            } else {
                FlightStatus::Open
            };
        }
        // A multi-leg flight straddling the recovery finish is frozen whole.
        for g in &index.multileg_groups {
            if g.legs
                .iter()
                .any(|&f| flights[f].status == FlightStatus::FixedAfterFinish)
            {
                for &f in &g.legs {
                    if flights[f].status == FlightStatus::Open {
                        flights[f].status = FlightStatus::FixedAfterFinish;
                    }
                }
            }
        }

        let mut state = DisruptedState {
            index,
            flights,
            slot_capacity,
            unavailability,
            closures,
            aircraft_start: Vec::new(),
            crew_start: Vec::new(),
            crew_flown: Vec::new(),
            slot_past_usage: Vec::new(),
            baseline: RecoverySchedule::default(),
            instance,
        };
        state.derive_starts();
        state.baseline = state.baseline_schedule();
        Ok(state)
    }

    fn derive_starts(&mut self) {
        let inst = &self.instance;
        let idx = &self.index;
        let mut last_aircraft: Vec<Option<usize>> = vec![None; inst.aircraft.len()];
        let mut last_crew: Vec<Option<usize>> = vec![None; inst.crew_groups.len()];
        let mut crew_flown = vec![0; inst.crew_groups.len()];
        let mut slot_past_usage = vec![0u32; inst.slots.len()];
        for (f, fl) in inst.flights.iter().enumerate() {
            let fs = &self.flights[f];
            if !fs.is_past() || fs.removed {
                continue;
            }
            let a = idx.flight_aircraft[f];
            let c = idx.flight_crew[f];
            if last_aircraft[a].is_none_or(|p| self.flights[p].departure < fs.departure) {
                last_aircraft[a] = Some(f);
            }
            if last_crew[c].is_none_or(|p| self.flights[p].departure < fs.departure) {
                last_crew[c] = Some(f);
            }
            crew_flown[c] += fl.duration;
            if let Some(s) = idx.slot_at(inst, idx.flight_origin[f], fs.departure) {
                slot_past_usage[s] += 1;
            }
        }
        self.aircraft_start = inst
            .aircraft
            .iter()
            .enumerate()
            .map(|(a, ac)| match last_aircraft[a] {
                Some(f) => {
                    let d = idx.flight_destination[f];
                    let arr = self.flights[f].departure + inst.flights[f].duration;
                    ResourceStart {
                        airport: d,
                        time: arr + self.ground_time_after(f),
                        on_aircraft: None,
                    }
                }
                None => ResourceStart {
                    airport: idx.airports[&ac.initial_position],
                    time: ac.available_from,
                    on_aircraft: None,
                },
            })
            .collect();
        self.crew_start = inst
            .crew_groups
            .iter()
            .enumerate()
            .map(|(c, cg)| match last_crew[c] {
                Some(f) => ResourceStart {
                    airport: idx.flight_destination[f],
                    time: self.flights[f].departure + inst.flights[f].duration,
                    on_aircraft: Some(idx.flight_aircraft[f]),
                },
                None => ResourceStart {
                    airport: idx.airports[&cg.initial_position],
                    time: cg.available_from,
                    on_aircraft: None,
                },
            })
            .collect();
        self.crew_flown = crew_flown;
        self.slot_past_usage = slot_past_usage;
    }

    /// Minimum aircraft ground time after flight `f`: the transit time inside
    /// a multi-leg flight, the turnaround otherwise.
    pub fn ground_time_after(&self, f: usize) -> Minutes {
        let d = self.index.flight_destination[f];
        let ap = &self.instance.airports[d];
        match self.index.flight_leg[f] {
            Some(l) if !l.is_last() => ap.min_transit,
            _ => ap.min_turnaround,
        }
    }

    pub fn crew_connection(&self, airport: usize) -> Minutes {
        self.instance.airports[airport].min_crew_connection
    }

    /// Latest admissible departure of flight `f`.
    pub fn latest_departure(&self, f: usize) -> Minutes {
        let fs = &self.flights[f];
        if fs.immutable() {
            return fs.departure;
        }
        let a = &self.instance.anchors;
        let orig = self.instance.flights[f].sched_departure;
        let cap = orig + a.max_delay.max(fs.imposed_delay);
        cap.min(a.recovery_finish).max(fs.departure)
    }

    /// Whether flight `f` may depart at `t` with respect to the time anchors.
    pub fn time_allowed(&self, f: usize, t: Minutes) -> bool {
        let fs = &self.flights[f];
        if fs.immutable() {
            return t == fs.departure;
        }
        if t < fs.departure || t > self.latest_departure(f) {
            return false;
        }
        t == fs.departure || t >= self.instance.anchors.recovery_start
    }

    /// Closures at the origin on departure or at the destination on arrival.
    pub fn closed_at(&self, f: usize, t: Minutes) -> bool {
        let o = self.index.flight_origin[f];
        let d = self.index.flight_destination[f];
        let arr = t + self.instance.flights[f].duration;
        self.closures[o].iter().any(|w| w.contains(t))
            || self.closures[d].iter().any(|w| w.contains(arr))
    }

    pub fn aircraft_unavailable(&self, aircraft: usize, from: Minutes, to: Minutes) -> bool {
        self.unavailability[aircraft]
            .iter()
            .any(|w| w.overlaps(from, to))
    }

    /// True if flight `f` at `t` departs inside a slot, or from an unslotted airport.
    pub fn slot_covered(&self, f: usize, t: Minutes) -> bool {
        let o = self.index.flight_origin[f];
        !self.index.is_slotted(o) || self.index.slot_at(&self.instance, o, t).is_some()
    }

    /// All local checks for flying `f` at `t` on `aircraft` (not connections).
    pub fn option_legal(&self, f: usize, t: Minutes, aircraft: usize) -> bool {
        let dur = self.instance.flights[f].duration;
        self.time_allowed(f, t)
            && !self.closed_at(f, t)
            && !self.aircraft_unavailable(aircraft, t, t + dur)
            && self.slot_covered(f, t)
    }

    /// Earliest departure at or after `from` at which flight `f` is legal on
    /// `aircraft`, or `None` if no time up to the latest departure works.
    pub fn next_legal_time(&self, f: usize, from: Minutes, aircraft: usize) -> Option<Minutes> {
        let fs = &self.flights[f];
        let latest = self.latest_departure(f);
        let dur = self.instance.flights[f].duration;
        let o = self.index.flight_origin[f];
        let d = self.index.flight_destination[f];
        let rs = self.instance.anchors.recovery_start;
        let mut t = from.max(fs.departure);
        for _ in 0..10_000 {
            if t != fs.departure && t < rs {
                t = rs;
            }
            if t > latest {
                return None;
            }
            if self.option_legal(f, t, aircraft) {
                return Some(t);
            }
            if fs.immutable() {
                return None;
            }
            let mut next = t + 1;
            for w in &self.closures[o] {
                if w.contains(t) {
                    next = next.max(w.end);
                }
            }
            for w in &self.closures[d] {
                if w.contains(t + dur) {
                    next = next.max(w.end - dur);
                }
            }
            for w in &self.unavailability[aircraft] {
                if w.overlaps(t, t + dur) {
                    next = next.max(w.end);
                }
            }
            if !self.slot_covered(f, t) {
                if let Some(s) = self.index.slots_by_airport[o]
                    .iter()
                    .map(|&s| self.instance.slots[s].window.start)
                    .find(|&start| start > t)
                {
                    next = next.max(s);
                } else {
                    return None;
                }
            }
            t = next;
        }
        None
    }

    /// Capacity left for open departures once past usage is deducted.
    pub fn effective_slot_capacity(&self, s: usize) -> u32 {
        self.slot_capacity[s].saturating_sub(self.slot_past_usage[s])
    }

    /// Non-past scheduled flights departing inside slot `s`.
    pub fn slot_members<'a>(
        &'a self,
        s: usize,
        schedule: &'a RecoverySchedule,
    ) -> impl Iterator<Item = usize> + 'a {
        let airport = self.index.slot_airport[s];
        let window = self.instance.slots[s].window;
        schedule
            .flights
            .iter()
            .enumerate()
            .filter(move |(f, d)| {
                !self.flights[*f].is_past()
                    && self.index.flight_origin[*f] == airport
                    && d.departure().is_some_and(|t| window.contains(t))
            })
            .map(|(f, _)| f)
    }

    fn baseline_schedule(&self) -> RecoverySchedule {
        let flights: Vec<FlightDisposition> = self
            .flights
            .iter()
            .enumerate()
            .map(|(f, fs)| {
                if fs.removed {
                    FlightDisposition::Canceled
                } else {
                    FlightDisposition::Scheduled {
                        departure: fs.departure,
                        aircraft: self.index.flight_aircraft[f],
                        crew: self.index.flight_crew[f],
                    }
                }
            })
            .collect();
        let mut schedule = RecoverySchedule {
            flights,
            ..Default::default()
        };
        schedule.maintenances = (0..self.instance.maintenances.len())
            .map(|m| {
                self.first_maintenance_fit(m, &schedule)
                    .unwrap_or(MaintenanceDisposition::Failed)
            })
            .collect();
        schedule
    }

    /// Ground intervals of an aircraft under `schedule`, excluding multi-leg
    /// transits: `(airport, ready_from, next_departure)`.
    pub fn ground_gaps(
        &self,
        aircraft: usize,
        schedule: &RecoverySchedule,
    ) -> Vec<(usize, Minutes, Minutes)> {
        let flights = self.rotation(aircraft, schedule);
        let mut gaps = Vec::new();
        let start = self.aircraft_start[aircraft];
        let mut pos = (start.airport, start.time, false);
        for &f in flights.iter().filter(|&&f| !self.flights[f].is_past()) {
            let dep = schedule.flights[f].departure().unwrap_or_default();
            if !pos.2 && pos.0 == self.index.flight_origin[f] {
                gaps.push((pos.0, pos.1, dep));
            }
            let transit = matches!(self.index.flight_leg[f], Some(l) if !l.is_last());
            pos = (
                self.index.flight_destination[f],
                dep + self.instance.flights[f].duration + self.ground_time_after(f),
                transit,
            );
        }
        if !pos.2 {
            gaps.push((pos.0, pos.1, Minutes::MAX));
        }
        gaps
    }

    /// Earliest placement of maintenance `m` that fits the aircraft's ground
    /// time in `schedule`.
    pub fn first_maintenance_fit(
        &self,
        m: usize,
        schedule: &RecoverySchedule,
    ) -> Option<MaintenanceDisposition> {
        let mt = &self.instance.maintenances[m];
        let aircraft = self.index.maintenance_aircraft[m];
        let gaps = self.ground_gaps(aircraft, schedule);
        let mut best: Option<(Minutes, usize)> = None;
        for w in &mt.allowed_windows {
            let p = self.index.airports[&w.airport];
            for &(airport, ready, next) in &gaps {
                if airport != p {
                    continue;
                }
                let s = ready.max(w.earliest_start);
                if s <= w.latest_start
                    && s.saturating_add(mt.duration) <= next
                    && best.is_none_or(|(bs, _)| s < bs)
                {
                    best = Some((s, p));
                }
            }
        }
        best.map(|(start, airport)| MaintenanceDisposition::Succeeded { airport, start })
    }

    /// Scheduled flights of an aircraft, ordered by departure then leg.
    pub fn rotation(&self, aircraft: usize, schedule: &RecoverySchedule) -> Vec<usize> {
        let mut fl: Vec<(Minutes, usize)> = schedule
            .flights
            .iter()
            .enumerate()
            .filter_map(|(f, d)| match *d {
                FlightDisposition::Scheduled {
                    departure,
                    aircraft: a,
                    ..
                } if a == aircraft => Some((departure, f)),
                _ => None,
            })
            .collect();
        fl.sort();
        fl.into_iter().map(|(_, f)| f).collect()
    }

    /// Scheduled flights of a crew group, ordered by departure.
    pub fn crew_sequence(&self, crew: usize, schedule: &RecoverySchedule) -> Vec<usize> {
        let mut fl: Vec<(Minutes, usize)> = schedule
            .flights
            .iter()
            .enumerate()
            .filter_map(|(f, d)| match *d {
                FlightDisposition::Scheduled {
                    departure, crew: c, ..
                } if c == crew => Some((departure, f)),
                _ => None,
            })
            .collect();
        fl.sort();
        fl.into_iter().map(|(_, f)| f).collect()
    }

    /// Ground intervals of a crew under `schedule`, excluding multi-leg
    /// transits: `(airport, ready_to_board_another_aircraft, next_departure)`.
    pub fn crew_gaps(&self, crew: usize, schedule: &RecoverySchedule) -> Vec<(usize, Minutes, Minutes)> {
        let start = self.crew_start[crew];
        let mut gaps = Vec::new();
        let mut pos = (
            start.airport,
            start.time + self.crew_connection(start.airport),
            false,
        );
        for f in self
            .crew_sequence(crew, schedule)
            .into_iter()
            .filter(|&f| !self.flights[f].is_past())
        {
            let dep = schedule.flights[f].departure().unwrap_or_default();
            if !pos.2 && pos.0 == self.index.flight_origin[f] {
                gaps.push((pos.0, pos.1, dep));
            }
            let d = self.index.flight_destination[f];
            let transit = matches!(self.index.flight_leg[f], Some(l) if !l.is_last());
            pos = (
                d,
                dep + self.instance.flights[f].duration + self.crew_connection(d),
                transit,
            );
        }
        if !pos.2 {
            gaps.push((pos.0, pos.1, Minutes::MAX));
        }
        gaps
    }

    /// Number of flights in the decision model.
    pub fn decision_flights(&self) -> usize {
        self.flights.iter().filter(|f| f.is_decision()).count()
    }
}
