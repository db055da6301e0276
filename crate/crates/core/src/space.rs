//! Choice groups the MILP selects from, built around irregularities and grown
//! from solver feedback.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::model::{
    DisruptedState, FlightDisposition, FlightStatus, MaintenanceDisposition, Minutes,
    RecoverySchedule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entity {
    Flight(usize),
    Maintenance(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Scheduled {
        departure: Minutes,
        aircraft: usize,
        crew: usize,
    },
    Canceled,
    SucceedingMaintenance {
        airport: usize,
        start: Minutes,
    },
    FailingMaintenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptionChoice {
    pub kind: OptionKind,
    /// Iteration that introduced the option.
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceGroup {
    pub entity: Entity,
    pub options: Vec<OptionChoice>,
}

impl ChoiceGroup {
    pub fn position(&self, kind: &OptionKind) -> Option<usize> {
        self.options.iter().position(|o| o.kind == *kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OptionRef {
    pub group: usize,
    pub option: usize,
}

/// Departures competing for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotChoice {
    pub slot: usize,
    pub members: Vec<OptionRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub groups: Vec<ChoiceGroup>,
    pub flight_group: Vec<Option<usize>>,
    pub maintenance_group: Vec<usize>,
    pub slot_choices: Vec<SlotChoice>,
    pub iteration: usize,
}

/// Linear cost of a choice: `coefficient` times its decision expression, or
/// times the nonuse variable for a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostExpr {
    pub coefficient: f64,
    pub on_nonuse: bool,
}

pub enum Choice<'a> {
    Option(Entity, &'a OptionKind),
    Slot(&'a SlotChoice),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    /// Delay grid step in minutes.
    pub granularity: Minutes,
    /// Time radius for swap partners.
    pub radius: Minutes,
    /// Delays at or above this trigger feedback.
    pub delay_threshold: Minutes,
    /// Change options added per iteration; derived from instance size if unset.
    pub budget: Option<usize>,
    /// Flights carried along in a rotation-tail swap.
    pub swap_tail: usize,
    pub max_partners: usize,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self {
            granularity: 15,
            radius: 120,
            delay_threshold: 60,
            budget: None,
            swap_tail: 4,
            max_partners: 2,
        }
    }
}

impl SpaceConfig {
    pub fn budget_for(&self, state: &DisruptedState) -> usize {
        self.budget.unwrap_or_else(|| {
            let open = state
                .flights
                .iter()
                .filter(|f| !f.removed && f.status == FlightStatus::Open)
                .count();
            (4 * open).max(40)
        })
    }
}

/// Entities the last solution flagged for attention.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolutionFeedback {
    pub large_delays: Vec<usize>,
    pub cancellations: Vec<usize>,
    pub maintenance_failures: Vec<usize>,
}

impl SolutionFeedback {
    pub fn is_empty(&self) -> bool {
        self.large_delays.is_empty()
            && self.cancellations.is_empty()
            && self.maintenance_failures.is_empty()
    }

    /// Feedback from a schedule: delays at or above `threshold` against the
    /// original timetable, cancellations the solver chose, failed maintenance.
    pub fn from_schedule(state: &DisruptedState, schedule: &RecoverySchedule, threshold: Minutes) -> Self {
        let mut fb = SolutionFeedback::default();
        for (f, d) in schedule.flights.iter().enumerate() {
            let fs = &state.flights[f];
            if !fs.is_decision() {
                continue;
            }
            match d.departure() {
                Some(t) if t - state.instance.flights[f].sched_departure >= threshold => {
                    fb.large_delays.push(f)
                }
                Some(_) => {}
                None => fb.cancellations.push(f),
            }
        }
        for (m, d) in schedule.maintenances.iter().enumerate() {
            if *d == MaintenanceDisposition::Failed {
                fb.maintenance_failures.push(m);
            }
        }
        fb
    }
}

/// Where propagated delays land: the earliest legal departure of each flight
/// on its reference resources, and which flights are irregular.
#[derive(Debug, Clone, PartialEq)]
pub struct Proximity {
    pub earliest: Vec<Option<Minutes>>,
    pub irregular: Vec<bool>,
    pub direct: Vec<bool>,
}

/// Propagates disruptions along aircraft rotations and crew sequences of the
/// reference schedule.
pub fn proximity(state: &DisruptedState, reference: &RecoverySchedule) -> Proximity {
    let inst = &state.instance;
    let n = inst.flights.len();
    let mut earliest: Vec<Option<Minutes>> = vec![None; n];
    for f in 0..n {
        if let Some(t) = reference.flights[f].departure() {
            if state.flights[f].is_decision() {
                let a = reference.flights[f].aircraft().unwrap();
                earliest[f] = state.next_legal_time(f, t, a);
            } else {
                earliest[f] = Some(t);
            }
        }
    }
    let rotations: Vec<Vec<usize>> = (0..inst.aircraft.len())
        .map(|a| state.rotation(a, reference))
        .collect();
    let sequences: Vec<Vec<usize>> = (0..inst.crew_groups.len())
        .map(|c| state.crew_sequence(c, reference))
        .collect();
    for _ in 0..n.max(1) {
        let mut changed = false;
        for (a, rot) in rotations.iter().enumerate() {
            let start = state.aircraft_start[a];
            let mut ready = Some(start.time);
            for &f in rot {
                if state.flights[f].is_past() {
                    continue;
                }
                let need = match (ready, earliest[f]) {
                    (Some(r), Some(e)) if r > e => state.next_legal_time(f, r, a),
                    (None, _) => None,
                    (_, e) => e,
                };
                if need != earliest[f] && state.flights[f].is_decision() {
                    earliest[f] = need;
                    changed = true;
                }
                ready = earliest[f].map(|t| t + inst.flights[f].duration + state.ground_time_after(f));
            }
        }
        for (c, seq) in sequences.iter().enumerate() {
            let start = state.crew_start[c];
            let mut prev: Option<(usize, Option<Minutes>)> = None;
            for &f in seq {
                if state.flights[f].is_past() {
                    continue;
                }
                let a = reference.flights[f].aircraft().unwrap();
                let o = state.index.flight_origin[f];
                let ready = match prev {
                    None => match start.on_aircraft {
                        Some(b) if b == a => Some(start.time),
                        _ => Some(start.time + state.crew_connection(o)),
                    },
                    Some((_, None)) => None,
                    Some((p, Some(arr))) => {
                        if state.index.consecutive_legs(p, f) {
                            Some(arr + state.instance.airports[o].min_transit)
                        } else if reference.flights[p].aircraft() == Some(a) {
                            Some(arr)
                        } else {
                            Some(arr + state.crew_connection(o))
                        }
                    }
                };
                let need = match (ready, earliest[f]) {
                    (Some(r), Some(e)) if r > e => state.next_legal_time(f, r, a),
                    (None, _) => None,
                    (_, e) => e,
                };
                if need != earliest[f] && state.flights[f].is_decision() {
                    earliest[f] = need;
                    changed = true;
                }
                prev = Some((f, earliest[f].map(|t| t + inst.flights[f].duration)));
            }
        }
        if !changed {
            break;
        }
    }
    let direct: Vec<bool> = (0..n)
        .map(|f| state.flights[f].is_decision() && state.flights[f].disrupted)
        .collect();
    let irregular = (0..n)
        .map(|f| {
            state.flights[f].is_decision()
                && (direct[f] || earliest[f] != reference.flights[f].departure())
        })
        .collect();
    Proximity {
        earliest,
        irregular,
        direct,
    }
}

impl SearchSpace {
    fn empty(state: &DisruptedState) -> Self {
        let inst = &state.instance;
        let mut groups = Vec::new();
        let mut flight_group = vec![None; inst.flights.len()];
        for (f, fs) in state.flights.iter().enumerate() {
            if fs.is_decision() {
                flight_group[f] = Some(groups.len());
                groups.push(ChoiceGroup {
                    entity: Entity::Flight(f),
                    options: vec![OptionChoice {
                        kind: OptionKind::Canceled,
                        iteration: 0,
                    }],
                });
            }
        }
        let mut maintenance_group = Vec::new();
        for m in 0..inst.maintenances.len() {
            maintenance_group.push(groups.len());
            groups.push(ChoiceGroup {
                entity: Entity::Maintenance(m),
                options: vec![OptionChoice {
                    kind: OptionKind::FailingMaintenance,
                    iteration: 0,
                }],
            });
        }
        SearchSpace {
            groups,
            flight_group,
            maintenance_group,
            slot_choices: Vec::new(),
            iteration: 0,
        }
    }

    pub fn option(&self, r: OptionRef) -> &OptionChoice {
        &self.groups[r.group].options[r.option]
    }

    pub fn option_count(&self) -> usize {
        self.groups.iter().map(|g| g.options.len()).sum()
    }

    /// Options other than the as-planned departure, Canceled and FailingMaintenance.
    pub fn change_option_count(&self, state: &DisruptedState) -> usize {
        self.groups
            .iter()
            .flat_map(|g| g.options.iter().map(move |o| (g.entity, o)))
            .filter(|(e, o)| is_change(state, *e, &o.kind))
            .count()
    }

    /// Option refs in deterministic order.
    pub fn option_refs(&self) -> impl Iterator<Item = OptionRef> + '_ {
        self.groups.iter().enumerate().flat_map(|(g, grp)| {
            (0..grp.options.len()).map(move |o| OptionRef { group: g, option: o })
        })
    }

    /// The option matching a flight's disposition, if present.
    pub fn find_flight_option(&self, f: usize, d: &FlightDisposition) -> Option<OptionRef> {
        let g = self.flight_group[f]?;
        let kind = match *d {
            FlightDisposition::Scheduled {
                departure,
                aircraft,
                crew,
            } => OptionKind::Scheduled {
                departure,
                aircraft,
                crew,
            },
            FlightDisposition::Canceled => OptionKind::Canceled,
        };
        self.groups[g]
            .position(&kind)
            .map(|option| OptionRef { group: g, option })
    }

    pub fn find_maintenance_option(&self, m: usize, d: &MaintenanceDisposition) -> Option<OptionRef> {
        let g = self.maintenance_group[m];
        let kind = match *d {
            MaintenanceDisposition::Succeeded { airport, start } => {
                OptionKind::SucceedingMaintenance { airport, start }
            }
            MaintenanceDisposition::Failed => OptionKind::FailingMaintenance,
        };
        self.groups[g]
            .position(&kind)
            .map(|option| OptionRef { group: g, option })
    }

    fn insert(&mut self, state: &DisruptedState, entity: Entity, kind: OptionKind) -> bool {
        let g = match entity {
            Entity::Flight(f) => match self.flight_group[f] {
                Some(g) => g,
                None => return false,
            },
            Entity::Maintenance(m) => self.maintenance_group[m],
        };
        if let (Entity::Flight(f), OptionKind::Scheduled { departure, aircraft, .. }) = (entity, kind) {
            if !state.option_legal(f, departure, aircraft) {
                return false;
            }
        }
        if self.groups[g].position(&kind).is_some() {
            return false;
        }
        self.groups[g].options.push(OptionChoice {
            kind,
            iteration: self.iteration,
        });
        true
    }

    /// Recomputes slot memberships from the current options.
    fn rebuild_slots(&mut self, state: &DisruptedState) {
        let inst = &state.instance;
        let mut members: Vec<Vec<OptionRef>> = vec![Vec::new(); inst.slots.len()];
        for r in self.option_refs().collect::<Vec<_>>() {
            let g = &self.groups[r.group];
            if let (Entity::Flight(f), OptionKind::Scheduled { departure, .. }) =
                (g.entity, g.options[r.option].kind)
            {
                for &s in &state.index.slots_by_airport[state.index.flight_origin[f]] {
                    if inst.slots[s].window.contains(departure) {
                        members[s].push(r);
                    }
                }
            }
        }
        self.slot_choices = members
            .into_iter()
            .enumerate()
            .filter(|(s, m)| !m.is_empty() || inst.slots[*s].nonuse_penalty > 0.0)
            .map(|(slot, members)| SlotChoice { slot, members })
            .collect();
    }
}

fn is_change(state: &DisruptedState, entity: Entity, kind: &OptionKind) -> bool {
    match (entity, kind) {
        (Entity::Flight(f), OptionKind::Scheduled { departure, aircraft, crew }) => {
            !(*departure == state.flights[f].departure
                && *aircraft == state.index.flight_aircraft[f]
                && *crew == state.index.flight_crew[f])
        }
        (_, OptionKind::Canceled | OptionKind::FailingMaintenance) => false,
        (_, _) => false,
    }
}

/// Cost of a choice under the instance's coefficients.
pub fn cost_of(choice: &Choice<'_>, state: &DisruptedState) -> CostExpr {
    let c = &state.instance.costs;
    let coefficient = match *choice {
        Choice::Slot(sc) => {
            return CostExpr {
                coefficient: state.instance.slots[sc.slot].nonuse_penalty,
                on_nonuse: true,
            }
        }
        Choice::Option(Entity::Flight(f), OptionKind::Scheduled { departure, aircraft, crew }) => {
            crate::model::scheduled_cost(state, f, *departure, *aircraft, *crew)
        }
        Choice::Option(_, OptionKind::Canceled) => c.cancellation_per_flight,
        Choice::Option(Entity::Maintenance(m), OptionKind::FailingMaintenance) => {
            state.instance.maintenances[m].fail_penalty
        }
        Choice::Option(_, _) => 0.0,
    };
    CostExpr {
        coefficient,
        on_nonuse: false,
    }
}

/// A candidate option and its priority tier (lower first).
struct Candidate {
    tier: u8,
    order: usize,
    entity: Entity,
    kind: OptionKind,
}

struct Planner<'a> {
    state: &'a DisruptedState,
    reference: &'a RecoverySchedule,
    cfg: &'a SpaceConfig,
    out: Vec<Candidate>,
}

impl<'a> Planner<'a> {
    fn push(&mut self, tier: u8, entity: Entity, kind: OptionKind) {
        let order = self.out.len();
        self.out.push(Candidate {
            tier,
            order,
            entity,
            kind,
        });
    }

    /// Resources of a flight in the reference schedule, else the originals.
    fn resources(&self, f: usize) -> (usize, usize) {
        match self.reference.flights[f] {
            FlightDisposition::Scheduled { aircraft, crew, .. } => (aircraft, crew),
            FlightDisposition::Canceled => (
                self.state.index.flight_aircraft[f],
                self.state.index.flight_crew[f],
            ),
        }
    }

    /// Departure option for `f` at `t` on (a, c); multi-leg groups get the
    /// whole chain, later legs at their earliest legal time.
    fn timed(&mut self, tier: u8, f: usize, t: Minutes, a: usize, c: usize) {
        let st = self.state;
        match st.index.flight_leg[f] {
            Some(l) if l.is_first() => {
                let legs = st.index.multileg_groups[l.group].legs.clone();
                let mut chain = Vec::new();
                let mut t = t;
                for (i, &leg) in legs.iter().enumerate() {
                    let at = if i == 0 {
                        st.next_legal_time(leg, t, a).filter(|&x| x == t)
                    } else {
                        st.next_legal_time(leg, t, a)
                    };
                    let Some(at) = at else { return };
                    chain.push((leg, at));
                    t = at + st.instance.flights[leg].duration + st.ground_time_after(leg);
                }
                for (leg, at) in chain {
                    self.push(
                        tier,
                        Entity::Flight(leg),
                        OptionKind::Scheduled {
                            departure: at,
                            aircraft: a,
                            crew: c,
                        },
                    );
                }
            }
            Some(_) => {}
            None => {
                if st.option_legal(f, t, a) {
                    self.push(
                        tier,
                        Entity::Flight(f),
                        OptionKind::Scheduled {
                            departure: t,
                            aircraft: a,
                            crew: c,
                        },
                    );
                }
            }
        }
    }

    /// Grid departures for `f`: baseline + k*g, plus the recovery start.
    fn grid(&self, f: usize) -> Vec<Minutes> {
        let st = self.state;
        let base = st.flights[f].departure;
        let latest = st.latest_departure(f);
        let rs = st.instance.anchors.recovery_start;
        let mut out = BTreeSet::new();
        if base < rs && rs <= latest {
            out.insert(rs);
        }
        let g = self.cfg.granularity.max(1);
        let mut t = base + g;
        while t <= latest {
            if t >= rs {
                out.insert(t);
            }
            t += g;
        }
        out.into_iter().collect()
    }

    fn first_leg(&self, f: usize) -> usize {
        match self.state.index.flight_leg[f] {
            Some(l) => self.state.index.multileg_groups[l.group].legs[0],
            None => f,
        }
    }

    /// Legs from `f` to the end of its multi-leg group (or `[f]`).
    fn whole_group(&self, f: usize) -> Vec<usize> {
        match self.state.index.flight_leg[f] {
            Some(l) => self.state.index.multileg_groups[l.group].legs.clone(),
            None => vec![f],
        }
    }

    fn delays(&mut self, tier: u8, f: usize, times: &[Minutes]) {
        let f = self.first_leg(f);
        if self.state.flights[f].status != FlightStatus::Open {
            return;
        }
        let (a, c) = self.resources(f);
        let (oa, oc) = (self.state.index.flight_aircraft[f], self.state.index.flight_crew[f]);
        for &t in times {
            self.timed(tier, f, t, a, c);
            if (a, c) != (oa, oc) {
                self.timed(tier, f, t, oa, oc);
            }
        }
    }

    /// Open flights of a rotation from `f` onwards, whole multi-leg groups,
    /// about `cfg.swap_tail` long.
    fn tail(&self, rot: &[usize], from: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &g in rot.iter().skip(from) {
            if self.state.flights[g].status != FlightStatus::Open {
                break;
            }
            let group_start = self.state.index.flight_leg[g].is_none_or(|l| l.is_first());
            if out.len() >= self.cfg.swap_tail && group_start {
                break;
            }
            out.push(g);
        }
        // Drop a trailing partial multi-leg group.
        while let Some(&last) = out.last() {
            match self.state.index.flight_leg[last] {
                Some(l) if !l.is_last() => {
                    out.pop();
                }
                _ => break,
            }
        }
        out
    }

    /// Times for flying `flights` in order on aircraft `a` once it is ready.
    fn chain(&self, flights: &[usize], a: usize, mut ready: Minutes) -> Vec<(usize, Minutes)> {
        let st = self.state;
        let mut out = Vec::new();
        for &f in flights {
            let Some(t) = st.next_legal_time(f, ready, a) else {
                break;
            };
            out.push((f, t));
            ready = t + st.instance.flights[f].duration + st.ground_time_after(f);
        }
        // Never leave half a multi-leg group.
        while let Some(&(last, _)) = out.last() {
            match st.index.flight_leg[last] {
                Some(l) if !l.is_last() => {
                    out.pop();
                }
                _ => break,
            }
        }
        out
    }

    fn aircraft_swaps(&mut self, tier: u8, f: usize) {
        let st = self.state;
        let f = self.first_leg(f);
        if st.flights[f].status != FlightStatus::Open {
            return;
        }
        let (a, _) = self.resources(f);
        let o = st.index.flight_origin[f];
        let t = self.reference.flights[f]
            .departure()
            .unwrap_or(st.flights[f].departure);
        let rot_a = st.rotation(a, self.reference);
        let pos_a = rot_a.iter().position(|&g| g == f);
        // Where a stands before f.
        let ready_a = st
            .ground_gaps(a, self.reference)
            .into_iter()
            .find(|&(p, r, next)| p == o && r <= t && next >= t)
            .map(|(_, r, _)| r);
        let mut partners = Vec::new();
        for b in 0..st.instance.aircraft.len() {
            if b == a {
                continue;
            }
            for (p, ready, next) in st.ground_gaps(b, self.reference) {
                if p == o && ready <= t + self.cfg.radius && next >= t - self.cfg.radius {
                    partners.push((ready, b, next));
                    break;
                }
            }
        }
        partners.sort();
        for &(ready_b, b, next_b) in partners.iter().take(self.cfg.max_partners) {
            let tail_a = match pos_a {
                Some(i) => self.tail(&rot_a, i),
                None => self.whole_group(f),
            };
            for (g, tg) in self.chain(&tail_a, b, ready_b) {
                let c = self.resources(g).1;
                self.push(
                    tier,
                    Entity::Flight(g),
                    OptionKind::Scheduled {
                        departure: tg,
                        aircraft: b,
                        crew: c,
                    },
                );
            }
            // Reciprocal: a takes over b's next departures.
            if let Some(ra) = ready_a {
                if next_b < Minutes::MAX {
                    let rot_b = st.rotation(b, self.reference);
                    if let Some(j) = rot_b
                        .iter()
                        .position(|&g| self.reference.flights[g].departure() == Some(next_b) && st.index.flight_origin[g] == o)
                    {
                        let tail_b = self.tail(&rot_b, j);
                        for (g, tg) in self.chain(&tail_b, a, ra) {
                            let c = self.resources(g).1;
                            self.push(
                                tier,
                                Entity::Flight(g),
                                OptionKind::Scheduled {
                                    departure: tg,
                                    aircraft: a,
                                    crew: c,
                                },
                            );
                        }
                    }
                }
            }
        }
    }

    fn crew_swaps(&mut self, tier: u8, f: usize) {
        let st = self.state;
        let f = self.first_leg(f);
        if st.flights[f].status != FlightStatus::Open {
            return;
        }
        let (a, c) = self.resources(f);
        let o = st.index.flight_origin[f];
        let t = self.reference.flights[f]
            .departure()
            .unwrap_or(st.flights[f].departure);
        let seq_c = st.crew_sequence(c, self.reference);
        let ready_c = st
            .crew_gaps(c, self.reference)
            .into_iter()
            .find(|&(p, r, next)| p == o && next >= t && r <= t + self.cfg.radius)
            .map(|(_, r, _)| r);
        let mut partners = Vec::new();
        for d in 0..st.instance.crew_groups.len() {
            if d == c {
                continue;
            }
            for (p, ready, next) in st.crew_gaps(d, self.reference) {
                if p == o && ready <= t + self.cfg.radius && next >= t - self.cfg.radius {
                    partners.push((ready, d, next));
                    break;
                }
            }
        }
        partners.sort();
        for &(ready_d, d, next_d) in partners.iter().take(self.cfg.max_partners) {
            // d flies f and c's following flights on the same aircraft.
            let mut tail: Vec<usize> = Vec::new();
            if let Some(i) = seq_c.iter().position(|&g| g == f) {
                for &g in &seq_c[i..] {
                    if self.resources(g).0 != a || st.flights[g].status != FlightStatus::Open {
                        break;
                    }
                    tail.push(g);
                    if tail.len() >= self.cfg.swap_tail && st.index.flight_leg[g].is_none_or(|l| l.is_last()) {
                        break;
                    }
                }
            } else {
                tail = self.whole_group(f);
            }
            let mut ready = ready_d;
            let mut first = true;
            let mut chained = Vec::new();
            for &g in &tail {
                let from = if first {
                    ready.max(st.flights[g].departure)
                } else {
                    ready
                };
                let Some(tg) = st.next_legal_time(g, from, a) else {
                    break;
                };
                chained.push((g, tg));
                ready = tg + st.instance.flights[g].duration + st.ground_time_after(g);
                first = false;
            }
            while let Some(&(last, _)) = chained.last() {
                match st.index.flight_leg[last] {
                    Some(l) if !l.is_last() => {
                        chained.pop();
                    }
                    _ => break,
                }
            }
            for (g, tg) in chained {
                self.push(
                    tier,
                    Entity::Flight(g),
                    OptionKind::Scheduled {
                        departure: tg,
                        aircraft: a,
                        crew: d,
                    },
                );
            }
            // Reciprocal: c takes d's next departure.
            if let (Some(rc), true) = (ready_c, next_d < Minutes::MAX) {
                let seq_d = st.crew_sequence(d, self.reference);
                if let Some(&g) = seq_d.iter().find(|&&g| {
                    self.reference.flights[g].departure() == Some(next_d) && st.index.flight_origin[g] == o
                }) {
                    let group = self.whole_group(g);
                    if group[0] == g && st.flights[g].status == FlightStatus::Open {
                        let ag = self.resources(g).0;
                        let mut ready = rc;
                        let mut ok = Vec::new();
                        for &leg in &group {
                            let Some(tl) = st.next_legal_time(leg, ready, ag) else {
                                ok.clear();
                                break;
                            };
                            ok.push((leg, tl));
                            ready = tl + st.instance.flights[leg].duration + st.ground_time_after(leg);
                        }
                        for (leg, tl) in ok {
                            self.push(
                                tier,
                                Entity::Flight(leg),
                                OptionKind::Scheduled {
                                    departure: tl,
                                    aircraft: ag,
                                    crew: c,
                                },
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Maintenance placements: window starts, ready times of arrival options at
/// window airports clamped into the window, and the reference placement.
fn maintenance_candidates(
    space: &SearchSpace,
    state: &DisruptedState,
    reference: &RecoverySchedule,
    m: usize,
    dense: Option<Minutes>,
) -> Vec<OptionKind> {
    let inst = &state.instance;
    let mt = &inst.maintenances[m];
    let a = state.index.maintenance_aircraft[m];
    let mut out = BTreeSet::new();
    for w in &mt.allowed_windows {
        let p = state.index.airports[&w.airport];
        out.insert((w.earliest_start, p));
        let start = state.aircraft_start[a];
        if start.airport == p {
            out.insert((start.time.clamp(w.earliest_start, w.latest_start), p));
        }
        for r in space.option_refs() {
            let g = &space.groups[r.group];
            if let (Entity::Flight(f), OptionKind::Scheduled { departure, aircraft, .. }) =
                (g.entity, g.options[r.option].kind)
            {
                if aircraft == a
                    && state.index.flight_destination[f] == p
                    && state.index.flight_leg[f].is_none_or(|l| l.is_last())
                {
                    let ready = departure + inst.flights[f].duration + state.ground_time_after(f);
                    if ready <= w.latest_start {
                        out.insert((ready.max(w.earliest_start), p));
                    }
                }
            }
        }
        if let Some(step) = dense {
            let mut t = w.earliest_start;
            while t <= w.latest_start {
                out.insert((t, p));
                t += step.max(1);
            }
        }
    }
    if let MaintenanceDisposition::Succeeded { airport, start } = reference.maintenances[m] {
        out.insert((start, airport));
    }
    if let MaintenanceDisposition::Succeeded { airport, start } = state.baseline.maintenances[m] {
        out.insert((start, airport));
    }
    out.into_iter()
        .map(|(start, airport)| OptionKind::SucceedingMaintenance { airport, start })
        .collect()
}

/// Drops Scheduled options their aircraft or crew can never reach, and
/// multi-leg chains that cannot be completed.
fn reachability_filter(space: &mut SearchSpace, state: &DisruptedState) {
    let inst = &state.instance;
    loop {
        let mut opts: Vec<(Minutes, usize, OptionRef, usize, usize)> = Vec::new();
        for r in space.option_refs() {
            let g = &space.groups[r.group];
            if let (Entity::Flight(f), OptionKind::Scheduled { departure, aircraft, crew }) =
                (g.entity, g.options[r.option].kind)
            {
                opts.push((departure, f, r, aircraft, crew));
            }
        }
        opts.sort();
        let na = inst.aircraft.len();
        let nc = inst.crew_groups.len();
        let np = inst.airports.len();
        let mut ac_at = vec![Minutes::MAX; na * np];
        let mut crew_at = vec![Minutes::MAX; nc * np];
        for a in 0..na {
            let s = state.aircraft_start[a];
            ac_at[a * np + s.airport] = s.time;
        }
        for c in 0..nc {
            let s = state.crew_start[c];
            crew_at[c * np + s.airport] = s.time;
        }
        let mut dead: HashSet<OptionRef> = HashSet::new();
        // Options are processed in departure order, so arrivals feed later ones.
        let mut leg_end: HashSet<(usize, usize, usize, Minutes)> = HashSet::new();
        for &(t, f, r, a, c) in &opts {
            let o = state.index.flight_origin[f];
            let d = state.index.flight_destination[f];
            let leg = state.index.flight_leg[f];
            let reachable = match leg {
                Some(l) if !l.is_first() => {
                    let prev = inst_leg(state, l.group, l.position - 1);
                    leg_end
                        .iter()
                        .any(|&(pf, pa, pc, ready)| pf == prev && pa == a && pc == c && ready <= t)
                }
                _ => ac_at[a * np + o] <= t && crew_at[c * np + o] <= t,
            };
            if !reachable {
                dead.insert(r);
                continue;
            }
            let arr = t + inst.flights[f].duration;
            match leg {
                Some(l) if !l.is_last() => {
                    leg_end.insert((f, a, c, arr + inst.airports[d].min_transit));
                }
                _ => {
                    let ra = arr + state.ground_time_after(f);
                    ac_at[a * np + d] = ac_at[a * np + d].min(ra);
                    crew_at[c * np + d] = crew_at[c * np + d].min(arr);
                }
            }
        }
        // Non-last legs need a continuation with the same pair.
        let live: Vec<_> = opts.iter().filter(|o| !dead.contains(&o.2)).copied().collect();
        for &(t, f, r, a, c) in &live {
            if let Some(l) = state.index.flight_leg[f] {
                if !l.is_last() {
                    let next = inst_leg(state, l.group, l.position + 1);
                    let ready = t + inst.flights[f].duration + state.ground_time_after(f);
                    let ok = live
                        .iter()
                        .any(|&(nt, nf, _, na_, nc_)| nf == next && na_ == a && nc_ == c && nt >= ready);
                    if !ok {
                        dead.insert(r);
                    }
                }
            }
        }
        if dead.is_empty() {
            return;
        }
        remove_options(space, &dead);
    }
}

fn inst_leg(state: &DisruptedState, group: usize, position: usize) -> usize {
    state.index.multileg_groups[group].legs[position]
}

fn remove_options(space: &mut SearchSpace, dead: &HashSet<OptionRef>) {
    for (g, grp) in space.groups.iter_mut().enumerate() {
        let mut i = 0;
        grp.options.retain(|_| {
            let keep = !dead.contains(&OptionRef { group: g, option: i });
            i += 1;
            keep
        });
    }
}

/// Adds candidates in tier order until `budget` new change options are in.
fn admit(space: &mut SearchSpace, state: &DisruptedState, mut cands: Vec<Candidate>, budget: usize) -> usize {
    cands.sort_by_key(|c| (c.tier, c.order));
    let mut added = 0;
    let mut i = 0;
    while i < cands.len() && added < budget {
        // A multi-leg chain is admitted whole.
        let mut j = i + 1;
        if let (Entity::Flight(f), OptionKind::Scheduled { aircraft, crew, .. }) = (cands[i].entity, cands[i].kind) {
            if state.index.flight_leg[f].is_some_and(|l| l.is_first()) {
                while j < cands.len() {
                    match (cands[j].entity, cands[j].kind) {
                        (Entity::Flight(g), OptionKind::Scheduled { aircraft: a2, crew: c2, .. })
                            if state.index.flight_leg[g].is_some_and(|l| !l.is_first())
                                && a2 == aircraft
                                && c2 == crew
                                && cands[j].tier == cands[i].tier =>
                        {
                            j += 1
                        }
                        _ => break,
                    }
                }
            }
        }
        for c in &cands[i..j] {
            if space.insert(state, c.entity, c.kind) && is_change(state, c.entity, &c.kind) {
                added += 1;
            }
        }
        i = j;
    }
    added
}

/// First-iteration space: Canceled and as-planned for every flight, delay
/// copies around irregularities, swaps among nearby resources, and
/// maintenance placements.
pub fn build_initial_space(state: &DisruptedState, cfg: &SpaceConfig) -> SearchSpace {
    build_initial_space_with(state, cfg, &proximity(state, &state.baseline))
}

pub fn build_initial_space_with(state: &DisruptedState, cfg: &SpaceConfig, prox: &Proximity) -> SearchSpace {
    let mut space = SearchSpace::empty(state);
    space.iteration = 1;
    let budget = cfg.budget_for(state);
    let reference = &state.baseline;
    for (f, fs) in state.flights.iter().enumerate() {
        if !fs.is_decision() {
            continue;
        }
        let a = state.index.flight_aircraft[f];
        let c = state.index.flight_crew[f];
        space.insert(
            state,
            Entity::Flight(f),
            OptionKind::Scheduled {
                departure: fs.departure,
                aircraft: a,
                crew: c,
            },
        );
    }

    let mut planner = Planner {
        state,
        reference,
        cfg,
        out: Vec::new(),
    };
    let n = state.instance.flights.len();
    let irregular: Vec<usize> = (0..n).filter(|&f| prox.irregular[f]).collect();
    for &f in &irregular {
        let tier = if prox.direct[f] { 0 } else { 1 };
        if let Some(t) = prox.earliest[f] {
            let first = planner.first_leg(f);
            if first == f {
                let g = cfg.granularity.max(1);
                let base = state.flights[f].departure;
                let snapped = base + ((t - base + g - 1) / g) * g;
                planner.delays(tier, f, &[t]);
                planner.delays(tier, f, &[snapped]);
            }
        }
    }
    // Remaining grid points, round-robin across irregular flights.
    let grids: Vec<(usize, Vec<Minutes>)> = irregular
        .iter()
        .filter(|&&f| planner.first_leg(f) == f)
        .map(|&f| {
            let floor = prox.earliest[f].unwrap_or(state.flights[f].departure);
            (f, planner.grid(f).into_iter().filter(|&t| t >= floor).collect())
        })
        .collect();
    let depth = grids.iter().map(|(_, g)| g.len()).max().unwrap_or(0);
    for k in 0..depth {
        for (f, g) in &grids {
            if let Some(&t) = g.get(k) {
                planner.delays(2, *f, &[t]);
            }
        }
    }
    // Flights that cannot fly on their own resources come first among swaps.
    let mut swap_order: Vec<usize> = irregular.clone();
    swap_order.sort_by_key(|&f| (prox.earliest[f].is_some(), f));
    for &f in &swap_order {
        planner.aircraft_swaps(3, f);
        planner.crew_swaps(3, f);
    }
    let cands = planner.out;
    admit(&mut space, state, cands, budget);

    for m in 0..state.instance.maintenances.len() {
        for kind in maintenance_candidates(&space, state, reference, m, None) {
            space.insert(state, Entity::Maintenance(m), kind);
        }
    }
    reachability_filter(&mut space, state);
    ensure_maintenance_option(&mut space, state);
    space.rebuild_slots(state);
    space
}

fn ensure_maintenance_option(space: &mut SearchSpace, state: &DisruptedState) {
    for m in 0..state.instance.maintenances.len() {
        let g = space.maintenance_group[m];
        let has = space.groups[g]
            .options
            .iter()
            .any(|o| matches!(o.kind, OptionKind::SucceedingMaintenance { .. }));
        if !has {
            let w = &state.instance.maintenances[m].allowed_windows[0];
            let kind = OptionKind::SucceedingMaintenance {
                airport: state.index.airports[&w.airport],
                start: w.earliest_start,
            };
            space.insert(state, Entity::Maintenance(m), kind);
        }
    }
}

/// Grows the space around the entities named in `feedback`. Never removes
/// options, so earlier solutions stay representable.
pub fn expand_space(
    space: &SearchSpace,
    state: &DisruptedState,
    reference: &RecoverySchedule,
    feedback: &SolutionFeedback,
    cfg: &SpaceConfig,
) -> SearchSpace {
    let mut next = space.clone();
    if feedback.is_empty() {
        return next;
    }
    next.iteration = space.iteration + 1;
    let budget = cfg.budget_for(state);
    let mut planner = Planner {
        state,
        reference,
        cfg,
        out: Vec::new(),
    };
    let inst = &state.instance;
    // Cancellations: retry the flight on every grid time, with neighbours.
    for &f in &feedback.cancellations {
        let f = planner.first_leg(f);
        let times: Vec<Minutes> = std::iter::once(state.flights[f].departure)
            .chain(planner.grid(f))
            .collect();
        planner.delays(0, f, &times);
        let a = state.index.flight_aircraft[f];
        let rot = state.rotation(a, &state.baseline);
        if let Some(i) = rot.iter().position(|&g| g == f) {
            for &g in rot.iter().skip(i + 1).take(2) {
                let times = planner.grid(g);
                planner.delays(1, g, &times);
            }
        }
        planner.aircraft_swaps(1, f);
        planner.crew_swaps(1, f);
    }
    for &f in &feedback.large_delays {
        planner.aircraft_swaps(2, f);
        planner.crew_swaps(2, f);
        let times = planner.grid(f);
        planner.delays(3, f, &times);
    }
    // Maintenance failures: let the aircraft linger at window airports.
    for &m in &feedback.maintenance_failures {
        let a = state.index.maintenance_aircraft[m];
        let mt = &inst.maintenances[m];
        for f in state.rotation(a, reference) {
            if !state.flights[f].is_decision() {
                continue;
            }
            let o = state.index.flight_origin[f];
            for w in &mt.allowed_windows {
                if state.index.airports[&w.airport] != o {
                    continue;
                }
                let dep = reference.flights[f].departure().unwrap_or(state.flights[f].departure);
                if dep + cfg.radius >= w.earliest_start && dep <= w.latest_start + mt.duration {
                    let floor = w.earliest_start + mt.duration;
                    let times: Vec<Minutes> = planner.grid(f).into_iter().filter(|&t| t >= floor).collect();
                    planner.delays(0, f, &times);
                }
            }
        }
    }
    let cands = planner.out;
    admit(&mut next, state, cands, budget);
    for &m in &feedback.maintenance_failures {
        for kind in maintenance_candidates(&next, state, reference, m, Some(cfg.granularity)) {
            next.insert(state, Entity::Maintenance(m), kind);
        }
    }
    for m in 0..inst.maintenances.len() {
        if feedback.maintenance_failures.contains(&m) {
            continue;
        }
        for kind in maintenance_candidates(&next, state, reference, m, None) {
            next.insert(state, Entity::Maintenance(m), kind);
        }
    }
    reachability_filter(&mut next, state);
    next.rebuild_slots(state);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::example::example_instance;
    use crate::io::generator::{generate_instance, GeneratorConfig};
    use crate::model::apply_disruptions;

    #[test]
    fn undisrupted_has_only_planned_and_cancel() {
        let mut inst = generate_instance(&GeneratorConfig::small(3)).unwrap();
        inst.disruptions.clear();
        let state = apply_disruptions(&inst).unwrap();
        let space = build_initial_space(&state, &SpaceConfig::default());
        for g in &space.groups {
            if let Entity::Flight(f) = g.entity {
                assert_eq!(g.options.len(), 2, "flight {}", inst.flights[f].id);
                assert!(g.options.iter().any(|o| o.kind == OptionKind::Canceled));
            }
        }
    }

    #[test]
    fn example_space_concentrates_on_delayed_aircraft() {
        let inst = example_instance();
        let state = apply_disruptions(&inst).unwrap();
        let space = build_initial_space(&state, &SpaceConfig::default());
        let a3 = state.index.aircraft["A#3"];
        let mut on_a3 = 0;
        let mut elsewhere = 0;
        for g in &space.groups {
            if let Entity::Flight(f) = g.entity {
                let changes = g.options.iter().filter(|o| is_change(&state, g.entity, &o.kind)).count();
                if state.index.flight_aircraft[f] == a3 {
                    on_a3 += changes;
                } else {
                    elsewhere += changes;
                }
            }
        }
        assert!(on_a3 > elsewhere, "{on_a3} vs {elsewhere}");
    }

    #[test]
    fn budget_bounds_change_options() {
        let inst = generate_instance(&GeneratorConfig::small(7)).unwrap();
        let state = apply_disruptions(&inst).unwrap();
        let cfg = SpaceConfig {
            budget: Some(25),
            ..Default::default()
        };
        let space = build_initial_space(&state, &cfg);
        assert!(space.change_option_count(&state) <= 25);
    }

    #[test]
    fn expand_with_empty_feedback_is_identity() {
        let inst = generate_instance(&GeneratorConfig::small(2)).unwrap();
        let state = apply_disruptions(&inst).unwrap();
        let cfg = SpaceConfig::default();
        let space = build_initial_space(&state, &cfg);
        let next = expand_space(&space, &state, &state.baseline, &SolutionFeedback::default(), &cfg);
        assert_eq!(space, next);
    }

    #[test]
    fn expand_after_cancellation_adds_options_for_the_flight() {
        let inst = generate_instance(&GeneratorConfig::small(5)).unwrap();
        let state = apply_disruptions(&inst).unwrap();
        let cfg = SpaceConfig::default();
        let space = build_initial_space(&state, &cfg);
        let f = (0..inst.flights.len())
            .find(|&f| {
                state.flights[f].status == FlightStatus::Open
                    && !state.flights[f].removed
                    && state.index.flight_leg[f].is_none()
                    && state.latest_departure(f) > state.flights[f].departure + 30
                    && space.groups[space.flight_group[f].unwrap()].options.len() == 2
            })
            .unwrap();
        let mut reference = state.baseline.clone();
        reference.flights[f] = FlightDisposition::Canceled;
        let fb = SolutionFeedback {
            cancellations: vec![f],
            ..Default::default()
        };
        let next = expand_space(&space, &state, &reference, &fb, &cfg);
        let g = space.flight_group[f].unwrap();
        assert!(next.groups[g].options.len() > space.groups[g].options.len());
        for (a, b) in space.groups.iter().zip(&next.groups) {
            for o in &a.options {
                assert!(b.position(&o.kind).is_some());
            }
        }
    }

    #[test]
    fn cost_examples() {
        let inst = example_instance();
        let state = apply_disruptions(&inst).unwrap();
        let f = 0;
        let planned = OptionKind::Scheduled {
            departure: inst.flights[f].sched_departure,
            aircraft: state.index.flight_aircraft[f],
            crew: state.index.flight_crew[f],
        };
        let c = cost_of(&Choice::Option(Entity::Flight(f), &planned), &state);
        assert_eq!(c.coefficient, 0.0);
        let late = OptionKind::Scheduled {
            departure: inst.flights[f].sched_departure + 45,
            aircraft: state.index.flight_aircraft[f],
            crew: state.index.flight_crew[f],
        };
        let c = cost_of(&Choice::Option(Entity::Flight(f), &late), &state);
        assert_eq!(c.coefficient, 450.0);
        let c = cost_of(&Choice::Option(Entity::Flight(f), &OptionKind::Canceled), &state);
        assert_eq!(c.coefficient, inst.costs.cancellation_per_flight);
    }
}
