use std::collections::{HashMap, HashSet};
use std::fmt;

use super::feasibility::{check_schedule, CheckOptions};
use super::index::InstanceIndex;
use super::instance::{Disruption, ProblemInstance};
use super::state::DisruptedState;

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub entity: String,
    pub id: String,
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?} field {}: {}", self.entity, self.id, self.field, self.rule)
    }
}

struct Collector(Vec<Diagnostic>);

impl Collector {
    fn add(&mut self, entity: &str, id: &str, field: &str, rule: impl Into<String>) {
        self.0.push(Diagnostic {
            entity: entity.into(),
            id: id.into(),
            field: field.into(),
            rule: rule.into(),
        });
    }
}

/// Checks every instance invariant; an empty result means the instance is
/// safe to hand to the rest of the pipeline.
pub fn validate_instance(inst: &ProblemInstance) -> Vec<Diagnostic> {
    let mut d = Collector(Vec::new());
    let a = &inst.anchors;
    if a.current_time > a.recovery_start {
        d.add("anchors", "", "current_time", "current_time must not exceed recovery_start");
    }
    if a.recovery_start >= a.recovery_finish {
        d.add("anchors", "", "recovery_start", "recovery_start must precede recovery_finish");
    }
    if a.max_delay <= 0 {
        d.add("anchors", "", "max_delay", "max_delay must be positive");
    }

    let index = match InstanceIndex::build(inst) {
        Ok(i) => i,
        Err(e) => {
            d.add("instance", "", "id", e.to_string());
            return d.0;
        }
    };

    for ap in &inst.airports {
        if ap.min_crew_connection <= 0 {
            d.add(
                "airport",
                &ap.id,
                "min_crew_connection",
                "must be positive so crew disembark arcs stay vertical",
            );
        }
        for (field, v) in [
            ("min_turnaround", ap.min_turnaround),
            ("min_transit", ap.min_transit),
            ("min_pax_connection", ap.min_pax_connection),
        ] {
            if v < 0 {
                d.add("airport", &ap.id, field, "must be nonnegative");
            }
        }
    }
    for f in &inst.flights {
        if f.duration <= 0 {
            d.add("flight", &f.id, "duration", "must be positive");
        }
        if f.origin == f.destination {
            d.add("flight", &f.id, "destination", "must differ from origin");
        }
    }
    for c in &inst.crew_groups {
        if c.flight_time_limit <= 0 {
            d.add("crew_group", &c.id, "flight_time_limit", "must be positive");
        }
    }

    let max_cancel = inst.costs.cancellation_per_flight;
    let mut per_aircraft: HashMap<&str, usize> = HashMap::new();
    for m in &inst.maintenances {
        if m.duration <= 0 {
            d.add("maintenance", &m.id, "duration", "must be positive");
        }
        if m.allowed_windows.is_empty() {
            d.add("maintenance", &m.id, "allowed_windows", "needs at least one window");
        }
        for w in &m.allowed_windows {
            if w.earliest_start > w.latest_start {
                d.add("maintenance", &m.id, "allowed_windows", "earliest_start after latest_start");
            }
        }
        if m.fail_penalty <= max_cancel {
            d.add(
                "maintenance",
                &m.id,
                "fail_penalty",
                "must exceed the per-flight cancellation cost",
            );
        }
        let n = per_aircraft.entry(m.aircraft.as_str()).or_default();
        *n += 1;
        if *n == 2 {
            d.add("maintenance", &m.id, "aircraft", "at most one maintenance per aircraft");
        }
    }
    for s in &inst.slots {
        if s.window.start >= s.window.end {
            d.add("slot", &s.id, "window", "start must precede end");
        }
        if s.nonuse_penalty < 0.0 {
            d.add("slot", &s.id, "nonuse_penalty", "must be nonnegative");
        }
    }
    for (airport, slots) in index.slots_by_airport.iter().enumerate() {
        for w in slots.windows(2) {
            if inst.slots[w[1]].window.start < inst.slots[w[0]].window.end {
                d.add(
                    "slot",
                    &inst.slots[w[1]].id,
                    "window",
                    format!("overlaps another slot at {}", inst.airports[airport].id),
                );
            }
        }
    }

    for g in &index.multileg_groups {
        let legs = &g.legs;
        let mut seen = HashSet::new();
        for &f in legs {
            if !seen.insert(inst.flights[f].leg_index) {
                d.add("multileg_group", &g.id, "leg_index", "duplicate leg index");
            }
        }
        if legs.len() < 2 {
            d.add("multileg_group", &g.id, "legs", "needs at least two legs");
        }
        for w in legs.windows(2) {
            let (p, n) = (&inst.flights[w[0]], &inst.flights[w[1]]);
            if p.destination != n.origin {
                d.add("multileg_group", &g.id, "legs", format!("leg {} does not continue from {}", n.id, p.id));
            }
            if n.sched_departure < p.sched_arrival() {
                d.add("multileg_group", &g.id, "legs", format!("leg {} departs before {} arrives", n.id, p.id));
            }
            if p.original_aircraft != n.original_aircraft || p.original_crew != n.original_crew {
                d.add("multileg_group", &g.id, "legs", "legs must share aircraft and crew");
            }
        }
        let flown = legs
            .iter()
            .filter(|&&f| inst.flights[f].sched_departure < a.current_time)
            .count();
        if flown > 0 && flown < legs.len() {
            d.add("multileg_group", &g.id, "legs", "group is partly flown at the current time");
        }
    }

    for it in &inst.itineraries {
        if it.passenger_count == 0 {
            d.add("itinerary", &it.id, "passenger_count", "must be positive");
        }
        if it.legs.is_empty() {
            d.add("itinerary", &it.id, "legs", "needs at least one leg");
        }
        for w in it.legs.windows(2) {
            let p = &inst.flights[index.flights[&w[0].flight]];
            let n = &inst.flights[index.flights[&w[1].flight]];
            if p.destination != n.origin {
                d.add("itinerary", &it.id, "legs", format!("{} does not connect to {}", p.id, n.id));
            }
            if n.sched_departure < p.sched_arrival() {
                d.add("itinerary", &it.id, "legs", format!("{} departs before {} arrives", n.id, p.id));
            }
        }
    }

    for dis in &inst.disruptions {
        let t = dis.target();
        match dis {
            Disruption::FlightDelay { minutes, .. } => {
                if *minutes <= 0 {
                    d.add("disruption", t, "minutes", "delay must be positive");
                }
                if inst.flights[index.flights[t]].sched_departure < a.current_time {
                    d.add("disruption", t, "target", "flight departed before the current time");
                }
            }
            Disruption::FlightCancellation { .. } => {
                if inst.flights[index.flights[t]].sched_departure < a.current_time {
                    d.add("disruption", t, "target", "flight departed before the current time");
                }
            }
            Disruption::AircraftUnavailability { window, .. }
            | Disruption::AirportClosure { window, .. } => {
                if window.start >= window.end {
                    d.add("disruption", t, "window", "start must precede end");
                }
            }
            Disruption::SlotChange { .. } => {}
        }
    }

    if d.0.is_empty() {
        baseline_consistency(inst, &mut d);
    }
    d.0
}

/// The original assignments must be feasible before disruptions apply.
fn baseline_consistency(inst: &ProblemInstance, d: &mut Collector) {
    let Ok(state) = DisruptedState::undisrupted(inst) else {
        return;
    };
    let opts = CheckOptions {
        maintenance: false,
        time_rules: false,
    };
    for v in check_schedule(&state.baseline, &state, opts) {
        d.add("baseline", &v.entity, &format!("{:?}", v.kind), v.detail);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{example_instance, generate_instance, GeneratorConfig};

    fn multileg_instance() -> (ProblemInstance, Vec<usize>) {
        let inst = generate_instance(&GeneratorConfig::medium(3)).unwrap();
        let index = InstanceIndex::build(&inst).unwrap();
        let legs = index.multileg_groups[0].legs.clone();
        (inst, legs)
    }

    #[test]
    fn generated_is_clean() {
        for seed in 0..4 {
            let inst = generate_instance(&GeneratorConfig::small(seed)).unwrap();
            assert_eq!(validate_instance(&inst), vec![]);
        }
    }

    #[test]
    fn zero_crew_connection() {
        let mut inst = example_instance();
        inst.airports[2].min_crew_connection = 0;
        let d = validate_instance(&inst);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "min_crew_connection");
        assert!(d[0].rule.contains("disembark"));
    }

    #[test]
    fn legs_out_of_order() {
        let (mut inst, legs) = multileg_instance();
        let (a, b) = (legs[0], legs[1]);
        let t = inst.flights[a].sched_departure;
        inst.flights[a].sched_departure = inst.flights[b].sched_departure;
        inst.flights[b].sched_departure = t;
        let d = validate_instance(&inst);
        let group = inst.flights[a].multileg_group.clone().unwrap();
        assert!(d.iter().any(|x| x.entity == "multileg_group" && x.id == group), "{d:?}");
    }

    #[test]
    fn partly_flown_group() {
        let (mut inst, legs) = multileg_instance();
        let (a, b) = (legs[0], legs[1]);
        let now = inst.flights[a].sched_departure + 1;
        assert!(now <= inst.flights[b].sched_departure);
        inst.anchors.current_time = now;
        inst.anchors.recovery_start = inst.anchors.recovery_start.max(now);
        inst.disruptions.clear();
        let d = validate_instance(&inst);
        assert!(d.iter().any(|x| x.rule.contains("partly flown")), "{d:?}");
    }
}
