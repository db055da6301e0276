//! Static SVG pictures of an instance, a time-space network and a plan.
//! Time runs left to right; each resource gets its own band of rows.

use std::fmt::Write;

use crate::model::{DisruptedState, FlightDisposition, Minutes, RecoverySchedule};
use crate::space::OptionKind;
use crate::tsn::{place_label, ArcKind, ArcVar, Place, Resource, TimeSpaceNetwork};

const LEFT: f64 = 120.0;
const TOP: f64 = 40.0;
const ROW: f64 = 22.0;
const WIDTH: f64 = 1000.0;

struct Canvas {
    t0: Minutes,
    t1: Minutes,
    rows: usize,
    body: String,
}

impl Canvas {
    fn new(t0: Minutes, t1: Minutes, rows: usize) -> Self {
        let t1 = if t1 <= t0 { t0 + 60 } else { t1 };
        Self {
            t0,
            t1,
            rows,
            body: String::new(),
        }
    }

    fn x(&self, t: Minutes) -> f64 {
        LEFT + (t - self.t0) as f64 / (self.t1 - self.t0) as f64 * WIDTH
    }

    fn y(&self, row: usize) -> f64 {
        TOP + row as f64 * ROW + ROW / 2.0
    }

    fn label(&mut self, row: usize, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="4" y="{:.1}" font-size="11" dominant-baseline="middle">{}</text>"#,
            self.y(row),
            escape(text)
        );
    }

    fn bar(&mut self, row: usize, from: Minutes, to: Minutes, fill: &str, extra: &str, text: &str) {
        let (x0, x1) = (self.x(from), self.x(to));
        let y = self.y(row) - ROW * 0.35;
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{fill}" {extra}/>"#,
            (x1 - x0).max(1.0),
            ROW * 0.7
        );
        if !text.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<text x="{:.1}" y="{:.1}" font-size="9" dominant-baseline="middle">{}</text>"#,
                x0 + 2.0,
                self.y(row),
                escape(text)
            );
        }
    }

    fn finish(self, title: &str, legend: &[(&str, &str)]) -> String {
        let height = TOP + self.rows as f64 * ROW + 40.0;
        let total = LEFT + WIDTH + 20.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total:.0}" height="{height:.0}" viewBox="0 0 {total:.0} {height:.0}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="4" y="14" font-size="13">{}</text>"#, escape(title));
        // Axis with hourly ticks.
        let base = TOP + self.rows as f64 * ROW;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{base:.1}" x2="{:.1}" y2="{base:.1}" stroke="#333"/>"##,
            LEFT + WIDTH
        );
        let mut t = (self.t0 + 59).div_euclid(60) * 60;
        while t <= self.t1 {
            let x = self.x(t);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{base:.1}" stroke="#eee"/><text x="{x:.1}" y="{:.1}" font-size="9" text-anchor="middle">{:02}:{:02}</text>"##,
                base + 12.0,
                t.div_euclid(60).rem_euclid(24),
                t.rem_euclid(60)
            );
            t += 60;
        }
        let mut lx = LEFT;
        for (name, color) in legend {
            let _ = writeln!(
                s,
                r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="10">{name}</text>"#,
                base + 20.0,
                lx + 14.0,
                base + 29.0
            );
            lx += 20.0 + 7.0 * name.len() as f64;
        }
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn horizon(state: &DisruptedState) -> (Minutes, Minutes) {
    let inst = &state.instance;
    let lo = inst
        .flights
        .iter()
        .map(|f| f.sched_departure)
        .chain([inst.anchors.current_time])
        .min()
        .unwrap_or(0);
    let hi = inst
        .flights
        .iter()
        .zip(&state.flights)
        .map(|(f, s)| s.departure.max(f.sched_departure) + f.duration)
        .chain([inst.anchors.recovery_finish])
        .max()
        .unwrap_or(lo);
    (lo, hi)
}

fn anchors(c: &mut Canvas, state: &DisruptedState) {
    let a = &state.instance.anchors;
    let base = TOP + c.rows as f64 * ROW;
    for (t, color) in [(a.current_time, "#c00"), (a.recovery_start, "#e80"), (a.recovery_finish, "#06c")] {
        if t < c.t0 || t > c.t1 {
            continue;
        }
        let x = c.x(t);
        let _ = writeln!(
            c.body,
            r#"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{base:.1}" stroke="{color}" stroke-dasharray="4 3"/>"#
        );
    }
}

/// Aircraft rotations as planned, disrupted departures highlighted.
pub fn plot_problem(state: &DisruptedState) -> String {
    let inst = &state.instance;
    let (t0, t1) = horizon(state);
    let mut c = Canvas::new(t0, t1, inst.aircraft.len());
    for (a, ac) in inst.aircraft.iter().enumerate() {
        c.label(a, &ac.id);
        for f in state.rotation(a, &state.baseline) {
            let fl = &inst.flights[f];
            let fs = &state.flights[f];
            let (fill, extra) = if fs.removed {
                ("#fcc", r##"stroke="#c00" stroke-dasharray="3 2""##)
            } else if fs.departure != fl.sched_departure {
                ("#f90", "")
            } else if fs.is_past() {
                ("#bbb", "")
            } else {
                ("#7ad", "")
            };
            c.bar(a, fs.departure, fs.departure + fl.duration, fill, extra, &fl.id);
        }
    }
    anchors(&mut c, state);
    c.finish(
        &format!("{} problem", inst.name),
        &[("planned", "#7ad"), ("delayed", "#f90"), ("canceled", "#fcc"), ("flown", "#bbb")],
    )
}

fn arc_color(kind: ArcKind, opt: Option<&OptionKind>, state: &DisruptedState, f: Option<usize>) -> &'static str {
    match (kind, opt) {
        (ArcKind::Flight, Some(OptionKind::Scheduled { departure, aircraft, crew })) => {
            let f = f.expect("flight option");
            if *aircraft != state.index.flight_aircraft[f] || *crew != state.index.flight_crew[f] {
                "#a3c"
            } else if *departure != state.flights[f].departure {
                "#f90"
            } else {
                "#28c"
            }
        }
        (ArcKind::Flight, _) => "#28c",
        (ArcKind::Maintenance, _) => "#2a2",
        (ArcKind::Sink, _) | (ArcKind::CancelVirtual, _) => "#c33",
        _ => "#999",
    }
}

/// Nodes and arcs of the network, one band per subnetwork, limited to
/// `only` when given.
pub fn plot_tsn(tsn: &TimeSpaceNetwork, state: &DisruptedState, only: Option<Resource>) -> String {
    let inst = &state.instance;
    let subnets: Vec<usize> = (0..tsn.subnets.len())
        .filter(|&s| only.is_none_or(|r| tsn.subnets[s] == r))
        .collect();
    // One row per (subnet, place), in place order.
    let mut rows: Vec<(usize, Place)> = tsn
        .nodes
        .iter()
        .filter_map(|n| n.subnet.filter(|s| subnets.contains(s)).map(|s| (s, n.place)))
        .collect();
    rows.sort();
    rows.dedup();
    let row_of = |s: usize, p: Place| rows.binary_search(&(s, p)).ok();
    let times = tsn
        .nodes
        .iter()
        .filter(|n| n.subnet.is_some_and(|s| subnets.contains(&s)))
        .map(|n| n.time);
    let (t0, t1) = match (times.clone().min(), times.max()) {
        (Some(a), Some(b)) => (a, b),
        _ => (inst.anchors.current_time, inst.anchors.recovery_finish),
    };
    let mut c = Canvas::new(t0, t1, rows.len());
    for (r, &(s, p)) in rows.iter().enumerate() {
        let owner = match tsn.subnets[s] {
            Resource::Aircraft(a) => &inst.aircraft[a].id,
            Resource::Crew(k) => &inst.crew_groups[k].id,
        };
        c.label(r, &format!("{owner} {}", place_label(state, p)));
    }
    let void_y = TOP - 10.0;
    let point = |c: &Canvas, n: usize| -> Option<(f64, f64)> {
        let node = &tsn.nodes[n];
        if n == tsn.void {
            return Some((c.x(node.time.clamp(c.t0, c.t1)), void_y));
        }
        let s = node.subnet?;
        row_of(s, node.place).map(|r| (c.x(node.time), c.y(r)))
    };
    for a in &tsn.arcs {
        let (Some((x0, y0)), Some((x1, y1))) = (point(&c, a.from), point(&c, a.to)) else { continue };
        if a.from == tsn.void && a.to == tsn.void {
            continue;
        }
        let (opt, flight) = match a.var {
            ArcVar::Option(r) => {
                let g = &tsn.space.groups[r.group];
                let f = match g.entity {
                    crate::space::Entity::Flight(f) => Some(f),
                    _ => None,
                };
                (Some(&g.options[r.option].kind), f)
            }
            _ => (None, None),
        };
        let color = arc_color(a.kind, opt, state, flight);
        let dash = if a.var == ArcVar::Fixed { r#" stroke-dasharray="2 2""# } else { "" };
        let _ = writeln!(
            c.body,
            r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y1:.1}" stroke="{color}" stroke-width="1.2"{dash}/>"#
        );
    }
    for n in 0..tsn.nodes.len() {
        if n == tsn.void {
            continue;
        }
        if let Some((x, y)) = point(&c, n) {
            let _ = writeln!(c.body, r##"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="#333"/>"##);
        }
    }
    let title = match only {
        Some(Resource::Aircraft(a)) => format!("network of {}", inst.aircraft[a].id),
        Some(Resource::Crew(k)) => format!("network of {}", inst.crew_groups[k].id),
        None => "network".to_string(),
    };
    c.finish(
        &title,
        &[
            ("as planned", "#28c"),
            ("delay", "#f90"),
            ("swap", "#a3c"),
            ("maintenance", "#2a2"),
            ("failure", "#c33"),
            ("others", "#999"),
        ],
    )
}

/// The plan per aircraft: original timing as outlines, new timing solid.
pub fn plot_solution(state: &DisruptedState, schedule: &RecoverySchedule) -> String {
    let inst = &state.instance;
    let (t0, t1) = horizon(state);
    let t1 = schedule
        .flights
        .iter()
        .enumerate()
        .filter_map(|(f, d)| d.departure().map(|t| t + inst.flights[f].duration))
        .fold(t1, Minutes::max);
    let mut c = Canvas::new(t0, t1, inst.aircraft.len() * 2);
    for (a, ac) in inst.aircraft.iter().enumerate() {
        c.label(2 * a, &ac.id);
        for f in state.rotation(a, &state.baseline) {
            let fl = &inst.flights[f];
            c.bar(
                2 * a,
                fl.sched_departure,
                fl.sched_arrival(),
                "none",
                r##"stroke="#888""##,
                &fl.id,
            );
        }
        for (f, d) in schedule.flights.iter().enumerate() {
            let FlightDisposition::Scheduled { departure, aircraft, crew } = *d else { continue };
            if aircraft != a {
                continue;
            }
            let fl = &inst.flights[f];
            let fill = if aircraft != state.index.flight_aircraft[f] || crew != state.index.flight_crew[f] {
                "#a3c"
            } else if departure != fl.sched_departure {
                "#f90"
            } else {
                "#7ad"
            };
            c.bar(2 * a + 1, departure, departure + fl.duration, fill, "", &fl.id);
        }
        for f in state.rotation(a, &state.baseline) {
            if schedule.flights[f] == FlightDisposition::Canceled && !state.flights[f].removed {
                let fl = &inst.flights[f];
                c.bar(2 * a + 1, fl.sched_departure, fl.sched_arrival(), "#fcc", r##"stroke="#c00""##, &fl.id);
            }
        }
    }
    anchors(&mut c, state);
    c.finish(
        &format!("{} plan", inst.name),
        &[
            ("original", "#fff"),
            ("on time", "#7ad"),
            ("delayed", "#f90"),
            ("swapped", "#a3c"),
            ("canceled", "#fcc"),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::example_instance;
    use crate::model::apply_disruptions;
    use crate::space::{build_initial_space, SearchSpace, SpaceConfig};
    use crate::tsn::{build_tsn, Balance, Node};

    #[test]
    fn empty_network_has_axes_only() {
        let state = apply_disruptions(&example_instance()).unwrap();
        let empty = SearchSpace {
            groups: Vec::new(),
            flight_group: vec![None; state.instance.flights.len()],
            maintenance_group: Vec::new(),
            slot_choices: Vec::new(),
            iteration: 0,
        };
        let tsn = TimeSpaceNetwork {
            nodes: vec![Node {
                subnet: None,
                place: Place::Void,
                time: 0,
                balance: Balance::Unconstrained,
            }],
            arcs: Vec::new(),
            void: 0,
            subnets: Vec::new(),
            aircraft_subnet: Vec::new(),
            crew_subnet: Vec::new(),
            space: empty,
            sinks: Vec::new(),
        };
        let svg = plot_tsn(&tsn, &state, None);
        assert!(svg.starts_with("<svg"));
        assert!(!svg.contains("<circle"));
        assert!(svg.contains("<line"));
    }

    #[test]
    fn aircraft_band_is_deterministic() {
        let state = apply_disruptions(&example_instance()).unwrap();
        let space = build_initial_space(&state, &SpaceConfig::default());
        let tsn = build_tsn(&space, &state).unwrap();
        let a3 = Resource::Aircraft(state.index.aircraft["A#3"]);
        let one = plot_tsn(&tsn, &state, Some(a3));
        assert_eq!(one, plot_tsn(&tsn, &state, Some(a3)));
        assert!(one.contains("A#3 LIS"));
        assert!(!one.contains("C#1"));
        assert!(one.contains("#f90"), "delay options drawn");
    }

    #[test]
    fn solution_shows_shift() {
        let state = apply_disruptions(&example_instance()).unwrap();
        let svg = plot_solution(&state, &state.baseline);
        // Delayed flights of the baseline are drawn solid orange next to
        // their original outline.
        assert!(svg.contains("#f90"));
        assert!(svg.contains(r##"fill="none""##));
        assert!(plot_problem(&state).contains("F13"));
    }
}
