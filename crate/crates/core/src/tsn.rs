//! Time-space network: one subnetwork per aircraft and per crew group, joined
//! only through the Void node.

use std::collections::HashMap;

use crate::model::{DisruptedState, Minutes};
use crate::space::{Entity, OptionKind, OptionRef, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resource {
    Aircraft(usize),
    Crew(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Airport(usize),
    /// Crew network only: aboard `aircraft` while it stands at `airport`.
    OnAircraft { airport: usize, aircraft: usize },
    /// Transit between leg `after_leg` and the next leg of a multi-leg group.
    SubThread { group: usize, after_leg: usize },
    Void,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Balance {
    Strict,
    Inequality,
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub subnet: Option<usize>,
    pub place: Place,
    pub time: Minutes,
    pub balance: Balance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcKind {
    Flight,
    Ground,
    Input,
    Embark,
    Disembark,
    Maintenance,
    Sink,
    CancelVirtual,
}

impl ArcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArcKind::Flight => "flight",
            ArcKind::Ground => "ground",
            ArcKind::Input => "input",
            ArcKind::Embark => "embark",
            ArcKind::Disembark => "disembark",
            ArcKind::Maintenance => "maintenance",
            ArcKind::Sink => "sink",
            ArcKind::CancelVirtual => "cancel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcVar {
    /// Shares the decision variable of an option.
    Option(OptionRef),
    /// Its own binary variable.
    Free,
    /// Fixed flow of one.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub kind: ArcKind,
    pub from: usize,
    pub to: usize,
    pub var: ArcVar,
    /// Sink arcs: the maintenance whose failure they express.
    pub maintenance: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TsnOptions {
    /// Emit Void-to-Void arcs for canceled options.
    pub debug: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TsnError {
    #[error("option {option} of {entity} has no chain from its previous leg")]
    UnchainedOption { entity: String, option: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpaceNetwork {
    pub nodes: Vec<Node>,
    pub arcs: Vec<Arc>,
    pub void: usize,
    pub subnets: Vec<Resource>,
    pub aircraft_subnet: Vec<usize>,
    pub crew_subnet: Vec<usize>,
    pub space: SearchSpace,
    /// Per maintenance: its sink arcs.
    pub sinks: Vec<Vec<usize>>,
}

/// Upper bound constant: arcs per option in the size bound
/// `|arcs| <= ARCS_PER_OPTION * |options| + 2 * |nodes| + 2 * |subnets|`.
pub const ARCS_PER_OPTION: usize = 5;

struct Builder {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    node_at: HashMap<(usize, Place, Minutes), usize>,
    arc_at: HashMap<(ArcKind, usize, usize), usize>,
}

impl Builder {
    fn node(&mut self, subnet: usize, place: Place, time: Minutes) -> usize {
        if let Some(&n) = self.node_at.get(&(subnet, place, time)) {
            return n;
        }
        let balance = match place {
            Place::SubThread { .. } => Balance::Strict,
            Place::Void => Balance::Unconstrained,
            _ => Balance::Inequality,
        };
        self.nodes.push(Node {
            subnet: Some(subnet),
            place,
            time,
            balance,
        });
        let n = self.nodes.len() - 1;
        self.node_at.insert((subnet, place, time), n);
        n
    }

    fn arc(&mut self, kind: ArcKind, from: usize, to: usize, var: ArcVar) -> usize {
        self.arcs.push(Arc {
            kind,
            from,
            to,
            var,
            maintenance: None,
        });
        self.arcs.len() - 1
    }

    /// Free arcs are deduplicated on their endpoints.
    fn free_arc(&mut self, kind: ArcKind, from: usize, to: usize) -> usize {
        if let Some(&a) = self.arc_at.get(&(kind, from, to)) {
            return a;
        }
        let a = self.arc(kind, from, to, ArcVar::Free);
        self.arc_at.insert((kind, from, to), a);
        a
    }
}

pub fn build_tsn(space: &SearchSpace, state: &DisruptedState) -> Result<TimeSpaceNetwork, TsnError> {
    build_tsn_with(space, state, TsnOptions::default())
}

pub fn build_tsn_with(
    space: &SearchSpace,
    state: &DisruptedState,
    opts: TsnOptions,
) -> Result<TimeSpaceNetwork, TsnError> {
    let inst = &state.instance;
    let idx = &state.index;
    let na = inst.aircraft.len();
    let nc = inst.crew_groups.len();
    let mut subnets: Vec<Resource> = (0..na).map(Resource::Aircraft).collect();
    subnets.extend((0..nc).map(Resource::Crew));
    let aircraft_subnet: Vec<usize> = (0..na).collect();
    let crew_subnet: Vec<usize> = (na..na + nc).collect();

    let mut b = Builder {
        nodes: vec![Node {
            subnet: None,
            place: Place::Void,
            time: Minutes::MIN,
            balance: Balance::Unconstrained,
        }],
        arcs: Vec::new(),
        node_at: HashMap::new(),
        arc_at: HashMap::new(),
    };
    let void = 0;

    // Input arcs.
    let mut input_node = vec![0; na];
    for a in 0..na {
        let s = state.aircraft_start[a];
        let n = b.node(aircraft_subnet[a], Place::Airport(s.airport), s.time);
        b.arc(ArcKind::Input, void, n, ArcVar::Fixed);
        input_node[a] = n;
    }
    for c in 0..nc {
        let s = state.crew_start[c];
        let sub = crew_subnet[c];
        match s.on_aircraft {
            Some(ac) => {
                let n = b.node(
                    sub,
                    Place::OnAircraft {
                        airport: s.airport,
                        aircraft: ac,
                    },
                    s.time,
                );
                b.arc(ArcKind::Input, void, n, ArcVar::Fixed);
                let g = b.node(sub, Place::Airport(s.airport), s.time);
                b.free_arc(ArcKind::Disembark, n, g);
            }
            None => {
                let n = b.node(sub, Place::Airport(s.airport), s.time);
                b.arc(ArcKind::Input, void, n, ArcVar::Fixed);
            }
        }
    }

    // Option arcs.
    for r in space.option_refs().collect::<Vec<_>>() {
        let group = &space.groups[r.group];
        let kind = group.options[r.option].kind;
        match (group.entity, kind) {
            (
                Entity::Flight(f),
                OptionKind::Scheduled {
                    departure: t,
                    aircraft: a,
                    crew: c,
                },
            ) => {
                let fl = &inst.flights[f];
                let o = idx.flight_origin[f];
                let d = idx.flight_destination[f];
                let arr = t + fl.duration;
                let leg = idx.flight_leg[f];
                let first = leg.is_none_or(|l| l.is_first());
                let last = leg.is_none_or(|l| l.is_last());
                let (sa, sc) = (aircraft_subnet[a], crew_subnet[c]);
                let var = ArcVar::Option(r);
                let transit = arr + inst.airports[d].min_transit;

                // Aircraft network.
                let from = if first {
                    b.node(sa, Place::Airport(o), t)
                } else {
                    let l = leg.unwrap();
                    b.node(
                        sa,
                        Place::SubThread {
                            group: l.group,
                            after_leg: l.position - 1,
                        },
                        t,
                    )
                };
                let to = if last {
                    b.node(sa, Place::Airport(d), arr + inst.airports[d].min_turnaround)
                } else {
                    let l = leg.unwrap();
                    b.node(
                        sa,
                        Place::SubThread {
                            group: l.group,
                            after_leg: l.position,
                        },
                        transit,
                    )
                };
                b.arc(ArcKind::Flight, from, to, var);

                // Crew network.
                let from = if first {
                    let on = b.node(sc, Place::OnAircraft { airport: o, aircraft: a }, t);
                    let ground = b.node(sc, Place::Airport(o), t - state.crew_connection(o));
                    b.free_arc(ArcKind::Embark, ground, on);
                    on
                } else {
                    let l = leg.unwrap();
                    b.node(
                        sc,
                        Place::SubThread {
                            group: l.group,
                            after_leg: l.position - 1,
                        },
                        t,
                    )
                };
                let to = if last {
                    let on = b.node(sc, Place::OnAircraft { airport: d, aircraft: a }, arr);
                    let ground = b.node(sc, Place::Airport(d), arr);
                    b.free_arc(ArcKind::Disembark, on, ground);
                    on
                } else {
                    let l = leg.unwrap();
                    b.node(
                        sc,
                        Place::SubThread {
                            group: l.group,
                            after_leg: l.position,
                        },
                        transit,
                    )
                };
                b.arc(ArcKind::Flight, from, to, var);
            }
            (Entity::Maintenance(m), OptionKind::SucceedingMaintenance { airport, start }) => {
                let a = idx.maintenance_aircraft[m];
                let sa = aircraft_subnet[a];
                let dur = inst.maintenances[m].duration;
                let from = b.node(sa, Place::Airport(airport), start);
                let to = b.node(sa, Place::Airport(airport), start + dur);
                b.arc(ArcKind::Maintenance, from, to, ArcVar::Option(r));
            }
            (_, OptionKind::Canceled) if opts.debug => {
                b.arc(ArcKind::CancelVirtual, void, void, ArcVar::Option(r));
            }
            _ => {}
        }
    }

    // Every non-first leg option needs some previous-leg option on the same pair.
    for r in space.option_refs() {
        let g = &space.groups[r.group];
        if let (Entity::Flight(f), OptionKind::Scheduled { departure, aircraft, crew }) =
            (g.entity, g.options[r.option].kind)
        {
            if let Some(l) = idx.flight_leg[f] {
                if !l.is_first() {
                    let prev = idx.multileg_groups[l.group].legs[l.position - 1];
                    let ok = space.flight_group[prev].is_some_and(|pg| {
                        space.groups[pg].options.iter().any(|o| match o.kind {
                            OptionKind::Scheduled {
                                departure: pt,
                                aircraft: pa,
                                crew: pc,
                            } => {
                                pa == aircraft
                                    && pc == crew
                                    && pt + inst.flights[prev].duration + state.ground_time_after(prev)
                                        <= departure
                            }
                            _ => false,
                        })
                    });
                    if !ok {
                        return Err(TsnError::UnchainedOption {
                            entity: inst.flights[f].id.clone(),
                            option: r.option,
                        });
                    }
                }
            }
        }
    }

    // Sinks for failing maintenance.
    let mut sinks = vec![Vec::new(); inst.maintenances.len()];
    for (m, mt) in inst.maintenances.iter().enumerate() {
        let a = idx.maintenance_aircraft[m];
        let sa = aircraft_subnet[a];
        let latest = mt.latest_start();
        let mut from: Vec<usize> = (0..b.nodes.len())
            .filter(|&n| {
                let node = &b.nodes[n];
                node.subnet == Some(sa) && matches!(node.place, Place::Airport(_)) && node.time <= latest
            })
            .collect();
        if !from.contains(&input_node[a]) {
            from.push(input_node[a]);
        }
        for n in from {
            let arc = b.arc(ArcKind::Sink, n, void, ArcVar::Free);
            b.arcs[arc].maintenance = Some(m);
            sinks[m].push(arc);
        }
    }

    // Ground arcs.
    for (from, to) in ground_arc_pass(&b.nodes) {
        b.free_arc(ArcKind::Ground, from, to);
    }

    Ok(TimeSpaceNetwork {
        nodes: b.nodes,
        arcs: b.arcs,
        void,
        subnets,
        aircraft_subnet,
        crew_subnet,
        space: space.clone(),
        sinks,
    })
}

/// Links consecutive nodes at each position; ties in time fall back to
/// creation order.
pub fn ground_arc_pass(nodes: &[Node]) -> Vec<(usize, usize)> {
    let mut by_pos: HashMap<(usize, Place), Vec<usize>> = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if let Some(s) = n.subnet {
            by_pos.entry((s, n.place)).or_default().push(i);
        }
    }
    let mut keys: Vec<_> = by_pos.keys().copied().collect();
    keys.sort();
    let mut out = Vec::new();
    for k in keys {
        let mut list = by_pos.remove(&k).unwrap();
        list.sort_by_key(|&i| (nodes[i].time, i));
        for w in list.windows(2) {
            out.push((w[0], w[1]));
        }
    }
    out
}

impl TimeSpaceNetwork {
    pub fn option_count(&self) -> usize {
        self.space.option_count()
    }

    /// Arc ids per option, in arc order.
    pub fn option_arcs(&self) -> HashMap<OptionRef, Vec<usize>> {
        let mut out: HashMap<OptionRef, Vec<usize>> = HashMap::new();
        for (i, a) in self.arcs.iter().enumerate() {
            if let ArcVar::Option(r) = a.var {
                out.entry(r).or_default().push(i);
            }
        }
        out
    }

    pub fn size_bound_holds(&self) -> bool {
        self.arcs.len()
            <= ARCS_PER_OPTION * self.option_count() + 2 * self.nodes.len() + 2 * self.subnets.len()
    }

    /// Nodes reachable from an input arc through any arcs.
    pub fn reachable_nodes(&self) -> Vec<bool> {
        let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for a in &self.arcs {
            if a.from != self.void {
                out_arcs[a.from].push(a.to);
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self
            .arcs
            .iter()
            .filter(|a| a.kind == ArcKind::Input)
            .map(|a| a.to)
            .collect();
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            stack.extend(out_arcs[n].iter().copied().filter(|&m| m != self.void));
        }
        seen[self.void] = true;
        seen
    }

    pub fn resource_label(&self, state: &DisruptedState, subnet: usize) -> String {
        match self.subnets[subnet] {
            Resource::Aircraft(a) => state.instance.aircraft[a].id.clone(),
            Resource::Crew(c) => state.instance.crew_groups[c].id.clone(),
        }
    }

    /// Stable text dump of nodes and arcs.
    pub fn dump(&self, state: &DisruptedState) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let sub = n
                .subnet
                .map(|x| self.resource_label(state, x))
                .unwrap_or_else(|| "void".into());
            let _ = writeln!(s, "node {i} {sub} {} {} {:?}", place_label(state, n.place), n.time, n.balance);
        }
        for (i, a) in self.arcs.iter().enumerate() {
            let var = match a.var {
                ArcVar::Option(r) => format!("opt{}.{}", r.group, r.option),
                ArcVar::Free => format!("arc{i}"),
                ArcVar::Fixed => "1".into(),
            };
            let _ = writeln!(s, "arc {i} {} {} -> {} {var}", a.kind.as_str(), a.from, a.to);
        }
        s
    }
}

pub fn place_label(state: &DisruptedState, p: Place) -> String {
    let inst = &state.instance;
    match p {
        Place::Airport(a) => inst.airports[a].id.clone(),
        Place::OnAircraft { airport, aircraft } => {
            format!("{}@{}", inst.airports[airport].id, inst.aircraft[aircraft].id)
        }
        Place::SubThread { group, after_leg } => {
            format!("{}~{}", state.index.multileg_groups[group].id, after_leg)
        }
        Place::Void => "void".into(),
    }
}
