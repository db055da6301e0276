//! Seeded hub-and-spoke instance generator.
//!
//! Every aircraft flies closed tours out of its home hub (out-and-back pairs,
//! plus hub-spoke-spoke triangles for multi-leg flights), so the baseline is
//! feasible by construction. Crew duties split each rotation at a hub visit.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::*;

/// Relative weights of the disruption kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisruptionMix {
    pub delay: f64,
    pub cancellation: f64,
    pub unavailability: f64,
    pub slot_change: f64,
    pub closure: f64,
}

impl Default for DisruptionMix {
    fn default() -> Self {
        Self {
            delay: 0.55,
            cancellation: 0.1,
            unavailability: 0.15,
            slot_change: 0.1,
            closure: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub name: String,
    pub airports: usize,
    pub hubs: usize,
    pub slotted_airports: usize,
    pub aircraft: usize,
    pub crews: usize,
    pub flights: usize,
    pub multileg_groups: usize,
    pub maintenances: usize,
    pub slots: usize,
    pub itineraries: usize,
    /// Upper bound on passengers per itinerary.
    pub max_party: u32,
    pub disruptions: usize,
    pub mix: DisruptionMix,
    /// Share of used slots that are penalized when left unused.
    pub critical_slot_share: f64,
    /// Slots may not hold more departures than this.
    pub max_slot_capacity: Option<u32>,
    /// Booked share of seats per cabin.
    pub load_factor: f64,
    /// Extra ground time, duty slack and spare seats so passengers can be
    /// rerouted and schedules reshuffled.
    pub reroute_slack: bool,
    pub anchors: TimeAnchors,
    pub costs: CostCoefficients,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeneratorError {
    #[error("unsatisfiable generator shape: {0}")]
    Unsatisfiable(String),
}

impl GeneratorConfig {
    fn base(seed: u64, name: &str) -> Self {
        Self {
            seed,
            name: format!("{name}-{seed}"),
            airports: 4,
            hubs: 1,
            slotted_airports: 1,
            aircraft: 2,
            crews: 3,
            flights: 8,
            multileg_groups: 1,
            maintenances: 1,
            slots: 12,
            itineraries: 10,
            max_party: 40,
            disruptions: 2,
            mix: DisruptionMix::default(),
            critical_slot_share: 0.1,
            max_slot_capacity: None,
            load_factor: 0.8,
            reroute_slack: false,
            anchors: TimeAnchors {
                current_time: 420,
                recovery_start: 450,
                recovery_finish: 1320,
                max_delay: 180,
            },
            costs: CostCoefficients::default(),
        }
    }

    pub fn tiny(seed: u64) -> Self {
        Self::base(seed, "tiny")
    }

    pub fn small(seed: u64) -> Self {
        Self {
            airports: 6,
            slotted_airports: 2,
            aircraft: 4,
            crews: 7,
            flights: 20,
            slots: 40,
            itineraries: 30,
            disruptions: 4,
            ..Self::base(seed, "small")
        }
    }

    pub fn medium(seed: u64) -> Self {
        Self {
            airports: 12,
            hubs: 2,
            slotted_airports: 6,
            aircraft: 12,
            crews: 22,
            flights: 80,
            multileg_groups: 2,
            maintenances: 2,
            slots: 200,
            itineraries: 200,
            disruptions: 10,
            ..Self::base(seed, "medium")
        }
    }

    /// Entity counts of the largest published instance.
    pub fn a01(seed: u64) -> Self {
        Self {
            airports: 35,
            hubs: 3,
            slotted_airports: 25,
            aircraft: 85,
            crews: 162,
            flights: 608,
            multileg_groups: 4,
            maintenances: 3,
            slots: 1478,
            itineraries: 1500,
            max_party: 55,
            disruptions: 63,
            ..Self::base(seed, "a01")
        }
    }

    /// Preset by tier name.
    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name {
            "tiny" => Some(Self::tiny(seed)),
            "small" => Some(Self::small(seed)),
            "medium" => Some(Self::medium(seed)),
            "a01" | "large" => Some(Self::a01(seed)),
            _ => None,
        }
    }

    pub fn with_reroute_slack(mut self) -> Self {
        self.reroute_slack = true;
        self.load_factor = 0.55;
        self.mix = DisruptionMix {
            delay: 0.3,
            cancellation: 0.2,
            unavailability: 0.4,
            slot_change: 0.05,
            closure: 0.05,
        };
        self
    }
}

fn ceil_div(a: Minutes, b: Minutes) -> Minutes {
    (a + b - 1).div_euclid(b)
}

fn r5(x: Minutes) -> Minutes {
    x.div_euclid(5) * 5
}

struct Tour {
    /// Airports visited after the hub, in order; the last is the hub again.
    stops: Vec<usize>,
    multileg: bool,
}

struct Gen<'a> {
    cfg: &'a GeneratorConfig,
    rng: ChaCha8Rng,
    coords: Vec<(f64, f64)>,
}

impl Gen<'_> {
    fn duration(&self, a: usize, b: usize) -> Minutes {
        let (x1, y1) = self.coords[a];
        let (x2, y2) = self.coords[b];
        let d = ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt();
        r5(35 + (d / 7.0) as Minutes).clamp(40, 180)
    }

    fn slack(&mut self) -> Minutes {
        let hi = if self.cfg.reroute_slack { 40 } else { 25 };
        r5(self.rng.random_range(0..=hi))
    }
}

pub fn generate_instance(cfg: &GeneratorConfig) -> Result<ProblemInstance, GeneratorError> {
    let bad = |m: &str| Err(GeneratorError::Unsatisfiable(m.to_string()));
    if cfg.airports < 2 || cfg.hubs == 0 || cfg.hubs >= cfg.airports {
        return bad("need at least one hub and one spoke");
    }
    if cfg.aircraft == 0 || cfg.flights < 2 * cfg.aircraft + cfg.multileg_groups {
        return bad("every aircraft needs at least one tour");
    }
    if cfg.crews < cfg.aircraft {
        return bad("fewer crew groups than aircraft");
    }
    let triangles_plain = (cfg.flights - 3 * cfg.multileg_groups) % 2;
    if cfg.multileg_groups + triangles_plain > cfg.aircraft || cfg.maintenances > cfg.aircraft {
        return bad("at most one multi-leg flight and one maintenance per aircraft");
    }
    if cfg.slotted_airports > cfg.airports || (cfg.slotted_airports > 0 && cfg.slots < cfg.slotted_airports) {
        return bad("slot counts do not fit the airports");
    }

    let mut g = Gen {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        coords: Vec::new(),
    };
    let anchors = cfg.anchors;

    // Airports: hubs near the centre, spokes around them.
    let mut airports = Vec::new();
    for i in 0..cfg.airports {
        let (x, y) = if i < cfg.hubs {
            (g.rng.random_range(350.0..650.0), g.rng.random_range(350.0..650.0))
        } else {
            (g.rng.random_range(0.0..1000.0), g.rng.random_range(0.0..1000.0))
        };
        g.coords.push((x, y));
        let turnaround = r5(g.rng.random_range(30..=45));
        airports.push(Airport {
            id: format!("AP{:02}", i + 1),
            min_turnaround: turnaround,
            min_transit: r5(g.rng.random_range(20..=30)).min(turnaround),
            min_crew_connection: r5(g.rng.random_range(30..=45)),
            min_pax_connection: r5(g.rng.random_range(30..=45)),
        });
    }
    let nearest_hub = |g: &Gen, s: usize| {
        (0..cfg.hubs)
            .min_by(|&a, &b| g.duration(s, a).cmp(&g.duration(s, b)).then(a.cmp(&b)))
            .unwrap()
    };
    let mut spokes: Vec<Vec<usize>> = vec![Vec::new(); cfg.hubs];
    for s in cfg.hubs..cfg.airports {
        spokes[nearest_hub(&g, s)].push(s);
    }
    let destinations = |h: usize| -> Vec<usize> {
        if spokes[h].is_empty() {
            (0..cfg.airports).filter(|&a| a != h).collect()
        } else {
            spokes[h].clone()
        }
    };

    // Tours per aircraft.
    let pairs = (cfg.flights - 3 * cfg.multileg_groups - 3 * triangles_plain) / 2;
    let n_tours = pairs + cfg.multileg_groups + triangles_plain;
    let mut tour_count = vec![n_tours / cfg.aircraft; cfg.aircraft];
    for c in tour_count.iter_mut().take(n_tours % cfg.aircraft) {
        *c += 1;
    }
    let home: Vec<usize> = (0..cfg.aircraft).map(|a| a % cfg.hubs).collect();
    let mut plans: Vec<Vec<Tour>> = Vec::new();
    for a in 0..cfg.aircraft {
        let h = home[a];
        let dests = destinations(h);
        let mut tours = Vec::new();
        for _ in 0..tour_count[a] {
            let s = *dests.choose(&mut g.rng).unwrap();
            tours.push(Tour {
                stops: vec![s, h],
                multileg: false,
            });
        }
        plans.push(tours);
    }
    let mut triangle_aircraft: Vec<usize> = (0..cfg.aircraft).collect();
    triangle_aircraft.shuffle(&mut g.rng);
    for (k, &a) in triangle_aircraft
        .iter()
        .take(cfg.multileg_groups + triangles_plain)
        .enumerate()
    {
        let h = home[a];
        let dests = destinations(h);
        let s1 = *dests.choose(&mut g.rng).unwrap();
        let others: Vec<usize> = (0..cfg.airports).filter(|&x| x != h && x != s1).collect();
        let near: Vec<usize> = dests.iter().copied().filter(|&x| x != s1).collect();
        let s2 = *near.choose(&mut g.rng).or(others.choose(&mut g.rng)).unwrap();
        // Keep the triangle off the first tour so it starts after the current time.
        let pos = (plans[a].len() / 2).min(plans[a].len() - 1);
        plans[a][pos] = Tour {
            stops: vec![s1, s2, h],
            multileg: k < cfg.multileg_groups,
        };
    }

    let mut maint_aircraft: Vec<usize> = (0..cfg.aircraft).collect();
    maint_aircraft.shuffle(&mut g.rng);
    maint_aircraft.truncate(cfg.maintenances);

    // Timetable.
    let mut flights = Vec::new();
    let mut aircraft = Vec::new();
    let mut crew_groups = Vec::new();
    let mut maintenances = Vec::new();
    let mut duties_left = cfg.crews - cfg.aircraft;
    let mut group_no = 0;
    for a in 0..cfg.aircraft {
        let h = home[a];
        let ac_id = format!("AC{:03}", a + 1);
        let mut t = r5(g.rng.random_range(300..=360));
        aircraft.push(Aircraft {
            id: ac_id.clone(),
            initial_position: airports[h].id.clone(),
            available_from: t - r5(g.rng.random_range(0..=30)),
        });
        let tours = &plans[a];
        let split = if tours.len() >= 2 && duties_left > 0 {
            duties_left -= 1;
            Some(tours.len() / 2)
        } else {
            None
        };
        let maint_after = maint_aircraft
            .iter()
            .position(|&m| m == a)
            .map(|_| tours.len().div_ceil(2));
        // (crew index, flight ids, minutes flown, first departure)
        let mut duty_flights: Vec<(usize, Minutes, Minutes)> = Vec::new();
        let mut crew_of_tour = Vec::new();
        let first_crew = crew_groups.len();
        let n_duties = if split.is_some() { 2 } else { 1 };
        for d in 0..n_duties {
            crew_groups.push(CrewGroup {
                id: format!("CR{:03}", first_crew + d + 1),
                initial_position: airports[h].id.clone(),
                available_from: 0,
                flight_time_limit: 0,
            });
            duty_flights.push((0, 0, Minutes::MAX));
        }
        for k in 0..=tours.len() {
            if maint_after == Some(k) {
                let m = maintenances.len();
                let duration = 60 + 30 * g.rng.random_range(0..=3);
                let earliest = t - r5(g.rng.random_range(0..=30));
                let latest = t + r5(g.rng.random_range(30..=90));
                maintenances.push(Maintenance {
                    id: format!("MX{:02}", m + 1),
                    aircraft: ac_id.clone(),
                    duration,
                    allowed_windows: vec![MaintenanceWindow {
                        airport: airports[h].id.clone(),
                        earliest_start: earliest,
                        latest_start: latest,
                    }],
                    fail_penalty: 3.0 * cfg.costs.cancellation_per_flight,
                });
                t += duration + 30 + g.slack();
            }
            let Some(tour) = tours.get(k) else { break };
            let duty = match split {
                Some(s) if k >= s => 1,
                _ => 0,
            };
            crew_of_tour.push(duty);
            let crew_id = crew_groups[first_crew + duty].id.clone();
            let group = if tour.multileg {
                group_no += 1;
                t = t.max(anchors.current_time + 15);
                Some(format!("ML{group_no:02}"))
            } else {
                None
            };
            let mut at = h;
            for (leg, &next) in tour.stops.iter().enumerate() {
                let dur = g.duration(at, next);
                let id = format!("FL{:04}", flights.len() + 1);
                let in_group = group.is_some() && leg + 1 < tour.stops.len();
                flights.push(Flight {
                    id,
                    origin: airports[at].id.clone(),
                    destination: airports[next].id.clone(),
                    sched_departure: t,
                    duration: dur,
                    original_aircraft: ac_id.clone(),
                    original_crew: crew_id.clone(),
                    multileg_group: if in_group { group.clone() } else { None },
                    leg_index: if in_group { leg as u32 } else { 0 },
                    seats: SeatCapacity::default(),
                });
                let e = &mut duty_flights[duty];
                e.1 += dur;
                e.2 = e.2.min(t);
                let ground = if in_group && leg + 2 < tour.stops.len() {
                    airports[next].min_transit + r5(g.rng.random_range(0..=10))
                } else {
                    airports[next].min_turnaround + g.slack()
                };
                t += dur + ground;
                at = next;
            }
        }
        // Seats per aircraft.
        let seats = SeatCapacity {
            economy: 10 * g.rng.random_range(12..=18),
            premium: if g.rng.random_bool(0.6) { 12 } else { 0 },
            business: 4 * g.rng.random_range(0..=4),
        };
        for f in flights.iter_mut().filter(|f| f.original_aircraft == ac_id) {
            f.seats = seats;
        }
        let extra = if cfg.reroute_slack { 120 } else { 0 };
        for (d, &(_, flown, first)) in duty_flights.iter().enumerate() {
            let c = &mut crew_groups[first_crew + d];
            let conn = airports[h].min_crew_connection;
            c.available_from = (first - conn - r5(g.rng.random_range(0..=60))).max(0);
            c.flight_time_limit = flown + r5(g.rng.random_range(60..=180)) + extra;
        }
    }
    for i in crew_groups.len()..cfg.crews {
        let h = i % cfg.hubs;
        crew_groups.push(CrewGroup {
            id: format!("CR{:03}", i + 1),
            initial_position: airports[h].id.clone(),
            available_from: anchors.current_time - 60,
            flight_time_limit: 480,
        });
    }

    // Slots tile the day at the busiest airports.
    let mut departures = vec![0usize; cfg.airports];
    for f in &flights {
        departures[airports.iter().position(|a| a.id == f.origin).unwrap()] += 1;
    }
    let mut by_traffic: Vec<usize> = (0..cfg.airports).collect();
    by_traffic.sort_by_key(|&a| (usize::MAX - departures[a], a));
    let last_dep = flights.iter().map(|f| f.sched_departure).max().unwrap_or(0);
    let span_end = ceil_div(last_dep.max(anchors.recovery_finish) + anchors.max_delay + 60, 60) * 60;
    let span_start = 240;
    let mut slots = Vec::new();
    let slotted: Vec<usize> = by_traffic.into_iter().take(cfg.slotted_airports).collect();
    for (k, &ap) in slotted.iter().enumerate() {
        let n = cfg.slots / cfg.slotted_airports + usize::from(k < cfg.slots % cfg.slotted_airports);
        let len = ceil_div(span_end - span_start, n as Minutes).max(1);
        for i in 0..n as Minutes {
            let w = Window::new(span_start + i * len, span_start + (i + 1) * len);
            let used = flights
                .iter()
                .filter(|f| f.origin == airports[ap].id && w.contains(f.sched_departure))
                .count() as u32;
            if cfg.max_slot_capacity.is_some_and(|m| used > m) {
                return Err(GeneratorError::Unsatisfiable(format!(
                    "{used} departures at {} in [{}, {}) exceed the slot capacity limit",
                    airports[ap].id, w.start, w.end
                )));
            }
            let critical = used > 0 && g.rng.random_bool(cfg.critical_slot_share);
            let (capacity, penalty) = if critical {
                (used, 50.0 * g.rng.random_range(2..=8) as f64)
            } else {
                let cap = used + g.rng.random_range(0..=2);
                (cfg.max_slot_capacity.map_or(cap, |m| cap.min(m)), 0.0)
            };
            slots.push(Slot {
                id: format!("SL{:04}", slots.len() + 1),
                airport: airports[ap].id.clone(),
                window: w,
                capacity,
                nonuse_penalty: penalty,
            });
        }
    }

    let itineraries = generate_itineraries(&mut g, &airports, &flights, cfg);
    let mut inst = ProblemInstance {
        name: cfg.name.clone(),
        anchors,
        costs: cfg.costs.clone(),
        airports,
        aircraft,
        crew_groups,
        flights,
        maintenances,
        slots,
        itineraries,
        disruptions: Vec::new(),
    };
    inst.disruptions = generate_disruptions(&mut g, &inst, &spokes);
    Ok(inst)
}

fn generate_itineraries(
    g: &mut Gen,
    airports: &[Airport],
    flights: &[Flight],
    cfg: &GeneratorConfig,
) -> Vec<Itinerary> {
    let mut out = Vec::new();
    if flights.is_empty() {
        return out;
    }
    let ap = |id: &str| airports.iter().position(|a| a.id == id).unwrap();
    let is_hub = |id: &str| ap(id) < cfg.hubs;
    let mut load: Vec<SeatCapacity> = vec![SeatCapacity::default(); flights.len()];
    let cap = |f: usize, c: CabinClass| (flights[f].seats.get(c) as f64 * cfg.load_factor) as u32;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, f) in flights.iter().enumerate() {
        if let Some(gid) = &f.multileg_group {
            match groups.iter_mut().find(|g| flights[g[0]].multileg_group.as_ref() == Some(gid)) {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
    }
    let mut attempts = 0;
    while out.len() < cfg.itineraries && attempts < cfg.itineraries * 20 {
        attempts += 1;
        let roll: f64 = g.rng.random();
        let f = g.rng.random_range(0..flights.len());
        let legs: Vec<usize> = if roll < 0.1 && !groups.is_empty() {
            groups.choose(&mut g.rng).unwrap().clone()
        } else if roll < 0.4 && is_hub(&flights[f].destination) {
            let arr = flights[f].sched_arrival();
            let mct = airports[ap(&flights[f].destination)].min_pax_connection;
            let next: Vec<usize> = (0..flights.len())
                .filter(|&n| {
                    let fl = &flights[n];
                    fl.origin == flights[f].destination
                        && fl.destination != flights[f].origin
                        && fl.multileg_group.is_none()
                        && fl.sched_departure >= arr + mct
                        && fl.sched_departure <= arr + 240
                })
                .collect();
            match next.choose(&mut g.rng) {
                Some(&n) => vec![f, n],
                None => vec![f],
            }
        } else {
            vec![f]
        };
        let r: f64 = g.rng.random();
        let mut cabin = if r < 0.8 {
            CabinClass::Economy
        } else if r < 0.92 {
            CabinClass::Premium
        } else {
            CabinClass::Business
        };
        if legs.iter().any(|&l| flights[l].seats.get(cabin) == 0) {
            cabin = CabinClass::Economy;
        }
        let room = legs
            .iter()
            .map(|&l| cap(l, cabin).saturating_sub(load[l].get(cabin)))
            .min()
            .unwrap_or(0);
        if room == 0 {
            continue;
        }
        let pax = g.rng.random_range(1..=cfg.max_party.min(room));
        for &l in &legs {
            *load[l].get_mut(cabin) += pax;
        }
        out.push(Itinerary {
            id: format!("IT{:05}", out.len() + 1),
            passenger_count: pax,
            legs: legs
                .iter()
                .map(|&l| ItineraryLeg {
                    flight: flights[l].id.clone(),
                    cabin,
                })
                .collect(),
            cancellation_cost: None,
            downgrade_cost: None,
            delay_cost: None,
        });
    }
    out
}

fn generate_disruptions(g: &mut Gen, inst: &ProblemInstance, spokes: &[Vec<usize>]) -> Vec<Disruption> {
    let cfg = g.cfg;
    let a = inst.anchors;
    let m = &cfg.mix;
    let weights = [m.delay, m.cancellation, m.unavailability, m.slot_change, m.closure];
    let Ok(dist) = WeightedIndex::new(weights) else {
        return Vec::new();
    };
    let mut used_flights = std::collections::HashSet::new();
    let mut used_slots = std::collections::HashSet::new();
    let open: Vec<usize> = (0..inst.flights.len())
        .filter(|&f| {
            let d = inst.flights[f].sched_departure;
            d >= a.current_time && d <= a.recovery_finish
        })
        .collect();
    let spoke_list: Vec<usize> = spokes.iter().flatten().copied().collect();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < cfg.disruptions && attempts < cfg.disruptions * 20 {
        attempts += 1;
        let kind = dist.sample(&mut g.rng);
        let pick_flight = |g: &mut Gen, used: &std::collections::HashSet<usize>| {
            let free: Vec<usize> = open.iter().copied().filter(|f| !used.contains(f)).collect();
            free.choose(&mut g.rng).copied()
        };
        let d = match kind {
            0 => {
                let Some(f) = pick_flight(g, &used_flights) else { continue };
                let minutes = r5(g.rng.random_range(15..=120));
                if inst.flights[f].sched_departure + minutes > a.recovery_finish {
                    continue;
                }
                used_flights.insert(f);
                Disruption::FlightDelay {
                    target: inst.flights[f].id.clone(),
                    minutes,
                }
            }
            1 => {
                let Some(f) = pick_flight(g, &used_flights) else { continue };
                used_flights.insert(f);
                Disruption::FlightCancellation {
                    target: inst.flights[f].id.clone(),
                }
            }
            2 => {
                let ac = g.rng.random_range(0..inst.aircraft.len());
                let start = r5(g.rng.random_range(a.current_time..a.current_time + 400));
                let len = r5(g.rng.random_range(60..=240));
                Disruption::AircraftUnavailability {
                    target: inst.aircraft[ac].id.clone(),
                    window: Window::new(start, start + len),
                }
            }
            3 => {
                let free: Vec<usize> = (0..inst.slots.len())
                    .filter(|&s| {
                        !used_slots.contains(&s)
                            && inst.slots[s].capacity > 0
                            && inst.slots[s].window.start >= a.current_time
                    })
                    .collect();
                let Some(&s) = free.choose(&mut g.rng) else { continue };
                used_slots.insert(s);
                Disruption::SlotChange {
                    target: inst.slots[s].id.clone(),
                    capacity: inst.slots[s].capacity - 1,
                }
            }
            _ => {
                let Some(&p) = spoke_list.choose(&mut g.rng) else { continue };
                let start = r5(g.rng.random_range(a.current_time..a.current_time + 500));
                let len = r5(g.rng.random_range(30..=120));
                Disruption::AirportClosure {
                    target: inst.airports[p].id.clone(),
                    window: Window::new(start, start + len),
                }
            }
        };
        out.push(d);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        for cfg in [GeneratorConfig::tiny(1), GeneratorConfig::medium(1)] {
            let a = serde_json::to_string(&generate_instance(&cfg).unwrap()).unwrap();
            let b = serde_json::to_string(&generate_instance(&cfg).unwrap()).unwrap();
            assert_eq!(a, b);
        }
        let a = generate_instance(&GeneratorConfig::small(1)).unwrap();
        let b = generate_instance(&GeneratorConfig::small(2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn presets_are_valid() {
        for seed in 0..20 {
            for cfg in [
                GeneratorConfig::tiny(seed),
                GeneratorConfig::small(seed),
                GeneratorConfig::medium(seed),
                GeneratorConfig::small(seed).with_reroute_slack(),
            ] {
                let inst = generate_instance(&cfg).unwrap();
                let d = validate_instance(&inst);
                assert!(d.is_empty(), "{} {:?}", cfg.name, d);
                assert_eq!(inst.flights.len(), cfg.flights);
                assert_eq!(inst.crew_groups.len(), cfg.crews);
                assert_eq!(inst.disruptions.len(), cfg.disruptions, "{}", cfg.name);
            }
        }
    }

    #[test]
    fn a01_counts() {
        let cfg = GeneratorConfig::a01(1);
        let inst = generate_instance(&cfg).unwrap();
        assert_eq!(inst.airports.len(), 35);
        assert_eq!(
            inst.slots
                .iter()
                .map(|s| s.airport.as_str())
                .collect::<std::collections::HashSet<_>>()
                .len(),
            25
        );
        assert_eq!(inst.aircraft.len(), 85);
        assert_eq!(inst.crew_groups.len(), 162);
        assert_eq!(inst.flights.len(), 608);
        assert_eq!(InstanceIndex::build(&inst).unwrap().multileg_groups.len(), 4);
        assert_eq!(inst.disruptions.len(), 63);
        assert_eq!(inst.maintenances.len(), 3);
        assert_eq!(inst.slots.len(), 1478);
        assert!(validate_instance(&inst).is_empty(), "{:?}", validate_instance(&inst));
    }

    #[test]
    fn no_disruptions_means_baseline() {
        let mut cfg = GeneratorConfig::small(4);
        cfg.disruptions = 0;
        let inst = generate_instance(&cfg).unwrap();
        let state = apply_disruptions(&inst).unwrap();
        assert_eq!(state, DisruptedState::undisrupted(&inst).unwrap());
        assert!(check_feasibility(&state.baseline, &state).is_empty());
    }

    #[test]
    fn slot_cap_too_small_is_unsatisfiable() {
        let mut cfg = GeneratorConfig::medium(3);
        cfg.slots = cfg.slotted_airports;
        cfg.max_slot_capacity = Some(1);
        assert!(matches!(generate_instance(&cfg), Err(GeneratorError::Unsatisfiable(_))));
    }

    #[test]
    fn rejects_impossible_shapes() {
        let mut cfg = GeneratorConfig::tiny(1);
        cfg.crews = 1;
        assert!(generate_instance(&cfg).is_err());
        let mut cfg = GeneratorConfig::tiny(1);
        cfg.flights = 3;
        assert!(generate_instance(&cfg).is_err());
    }
}
