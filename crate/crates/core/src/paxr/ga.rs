//! Mutation-only genetic search over schedule variants, scored by operating
//! cost plus passenger cost.

use std::time::{Duration, Instant};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assign::{assign_itineraries, PaxConfig};
use super::PassengerAssignment;
use crate::model::{
    check_feasibility, operating_cost, DisruptedState, FlightDisposition, FlightStatus, MaintenanceDisposition,
    Minutes, RecoverySchedule,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub parents: usize,
    /// Wall-clock budget; `None` runs until `max_generations`.
    pub budget: Option<Duration>,
    pub max_generations: Option<usize>,
    pub seed: u64,
    /// Rayon workers for offspring evaluation; 0 uses the global pool.
    pub workers: usize,
    pub max_attempts: usize,
    /// Step of the delay-shift mutation.
    pub delay_step: Minutes,
    pub pax: PaxConfig,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            parents: 30,
            budget: Some(Duration::from_secs(240)),
            max_generations: None,
            seed: 0,
            workers: 0,
            max_attempts: 20,
            delay_step: 15,
            pax: PaxConfig::default(),
        }
    }
}

impl GaConfig {
    fn zero_budget(&self) -> bool {
        self.budget == Some(Duration::ZERO) || self.max_generations == Some(0)
    }
}

/// One change relative to the schedule it was applied to. Flight indices
/// refer to the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mutation {
    Shift { flights: Vec<usize>, delta: Minutes },
    SwapAircraft { a: usize, b: usize, from: Minutes },
    SwapCrew { a: usize, b: usize, from: Minutes },
    Uncancel { flights: Vec<usize> },
    Cancel { flights: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub schedule: RecoverySchedule,
    /// Mutations applied since the baseline, oldest first.
    pub mutations: Vec<Mutation>,
    pub assignment: PassengerAssignment,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub best: Individual,
    /// Fitness of the baseline with its greedy assignment.
    pub initial_fitness: f64,
    pub generations: usize,
    pub trace: Vec<GenerationStats>,
    pub elapsed: Duration,
}

/// Scores a schedule: greedy passenger assignment, then operating plus
/// passenger cost.
pub fn score(state: &DisruptedState, schedule: RecoverySchedule, mutations: Vec<Mutation>, cfg: &PaxConfig) -> Individual {
    let assignment = assign_itineraries(state, &schedule, cfg);
    let fitness = operating_cost(state, &schedule) + assignment.cost.total();
    Individual {
        schedule,
        mutations,
        assignment,
        fitness,
    }
}

pub fn evolve(state: &DisruptedState, baseline: &RecoverySchedule, cfg: &GaConfig) -> GaResult {
    evolve_with(state, baseline, cfg, |_, _| {})
}

/// Runs the search; `observe` sees the population after every generation,
/// generation 0 being the initial one.
pub fn evolve_with(
    state: &DisruptedState,
    baseline: &RecoverySchedule,
    cfg: &GaConfig,
    mut observe: impl FnMut(usize, &[Individual]),
) -> GaResult {
    let started = Instant::now();
    let seed_ind = score(state, baseline.clone(), Vec::new(), &cfg.pax);
    let initial_fitness = seed_ind.fitness;
    if cfg.zero_budget() {
        observe(0, std::slice::from_ref(&seed_ind));
        return GaResult {
            best: seed_ind,
            initial_fitness,
            generations: 0,
            trace: vec![GenerationStats {
                generation: 0,
                best: initial_fitness,
                mean: initial_fitness,
                elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            }],
            elapsed: started.elapsed(),
        };
    }

    let pool = (cfg.workers > 0).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .expect("thread pool")
    });
    let run = |jobs: Vec<(usize, u64)>, parents: &[Individual]| -> Vec<Individual> {
        let work = || {
            jobs.par_iter()
                .map(|&(p, seed)| offspring(state, &parents[p], seed, cfg))
                .collect::<Vec<_>>()
        };
        match &pool {
            Some(pool) => pool.install(work),
            None => work(),
        }
    };

    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pop_size = cfg.population.max(1);
    let jobs: Vec<(usize, u64)> = (1..pop_size).map(|_| (0, master.random())).collect();
    let mut population = vec![seed_ind];
    let founders = run(jobs, &population);
    population.extend(founders);
    sort_population(&mut population);
    observe(0, &population);
    let mut trace = vec![stats(0, &population, started)];

    let mut generation = 0;
    loop {
        if cfg.max_generations.is_some_and(|g| generation >= g) {
            break;
        }
        if cfg.budget.is_some_and(|b| started.elapsed() >= b) {
            break;
        }
        if cfg.budget.is_none() && cfg.max_generations.is_none() {
            break;
        }
        generation += 1;
        // Linear ranking: weight n - rank.
        let n = population.len();
        let weights: Vec<usize> = (0..n).map(|i| n - i).collect();
        let pick = WeightedIndex::new(&weights).expect("non-empty population");
        let jobs: Vec<(usize, u64)> = (0..cfg.parents)
            .map(|_| (pick.sample(&mut master), master.random()))
            .collect();
        let children = run(jobs, &population);
        population.extend(children);
        sort_population(&mut population);
        population.truncate(pop_size);
        observe(generation, &population);
        trace.push(stats(generation, &population, started));
    }

    GaResult {
        best: population.swap_remove(0),
        initial_fitness,
        generations: generation,
        trace,
        elapsed: started.elapsed(),
    }
}

/// Stable sort by fitness; earlier individuals win ties.
fn sort_population(pop: &mut [Individual]) {
    pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

fn stats(generation: usize, pop: &[Individual], started: Instant) -> GenerationStats {
    GenerationStats {
        generation,
        best: pop[0].fitness,
        mean: pop.iter().map(|i| i.fitness).sum::<f64>() / pop.len() as f64,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

fn offspring(state: &DisruptedState, parent: &Individual, seed: u64, cfg: &GaConfig) -> Individual {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mutate(state, &parent.schedule, &parent.assignment, &mut rng, cfg) {
        Some((schedule, m)) => {
            let mut mutations = parent.mutations.clone();
            mutations.push(m);
            score(state, schedule, mutations, &cfg.pax)
        }
        None => parent.clone(),
    }
}

/// One feasibility-preserving mutation, resampled up to `max_attempts` times.
pub fn mutate(
    state: &DisruptedState,
    schedule: &RecoverySchedule,
    pax: &PassengerAssignment,
    rng: &mut impl Rng,
    cfg: &GaConfig,
) -> Option<(RecoverySchedule, Mutation)> {
    for _ in 0..cfg.max_attempts.max(1) {
        let proposal = match rng.random_range(0..4) {
            0 => shift(state, schedule, rng, cfg.delay_step),
            1 => swap(state, schedule, rng),
            2 => uncancel(state, schedule, rng, cfg.delay_step),
            _ => cancel_low_load(state, schedule, pax, rng),
        };
        let Some((mut next, m)) = proposal else { continue };
        repair_maintenance(state, &mut next);
        if check_feasibility(&next, state).is_empty() {
            return Some((next, m));
        }
    }
    None
}

/// Whole multi-leg group of `f`, or `[f]`.
fn unit(state: &DisruptedState, f: usize) -> Vec<usize> {
    match state.index.flight_leg[f] {
        Some(l) => state.index.multileg_groups[l.group].legs.clone(),
        None => vec![f],
    }
}

fn open(state: &DisruptedState, f: usize) -> bool {
    state.flights[f].status == FlightStatus::Open && !state.flights[f].removed
}

fn shift(
    state: &DisruptedState,
    schedule: &RecoverySchedule,
    rng: &mut impl Rng,
    step: Minutes,
) -> Option<(RecoverySchedule, Mutation)> {
    let cands: Vec<usize> = (0..schedule.flights.len())
        .filter(|&f| open(state, f) && schedule.flights[f].is_scheduled())
        .collect();
    let &f = cands.choose(rng)?;
    let mut k = rng.random_range(-4..=3);
    if k >= 0 {
        k += 1;
    }
    let delta = k * step.max(1);
    let flights = unit(state, f);
    let mut next = schedule.clone();
    for &g in &flights {
        if let FlightDisposition::Scheduled { departure, .. } = &mut next.flights[g] {
            let t = *departure + delta;
            // Snap to the earliest legal time when shifting into the pre-recovery gap.
            *departure = if t < state.instance.anchors.recovery_start && t != state.flights[g].departure {
                state.instance.anchors.recovery_start
            } else {
                t
            };
        }
    }
    Some((next, Mutation::Shift { flights, delta }))
}

/// Exchanges the tails of two rotations (or crew sequences) from a time on.
fn swap(state: &DisruptedState, schedule: &RecoverySchedule, rng: &mut impl Rng) -> Option<(RecoverySchedule, Mutation)> {
    let aircraft = rng.random_bool(0.5);
    let n = if aircraft {
        state.instance.aircraft.len()
    } else {
        state.instance.crew_groups.len()
    };
    if n < 2 {
        return None;
    }
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let seq = if aircraft {
        state.rotation(a, schedule)
    } else {
        state.crew_sequence(a, schedule)
    };
    let open_seq: Vec<usize> = seq.into_iter().filter(|&f| open(state, f)).collect();
    let &pivot = open_seq.choose(rng)?;
    let from = schedule.flights[pivot].departure()?;
    let mut next = schedule.clone();
    for (f, d) in schedule.flights.iter().enumerate() {
        let FlightDisposition::Scheduled {
            departure,
            aircraft: ac,
            crew,
        } = *d
        else {
            continue;
        };
        if departure < from || !open(state, f) {
            continue;
        }
        let who = if aircraft { ac } else { crew };
        let to = if who == a {
            b
        } else if who == b {
            a
        } else {
            continue;
        };
        next.flights[f] = if aircraft {
            FlightDisposition::Scheduled {
                departure,
                aircraft: to,
                crew,
            }
        } else {
            FlightDisposition::Scheduled {
                departure,
                aircraft: ac,
                crew: to,
            }
        };
    }
    let m = if aircraft {
        Mutation::SwapAircraft { a, b, from }
    } else {
        Mutation::SwapCrew { a, b, from }
    };
    Some((next, m))
}

/// Restores a canceled flight, with its return leg when it leaves the
/// aircraft elsewhere, on the original resources.
fn uncancel(
    state: &DisruptedState,
    schedule: &RecoverySchedule,
    rng: &mut impl Rng,
    step: Minutes,
) -> Option<(RecoverySchedule, Mutation)> {
    let inst = &state.instance;
    let idx = &state.index;
    let cands: Vec<usize> = (0..schedule.flights.len())
        .filter(|&f| {
            !schedule.flights[f].is_scheduled()
                && state.flights[f].is_decision()
                && idx.flight_leg[f].is_none_or(|l| l.is_first())
        })
        .collect();
    let &f = cands.choose(rng)?;
    let mut flights = unit(state, f);
    let last = *flights.last().unwrap();
    let home = idx.flight_origin[f];
    if idx.flight_destination[last] != home {
        // The next canceled flight of the same aircraft back to the origin.
        let back = (0..schedule.flights.len())
            .filter(|&g| {
                !schedule.flights[g].is_scheduled()
                    && state.flights[g].is_decision()
                    && idx.flight_aircraft[g] == idx.flight_aircraft[f]
                    && idx.flight_origin[g] == idx.flight_destination[last]
                    && idx.flight_destination[g] == home
                    && state.flights[g].departure > state.flights[last].departure
                    && idx.flight_leg[g].is_none()
            })
            .min_by_key(|&g| state.flights[g].departure);
        flights.extend(back);
    }
    let extra = if state.flights[f].status == FlightStatus::Open {
        rng.random_range(0..4) * step.max(1)
    } else {
        0
    };
    let mut next = schedule.clone();
    for &g in &flights {
        let mut t = state.flights[g].departure;
        if state.flights[g].status == FlightStatus::Open {
            t += extra;
            if t != state.flights[g].departure && t < inst.anchors.recovery_start {
                t = inst.anchors.recovery_start;
            }
        }
        next.flights[g] = FlightDisposition::Scheduled {
            departure: t,
            aircraft: idx.flight_aircraft[g],
            crew: idx.flight_crew[g],
        };
    }
    Some((next, Mutation::Uncancel { flights }))
}

/// Cancels the least loaded of three sampled flights together with the next
/// flight of its rotation when that one flies straight back.
fn cancel_low_load(
    state: &DisruptedState,
    schedule: &RecoverySchedule,
    pax: &PassengerAssignment,
    rng: &mut impl Rng,
) -> Option<(RecoverySchedule, Mutation)> {
    let idx = &state.index;
    let cands: Vec<usize> = (0..schedule.flights.len())
        .filter(|&f| schedule.flights[f].is_scheduled() && state.flights[f].is_decision())
        .collect();
    if cands.is_empty() {
        return None;
    }
    let loads = pax.loads(schedule.flights.len());
    let f = (0..3)
        .map(|_| *cands.choose(rng).unwrap())
        .min_by_key(|&f| (loads[f].total(), f))?;
    let mut flights = unit(state, f);
    let last = *flights.last().unwrap();
    let a = schedule.flights[f].aircraft()?;
    let rot = state.rotation(a, schedule);
    if let Some(i) = rot.iter().position(|&g| g == last) {
        if let Some(&g) = rot.get(i + 1) {
            if idx.flight_origin[g] == idx.flight_destination[last]
                && idx.flight_destination[g] == idx.flight_origin[f]
                && state.flights[g].is_decision()
                && idx.flight_leg[g].is_none()
            {
                flights.push(g);
            }
        }
    }
    let mut next = schedule.clone();
    for &g in &flights {
        next.flights[g] = FlightDisposition::Canceled;
    }
    Some((next, Mutation::Cancel { flights }))
}

/// Re-places succeeded maintenance that no longer fits the ground time.
fn repair_maintenance(state: &DisruptedState, schedule: &mut RecoverySchedule) {
    for m in 0..schedule.maintenances.len() {
        if let MaintenanceDisposition::Succeeded { airport, start } = schedule.maintenances[m] {
            let a = state.index.maintenance_aircraft[m];
            let dur = state.instance.maintenances[m].duration;
            let fits = state
                .ground_gaps(a, schedule)
                .iter()
                .any(|&(p, from, next)| p == airport && from <= start && start.saturating_add(dur) <= next);
            if !fits {
                if let Some(d) = state.first_maintenance_fit(m, schedule) {
                    schedule.maintenances[m] = d;
                }
            }
        }
    }
}
