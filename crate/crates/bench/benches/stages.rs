use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use recovery_bench::{example_state, generated_state};
use recovery_core::acr::{run_acr, AcrConfig};
use recovery_core::milp::encode;
use recovery_core::paxr::{assign_itineraries, evolve, GaConfig, PaxConfig};
use recovery_core::solver::{solve_builtin, SolveLimits};
use recovery_core::space::{build_initial_space, SpaceConfig};
use recovery_core::tsn::build_tsn;

fn network(c: &mut Criterion) {
    for (name, state) in [("example", example_state()), ("medium", generated_state("medium", 1))] {
        let space = build_initial_space(&state, &SpaceConfig::default());
        c.bench_function(&format!("space/{name}"), |b| {
            b.iter(|| build_initial_space(black_box(&state), &SpaceConfig::default()))
        });
        c.bench_function(&format!("tsn/{name}"), |b| b.iter(|| build_tsn(black_box(&space), &state).unwrap()));
        let tsn = build_tsn(&space, &state).unwrap();
        c.bench_function(&format!("encode/{name}"), |b| b.iter(|| encode(black_box(&tsn), &state).unwrap()));
        let model = encode(&tsn, &state).unwrap();
        c.bench_function(&format!("solve/{name}"), |b| {
            b.iter(|| solve_builtin(black_box(&model), &SolveLimits::default()))
        });
    }
}

fn loop_and_pax(c: &mut Criterion) {
    let state = generated_state("small", 2);
    c.bench_function("acr/small", |b| b.iter(|| run_acr(black_box(&state), &AcrConfig::default()).unwrap()));
    let schedule = run_acr(&state, &AcrConfig::default()).unwrap();
    c.bench_function("paxr-assign/small", |b| {
        b.iter(|| assign_itineraries(black_box(&state), &schedule, &PaxConfig::default()))
    });
    let ga = GaConfig {
        budget: None,
        max_generations: Some(3),
        workers: 1,
        ..GaConfig::default()
    };
    let mut group = c.benchmark_group("ga");
    group.sample_size(10);
    group.bench_function("small-3-generations", |b| b.iter(|| evolve(black_box(&state), &schedule, &ga)));
    group.finish();
}

criterion_group!(benches, network, loop_and_pax);
criterion_main!(benches);
