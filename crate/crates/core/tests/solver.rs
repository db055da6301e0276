use recovery_core::io::{example_instance, generate_instance, GeneratorConfig};
use recovery_core::milp::{encode, MilpModel};
use recovery_core::solver::{enumerate_oracle, solve_builtin, SolveLimits, SolveStatus, DEFAULT_ORACLE_CAP, TOL};
use recovery_core::space::{build_initial_space, SpaceConfig};
use recovery_core::tsn::build_tsn;
use recovery_core::*;

fn model_of(inst: &ProblemInstance) -> MilpModel {
    let state = apply_disruptions(inst).unwrap();
    let space = build_initial_space(&state, &SpaceConfig::default());
    let tsn = build_tsn(&space, &state).unwrap();
    encode(&tsn, &state).unwrap()
}

#[test]
fn example_solves_to_known_optimum() {
    let m = model_of(&example_instance());
    let b = solve_builtin(&m, &SolveLimits::default());
    assert_eq!(b.status, SolveStatus::Optimal);
    assert!(m.violations(&b.assignment, TOL).is_empty());
    // Confirmed once by uncapped enumeration (3.6M leaves, several minutes).
    assert_eq!(b.objective, 1550.0);
    assert_eq!(b.bound, b.objective);
}

#[test]
fn generated_match_oracle() {
    for seed in 0..6 {
        let m = model_of(&generate_instance(&GeneratorConfig::tiny(seed)).unwrap());
        let b = solve_builtin(&m, &SolveLimits::default());
        assert!(b.has_solution(), "seed {seed}");
        assert!(m.violations(&b.assignment, TOL).is_empty(), "seed {seed}");
        if let Ok(o) = enumerate_oracle(&m, DEFAULT_ORACLE_CAP) {
            assert!((b.objective - o.objective).abs() <= 1e-6 * o.objective.abs().max(1.0), "seed {seed}: {} vs {}", b.objective, o.objective);
        }
    }
}
