use proptest::prelude::*;

use recovery_core::acr::{run_acr_traced, AcrConfig};
use recovery_core::io::{apply_orders, generate_instance, json, tables, GeneratorConfig};
use recovery_core::milp::{encode, export_model, read_model};
use recovery_core::model::{apply_disruptions, check_feasibility, DisruptedState};
use recovery_core::paxr::GaConfig;
use recovery_core::pipeline::{recover, RecoveryConfig};
use recovery_core::solver::{enumerate_oracle, solve_builtin, SolveLimits};
use recovery_core::space::{build_initial_space, expand_space, OptionKind, SpaceConfig};
use recovery_core::tsn::{build_tsn, ground_arc_pass, ArcKind, Balance, Node, Place};

fn tiny(seed: u64, flights: usize, multileg: usize) -> GeneratorConfig {
    let mut g = GeneratorConfig::tiny(seed);
    g.flights = flights;
    g.multileg_groups = multileg;
    g
}

fn state(g: &GeneratorConfig) -> Option<DisruptedState> {
    apply_disruptions(&generate_instance(g).ok()?).ok()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn json_round_trip(seed in 0u64..10_000, flights in 5usize..14) {
        // Shapes the generator cannot fill are skipped.
        let Ok(inst) = generate_instance(&tiny(seed, flights, 1)) else { return Ok(()) };
        let back = json::from_str(&json::to_string(&inst), "mem").unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn tables_round_trip(seed in 0u64..10_000) {
        let inst = generate_instance(&GeneratorConfig::tiny(seed)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        tables::write_dir(&inst, dir.path()).unwrap();
        prop_assert_eq!(tables::read_dir(dir.path()).unwrap(), inst);
    }

    #[test]
    fn lp_text_is_a_fixed_point(seed in 0u64..10_000) {
        let Some(st) = state(&GeneratorConfig::tiny(seed)) else { return Ok(()) };
        let space = build_initial_space(&st, &SpaceConfig::default());
        let model = encode(&build_tsn(&space, &st).unwrap(), &st).unwrap();
        let text = export_model(&model);
        let back = read_model(&text).unwrap();
        prop_assert_eq!(back.variables.len(), model.variables.len());
        prop_assert_eq!(back.constraints.len(), model.constraints.len());
        prop_assert_eq!(export_model(&back), text);
    }

    /// Cancel everything, fail every maintenance: always a feasible point.
    #[test]
    fn all_slack_is_feasible(seed in 0u64..10_000, multileg in 0usize..3) {
        let Some(st) = state(&tiny(seed, 10, multileg)) else { return Ok(()) };
        let space = build_initial_space(&st, &SpaceConfig::default());
        let tsn = build_tsn(&space, &st).unwrap();
        let model = encode(&tsn, &st).unwrap();
        let meta = model.meta.as_ref().unwrap();
        let mut x = vec![0.0; model.variables.len()];
        for (_, opts) in &meta.groups {
            for &(k, v) in opts {
                if matches!(k, OptionKind::Canceled | OptionKind::FailingMaintenance) {
                    x[v] = 1.0;
                }
            }
        }
        for sinks in &tsn.sinks {
            let first = sinks
                .iter()
                .copied()
                .find(|&s| tsn.arcs.iter().any(|a| a.kind == ArcKind::Input && a.to == tsn.arcs[s].from))
                .unwrap();
            x[model.var_index(&format!("snk_{first}")).unwrap()] = 1.0;
        }
        for &(_, u) in &meta.slot_vars {
            let c = model.constraints.iter().find(|c| c.terms.iter().any(|&(v, _)| v == u)).unwrap();
            x[u] = c.rhs;
        }
        prop_assert_eq!(model.violations(&x, 1e-9), Vec::<String>::new());
    }

    #[test]
    fn expansion_keeps_every_option(seed in 0u64..10_000) {
        let Some(st) = state(&GeneratorConfig::tiny(seed)) else { return Ok(()) };
        let cfg = AcrConfig { max_iterations: 1, ..AcrConfig::default() };
        let run = run_acr_traced(&st, &cfg).unwrap();
        let grown = expand_space(&run.space, &st, &run.schedule, &run.feedback, &cfg.space);
        prop_assert!(grown.groups.len() >= run.space.groups.len());
        for (old, new) in run.space.groups.iter().zip(&grown.groups) {
            prop_assert_eq!(old.entity, new.entity);
            prop_assert_eq!(&new.options[..old.options.len()], &old.options[..]);
        }
    }

    #[test]
    fn ground_pass_links_consecutive_nodes(times in prop::collection::vec((0usize..3, 0i64..50), 0..30)) {
        let nodes: Vec<Node> = times
            .iter()
            .map(|&(p, t)| Node { subnet: Some(0), place: Place::Airport(p), time: t, balance: Balance::Inequality })
            .collect();
        let arcs = ground_arc_pass(&nodes);
        let expect: usize = (0..3)
            .map(|p| times.iter().filter(|x| x.0 == p).count().saturating_sub(1))
            .sum();
        prop_assert_eq!(arcs.len(), expect);
        for (a, b) in arcs {
            prop_assert_eq!(nodes[a].place, nodes[b].place);
            prop_assert!((nodes[a].time, a) < (nodes[b].time, b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(12) })]

    #[test]
    fn solver_matches_oracle(seed in 0u64..10_000, flights in 5usize..8) {
        let mut g = tiny(seed, flights, 0);
        g.aircraft = 2;
        g.crews = 2;
        g.maintenances = 0;
        let Some(st) = state(&g) else { return Ok(()) };
        let space = build_initial_space(&st, &SpaceConfig { granularity: 60, ..SpaceConfig::default() });
        let model = encode(&build_tsn(&space, &st).unwrap(), &st).unwrap();
        if model.selections() > 200_000 {
            return Ok(());
        }
        let exact = enumerate_oracle(&model, 200_000).unwrap();
        let fast = solve_builtin(&model, &SolveLimits::default());
        prop_assert!((fast.objective - exact.objective).abs() <= 1e-6 * exact.objective.abs().max(1.0));
    }

    /// Orders replayed on the disrupted baseline give back the plan.
    #[test]
    fn orders_replay_to_the_plan(seed in 0u64..10_000) {
        let Some(st) = state(&GeneratorConfig::tiny(seed)) else { return Ok(()) };
        let mut cfg = RecoveryConfig::default();
        cfg.acr.wall = None;
        cfg.ga = GaConfig { budget: None, max_generations: Some(2), workers: 1, seed, ..GaConfig::default() };
        let run = recover(&st, &cfg).unwrap();
        let (schedule, pax) = apply_orders(&st, &run.orders).unwrap();
        prop_assert!(schedule.same_plan(run.schedule()));
        prop_assert!(check_feasibility(&schedule, &st).is_empty());
        prop_assert!(pax.capacity_violations(&st).is_empty());
    }
}
