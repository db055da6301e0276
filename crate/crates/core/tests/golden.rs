use std::path::PathBuf;

use recovery_core::io::example_instance;
use recovery_core::milp::{encode, export_model, read_model, warm_start_from};
use recovery_core::space::{build_initial_space, SpaceConfig};
use recovery_core::tsn::build_tsn;
use recovery_core::*;

fn first_iteration_lp() -> String {
    let state = apply_disruptions(&example_instance()).unwrap();
    let space = build_initial_space(&state, &SpaceConfig::default());
    let tsn = build_tsn(&space, &state).unwrap();
    let model = encode(&tsn, &state).unwrap();
    let (model, _) = warm_start_from(&model, &state, &state.baseline);
    export_model(&model)
}

/// Set `UPDATE_GOLDEN=1` to rewrite the snapshot.
#[test]
fn example_first_iteration_matches_snapshot() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example_iter1.lp");
    let text = first_iteration_lp();
    assert_eq!(text, first_iteration_lp(), "export is not stable across builds");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).unwrap();
    assert!(golden == text, "LP export differs from {}", path.display());
    let back = read_model(&golden).unwrap();
    assert_eq!(export_model(&back), golden);
    for tag in ["flow-balance", "unique-decision", "slot-capacity", "crew-duty"] {
        assert!(golden.contains(&format!("\\ {tag}")), "{tag}");
    }
}
