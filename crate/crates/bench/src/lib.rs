//! Fixtures shared by the benchmarks.

use recovery_core::io::{example_instance, generate_instance, GeneratorConfig};
use recovery_core::model::{apply_disruptions, DisruptedState};

/// The bundled example, disrupted.
pub fn example_state() -> DisruptedState {
    apply_disruptions(&example_instance()).expect("example applies")
}

/// A generated instance of the named tier, disrupted.
pub fn generated_state(preset: &str, seed: u64) -> DisruptedState {
    let cfg = GeneratorConfig::preset(preset, seed).expect("known preset");
    apply_disruptions(&generate_instance(&cfg).expect("generates")).expect("applies")
}
