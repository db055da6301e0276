//! Bundled worked example: 7 airports, 3 aircraft, 5 crew groups, 14 flights
//! and two knock-on delays on aircraft A#3.

use crate::model::ProblemInstance;

const EXAMPLE_JSON: &str = include_str!("../../data/example.json");

pub fn example_instance() -> ProblemInstance {
    super::json::from_str(EXAMPLE_JSON, "example.json").expect("bundled example parses")
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;
    use crate::io::{read_instance, Format};
    use crate::model::validate_instance;

    #[test]
    fn example_shape() {
        let inst = example_instance();
        assert_eq!(inst.airports.len(), 7);
        assert_eq!(inst.aircraft.len(), 3);
        assert_eq!(inst.crew_groups.len(), 5);
        assert_eq!(inst.flights.len(), 14);
        assert_eq!(inst.disruptions.len(), 2);
        assert!(validate_instance(&inst).is_empty(), "{:?}", validate_instance(&inst));
    }

    #[test]
    fn table_copy_matches() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example");
        let inst = read_instance(&dir, Some(Format::Tables)).unwrap();
        assert_eq!(inst, example_instance());
    }
}
