use serde_json::Value;

use super::IoError;
use crate::model::ProblemInstance;

/// Fields without a default, per top-level collection.
const REQUIRED: &[(&str, &str, &[&str])] = &[
    ("airports", "airport", &["id", "min_turnaround", "min_transit", "min_crew_connection"]),
    ("aircraft", "aircraft", &["id", "initial_position", "available_from"]),
    (
        "crew_groups",
        "crew_group",
        &["id", "initial_position", "available_from", "flight_time_limit"],
    ),
    (
        "flights",
        "flight",
        &[
            "id",
            "origin",
            "destination",
            "sched_departure",
            "duration",
            "original_aircraft",
            "original_crew",
            "seats",
        ],
    ),
    (
        "maintenances",
        "maintenance",
        &["id", "aircraft", "duration", "allowed_windows", "fail_penalty"],
    ),
    ("slots", "slot", &["id", "airport", "window", "capacity"]),
    ("itineraries", "itinerary", &["id", "passenger_count", "legs"]),
];

pub fn from_str(text: &str, file: &str) -> Result<ProblemInstance, IoError> {
    let syntax = |e: serde_json::Error| IoError::Syntax {
        file: file.to_string(),
        message: e.to_string(),
    };
    let value: Value = serde_json::from_str(text).map_err(syntax)?;
    check_required(&value, file)?;
    serde_json::from_value(value).map_err(syntax)
}

fn check_required(value: &Value, file: &str) -> Result<(), IoError> {
    let missing = |at: String, entity: &str, id: &str, field: &str| IoError::MissingField {
        file: file.to_string(),
        at,
        entity: entity.to_string(),
        id: id.to_string(),
        field: field.to_string(),
    };
    let Some(root) = value.as_object() else {
        return Err(IoError::Syntax {
            file: file.to_string(),
            message: "top level must be an object".into(),
        });
    };
    for field in ["anchors", "airports", "aircraft", "crew_groups", "flights"] {
        if !root.contains_key(field) {
            return Err(missing("/".into(), "instance", "", field));
        }
    }
    for (key, entity, fields) in REQUIRED {
        let Some(items) = root.get(*key).and_then(Value::as_array) else {
            continue;
        };
        for (i, item) in items.iter().enumerate() {
            let id = item.get("id").and_then(Value::as_str).unwrap_or("");
            for field in *fields {
                if item.get(*field).is_none_or(Value::is_null) {
                    return Err(missing(format!("{key}[{i}]"), entity, id, field));
                }
            }
        }
    }
    Ok(())
}

pub fn to_string(inst: &ProblemInstance) -> String {
    let mut s = serde_json::to_string_pretty(inst).expect("instance serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::example_instance;

    #[test]
    fn round_trip() {
        let inst = example_instance();
        let text = to_string(&inst);
        assert_eq!(from_str(&text, "x").unwrap(), inst);
    }

    #[test]
    fn missing_duration_names_flight_and_field() {
        let inst = example_instance();
        let mut v: Value = serde_json::to_value(&inst).unwrap();
        v["flights"][2].as_object_mut().unwrap().remove("duration");
        let e = from_str(&v.to_string(), "x.json").unwrap_err();
        match e {
            IoError::MissingField { id, field, .. } => {
                assert_eq!(id, inst.flights[2].id);
                assert_eq!(field, "duration");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_document_is_a_syntax_error() {
        assert!(matches!(from_str("{", "x"), Err(IoError::Syntax { .. })));
        assert!(matches!(from_str("[]", "x"), Err(IoError::Syntax { .. })));
    }
}
