//! The published config schema stays in sync with what the loader actually
//! accepts: same field names, same required sets, same strictness about
//! unknown keys, same defaults.

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{json, Value};
use velum::config::RunConfig;

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/runconfig.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn required(schema_obj: &Value) -> BTreeSet<String> {
    match schema_obj.get("required") {
        Some(Value::Array(names)) => {
            names.iter().map(|v| v.as_str().unwrap().to_owned()).collect()
        }
        _ => BTreeSet::new(),
    }
}

/// Every section and field populated, so a round trip serializes the full
/// key set.
fn full_config() -> Value {
    json!({
        "domain": {"Lx": 1.0, "Ly": 2.0, "nx": 9, "ny": 7},
        "material": {"alpha": 1.0, "beta": 1.0, "c_b": 0.5, "p": 4.0, "c_J": 1.0, "q": 4.0,
                     "split_mode": false, "c_K": 0.0, "c_Gamma": 0.0},
        "boundary": {"south": "clamped", "east": "free", "north": "pinned", "west": "clamped",
                     "f_o": {"preset": "stretch", "lambda_x": 1.1, "lambda_y": 0.9}},
        "loads": {"b": [0.0, 0.0, -1.0], "B": [[0.0, 0.0], [0.0, 0.0], [0.1, 0.0]],
                  "tau": {"east": [0.1, 0.0, 0.0]}, "mu": {"east": [0.0, 0.0, 0.1]}},
        "solver": {"grad_tol": 1e-8, "max_iters": 100, "ls_shrink": 0.5, "ls_armijo": 1e-4,
                   "memory": 10, "perturbation_amplitude": 0.0, "seed": 1},
        "outputs": {"directory": "out", "formats": ["vtk", "csv", "json"]}
    })
}

#[test]
fn schema_documents_exactly_the_loaded_fields() {
    let schema = schema();
    let cfg: RunConfig = serde_json::from_value(full_config()).unwrap();
    let round = serde_json::to_value(&cfg).unwrap();

    let props = &schema["properties"];
    assert_eq!(keys(props), keys(&round));
    for (section, value) in round.as_object().unwrap() {
        assert_eq!(keys(&props[section]["properties"]), keys(value), "{section}");
    }
}

#[test]
fn required_lists_match_what_the_loader_accepts() {
    let schema = schema();
    let full = full_config();

    let req = required(&schema);
    for section in keys(&schema["properties"]) {
        let mut trimmed = full.clone();
        trimmed.as_object_mut().unwrap().remove(&section);
        let parses = serde_json::from_value::<RunConfig>(trimmed).is_ok();
        assert_eq!(parses, !req.contains(&section), "{section}");
    }

    for (section, sect_schema) in schema["properties"].as_object().unwrap() {
        let req = required(sect_schema);
        for prop in keys(&sect_schema["properties"]) {
            let mut trimmed = full.clone();
            trimmed[section].as_object_mut().unwrap().remove(&prop);
            let parses = serde_json::from_value::<RunConfig>(trimmed).is_ok();
            assert_eq!(parses, !req.contains(&prop), "{section}.{prop}");
        }
    }
}

#[test]
fn unknown_keys_are_rejected_as_documented() {
    let schema = schema();
    let full = full_config();

    assert_eq!(schema["additionalProperties"], Value::Bool(false));
    let mut extra = full.clone();
    extra["bogus"] = 1.into();
    assert!(serde_json::from_value::<RunConfig>(extra).is_err());

    for section in keys(&schema["properties"]) {
        assert_eq!(
            schema["properties"][section.as_str()]["additionalProperties"],
            Value::Bool(false),
            "{section}"
        );
        let mut extra = full.clone();
        extra[section.as_str()]["bogus"] = 1.into();
        assert!(serde_json::from_value::<RunConfig>(extra).is_err(), "{section}");
    }
}

#[test]
fn schema_defaults_match_the_loader_defaults() {
    let schema = schema();
    let minimal = json!({
        "domain": {"Lx": 1.0, "Ly": 1.0, "nx": 5, "ny": 5},
        "material": {"alpha": 1.0, "beta": 1.0, "p": 4.0, "c_J": 1.0, "q": 4.0},
        "boundary": {"south": "clamped", "east": "free", "north": "clamped", "west": "free"}
    });
    let cfg: RunConfig = serde_json::from_value(minimal).unwrap();
    let round = serde_json::to_value(&cfg).unwrap();

    for (section, sect_schema) in schema["properties"].as_object().unwrap() {
        for (prop, prop_schema) in sect_schema["properties"].as_object().unwrap() {
            let Some(default) = prop_schema.get("default") else { continue };
            let loaded = &round[section][prop];
            let matches = match (default.as_f64(), loaded.as_f64()) {
                (Some(a), Some(b)) => a == b,
                _ => default == loaded,
            };
            assert!(matches, "{section}.{prop}: schema {default} vs loader {loaded}");
        }
    }
}

#[test]
fn placement_presets_match_the_schema_variants() {
    let schema = schema();
    let variants = schema["$defs"]["placement"]["oneOf"].as_array().unwrap();
    let by_tag = |tag: &str| {
        variants
            .iter()
            .find(|v| v["properties"]["preset"]["const"] == tag)
            .unwrap_or_else(|| panic!("schema lacks a {tag} placement variant"))
    };

    let placements = [
        json!({"preset": "identity"}),
        json!({"preset": "stretch", "lambda_x": 1.5, "lambda_y": 0.5}),
        json!({"preset": "custom", "path": "nodes.json"}),
    ];
    for placement in placements {
        let tag = placement["preset"].as_str().unwrap().to_owned();
        let mut full = full_config();
        full["boundary"]["f_o"] = placement;
        let cfg: RunConfig = serde_json::from_value(full).unwrap();
        let round = serde_json::to_value(&cfg).unwrap();
        assert_eq!(
            keys(&by_tag(&tag)["properties"]),
            keys(&round["boundary"]["f_o"]),
            "{tag}"
        );
    }
}
