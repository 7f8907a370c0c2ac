//! Working with scenario documents: load a preset file, rescale it to
//! fractional compartments, edit it and write the canonical form back.
//!
//! Run with `cargo run --example scenario_files`.

use epioc::scenario::{load_scenario, normalize_scenario, serialize};

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets/capeverde-seirasei.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let scenario = load_scenario(&text).unwrap();
    println!("loaded {} ({} compartments, digest {})",
        scenario.model,
        scenario.model.state_dim(),
        scenario.digest()
    );

    // the canonical serialization is a fixed point of load . serialize
    let canonical = serialize(&scenario);
    assert_eq!(load_scenario(&canonical).unwrap(), scenario);
    println!("canonical form round-trips; {} bytes", canonical.len());

    // fractional rescaling is idempotent
    let normalized = normalize_scenario(&scenario).unwrap();
    assert_eq!(normalize_scenario(&normalized).unwrap(), normalized);
    let names = normalized.state_names();
    print!("fractional initial state:");
    for (name, v) in names.iter().zip(normalized.initial.iter()) {
        print!(" {name}={v}");
    }
    println!();

    // validation errors carry the offending field
    let broken = text.replace("\"beta_mh\": 0.375", "\"beta_mh\": 1.5");
    match load_scenario(&broken) {
        Err(e) => println!("rejected edited document: {e}"),
        Ok(_) => unreachable!("out-of-range probability must not load"),
    }
}
