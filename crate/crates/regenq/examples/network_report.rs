//! Run the four-class benchmark network and print the full versioned JSON
//! report — the same document the command-line `run` subcommand emits.
//!
//!     cargo run --release --example network_report

use regenq::run::{execute, RunSpec};
use regenq::NetworkConfig;

fn main() {
    let path = format!("{}/../../configs/four_class.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).expect("config file");
    let cfg = NetworkConfig::from_json(&text).expect("valid config");

    let mut spec = RunSpec::new(cfg, 200_000.0, 1);
    spec.replications = 2;
    spec.level = 0.99;

    let outcome = execute(&spec).expect("stable and decomposable");

    // The merged report pools the cycles of all replications; the
    // per-replication reports (same schema, `replication` set) are in
    // `outcome.per_replication`, and the raw cycles in `outcome.cycles`.
    println!("{}", serde_json::to_string_pretty(&outcome.merged).unwrap());

    eprintln!();
    eprintln!(
        "({} cycles across {} replications; per-replication cycle counts: {})",
        outcome.merged.n_cycles,
        outcome.per_replication.len(),
        outcome
            .cycles
            .iter()
            .map(|c| c.records.len().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
}
