//! Check a network configuration against the modeling assumptions of both
//! regeneration designs: structure, interarrival density requirements,
//! splittability per class, and stability of the traffic equations.
//!
//!     cargo run --release --example validate_config [path/to/config.json]
//!
//! Without an argument this validates the four-class benchmark network,
//! whose uniform first-class interarrival law is fine for the primary
//! design but rules out the alternative one (a uniform density cannot be
//! split, and the alternative design needs every class splittable).

use regenq::network::ValidationReport;
use regenq::run::validation_output;
use regenq::NetworkConfig;

fn show(report: &ValidationReport) {
    println!("{:?} design:", report.mode);
    for check in &report.checks {
        let tag = if check.passed { "ok  " } else { "FAIL" };
        println!("  {tag} {:<16} {}", check.name, check.detail);
    }
    println!(
        "  => design {}",
        if report.mode_available() { "available" } else { "unavailable" }
    );
    if let Some(traffic) = &report.traffic {
        let loads: Vec<String> =
            traffic.utilizations.iter().map(|rho| format!("{rho:.3}")).collect();
        println!("  station loads: [{}]", loads.join(", "));
    }
    println!();
}

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        format!("{}/../../configs/four_class.json", env!("CARGO_MANIFEST_DIR"))
    });
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"));
    let cfg = NetworkConfig::from_json(&text).unwrap_or_else(|e| panic!("parse {path}: {e}"));

    println!("validating {path}");
    println!();
    let out = validation_output(&cfg);
    show(&out.primary);
    show(&out.alternative);
}
