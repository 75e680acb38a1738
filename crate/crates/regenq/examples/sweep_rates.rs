//! Sweep the exponential-extraction rate upward from its minimal feasible
//! value and watch the trade-off: fewer regenerations (the exponential
//! phases shorten) but an unchanged point estimate, an unchanged variance
//! constant, and a growing variance for the variance estimator itself.
//!
//!     cargo run --release --example sweep_rates

use regenq::run::{sweep_lambda, RunSpec};
use regenq::NetworkConfig;

fn main() {
    let path = format!("{}/../../configs/four_class.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).expect("config file");
    let cfg = NetworkConfig::from_json(&text).expect("valid config");

    let mut spec = RunSpec::new(cfg, 400_000.0, 42);
    spec.replications = 2;

    let factors = [1.0, 1.5, 2.0];
    let rows = sweep_lambda(&spec, &factors).expect("sweep");

    println!("four-class network, horizon {:.0}, {} replications per factor", spec.horizon, spec.replications);
    println!();
    println!(
        "{:>7} {:>9} {:>11} {:>11} {:>13}",
        "factor", "cycles", "mean est.", "tavc est.", "var[s] est."
    );
    for row in &rows {
        let rep = &row.outcome.merged;
        println!(
            "{:>7.2} {:>9} {:>11.4} {:>11.1} {:>13.4e}",
            row.factor,
            rep.n_cycles,
            rep.beta.unwrap(),
            rep.tavc.unwrap(),
            rep.avsde.unwrap(),
        );
    }

    println!();
    println!("reading the table:");
    println!("  - the mean estimate is about constant: every factor targets the same law;");
    println!("  - cycles fall as the factor grows: larger rates mean shorter exponential");
    println!("    phases, so the detector fires less often;");
    println!("  - the time-average variance constant is a property of the network, not of");
    println!("    the regeneration design: the variation across factors is estimator noise");
    println!("    and shrinks with the horizon;");
    println!("  - the variance of the variance estimator grows: longer cycles mean fewer,");
    println!("    noisier squared deviations. The minimal rate is the efficient choice.");
}
