//! Estimate the steady-state mean number in system of an M/M/1 queue by
//! regenerative simulation and compare the confidence interval against the
//! textbook value rho / (1 - rho).
//!
//!     cargo run --release --example mm1_walkthrough

use regenq::oracles::mm1_mean_number;
use regenq::run::{execute, RunSpec};
use regenq::NetworkConfig;

fn main() {
    // One station, Poisson arrivals at rate 1/2, exponential service at
    // rate 1: load rho = 1/2.
    let cfg = NetworkConfig::from_json(
        r#"{
            "stations": 1,
            "classes": [{
                "station": 0,
                "interarrival": {"kind": "exponential", "rate": 0.5},
                "service": {"kind": "exponential", "rate": 1.0}
            }],
            "routing": [[0.0]]
        }"#,
    )
    .expect("valid config");

    let exact = mm1_mean_number(0.5, 1.0).expect("stable queue");

    let mut spec = RunSpec::new(cfg, 50_000.0, 2024);
    spec.replications = 4;
    spec.level = 0.95;

    let outcome = execute(&spec).expect("stable, decomposable, nonempty");
    let report = &outcome.merged;

    println!("M/M/1, arrival rate 0.5, service rate 1.0");
    println!("  exact mean number in system : {exact:.6}");
    println!(
        "  regenerative estimate       : {:.6} over {} cycles ({} replications)",
        report.beta.unwrap(),
        report.n_cycles,
        report.replications
    );
    let [lo, hi] = report.ci.expect("enough cycles for an interval");
    let level = format!("{:.0}% confidence interval", 100.0 * report.ci_level);
    println!("  {level:<28}: [{lo:.6}, {hi:.6}]");
    println!(
        "  covered                     : {}",
        if lo <= exact && exact <= hi { "yes" } else { "no (a 1-in-20 event)" }
    );
    println!();
    println!("  time-average variance constant estimate: {:.4}", report.tavc.unwrap());
    println!("  cycle-mean bias term                   : {:.4}", report.b.unwrap());
    println!(
        "  variance of the s(t) estimator         : {:.4}",
        report.avsde.unwrap()
    );
    println!();
    println!(
        "  whole-horizon time average (fragments included): {:.6}",
        report.time_average
    );

    for rep in &outcome.per_replication {
        println!(
            "    replication {}: beta = {:.4} from {} cycles",
            rep.replication.unwrap(),
            rep.beta.unwrap(),
            rep.n_cycles
        );
    }
}
