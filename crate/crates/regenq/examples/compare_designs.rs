//! Measure both regeneration designs on the same sample paths and compare
//! the efficiency of the resulting interval estimators.
//!
//! The primary design regenerates when the first class arrives into an
//! empty network with every other class in its exponential phase. The
//! alternative design arms on any departure that empties the network while
//! all classes are in phase, and regenerates at the next arrival. Which
//! one yields more usable cycles depends on the network, which is why the
//! comparison runs both detectors in a single pass.
//!
//!     cargo run --release --example compare_designs

use regenq::run::{compare_modes, Report, RunSpec};
use regenq::NetworkConfig;

fn show(label: &str, rep: &Report) {
    println!("{label}:");
    println!("  completed cycles            : {}", rep.n_cycles);
    println!("  warm-up time dropped        : {:.1}", rep.delay_dropped);
    println!("  mean estimate               : {:.4}", rep.beta.unwrap());
    if let Some([lo, hi]) = rep.ci {
        println!("  {:.0}% interval                : [{lo:.4}, {hi:.4}]", 100.0 * rep.ci_level);
    }
    println!("  variance of s(t) (smaller is better): {:.4e}", rep.avsde.unwrap());
}

fn main() {
    // The four-class network with an exponential first class: its arrivals
    // are memoryless, so the alternative design (which may regenerate on
    // *any* class's arrival) has many more chances to fire.
    let path = format!(
        "{}/../../configs/four_class_exp_first.json",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(&path).expect("config file");
    let cfg = NetworkConfig::from_json(&text).expect("valid config");

    let mut spec = RunSpec::new(cfg, 400_000.0, 7);
    spec.replications = 2;

    let cmp = compare_modes(&spec).expect("both designs available");
    show("primary design", &cmp.primary.merged);
    println!();
    show("alternative design", &cmp.alternative.merged);

    let k_primary = cmp.primary.merged.avsde.unwrap();
    let k_alternative = cmp.alternative.merged.avsde.unwrap();
    println!();
    println!(
        "on this network the {} design estimates the variance constant more reliably",
        if k_alternative < k_primary { "alternative" } else { "primary" }
    );
    println!("(both point estimates target the same steady-state mean; the designs differ");
    println!("only in where they cut the path into independent cycles).");
}
