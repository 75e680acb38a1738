//! Run the built-in verification battery: hand-checked estimator values,
//! numeric-vs-closed-form rate bounds, the exact complement identity of
//! the gamma(2) law, agreement with analytic queueing formulas, and
//! law-preservation checks for every standard family at two rates.
//!
//!     cargo run --release --example self_check
//!
//! The sample size trades confidence for speed; the `verify` subcommand of
//! the CLI runs the same battery with command-line control over it.

use regenq::run::verify_battery;

fn main() {
    let report = verify_battery(50_000, 0);
    for check in &report.checks {
        println!(
            "{} {:<34} {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!();
    println!(
        "verification {}",
        if report.passed { "passed" } else { "FAILED" }
    );
    std::process::exit(if report.passed { 0 } else { 1 });
}
