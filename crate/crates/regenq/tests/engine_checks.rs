//! Cross-checks tying the event engine to queueing theory: conservation
//! laws and classical identities that any correct simulator must satisfy,
//! independent of the regenerative machinery layered on top.

use regenq::engine::{self, RunOptions};
use regenq::network::solve_traffic;
use regenq::regen::CycleRecord;
use regenq::stats::{beta_hat, confidence_interval, EstimatorAccumulator};
use regenq::{NetworkConfig, StateFunctional};

fn config(name: &str) -> NetworkConfig {
    let path = format!("{}/../../configs/{}", env!("CARGO_MANIFEST_DIR"), name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"));
    NetworkConfig::from_json(&text).unwrap_or_else(|e| panic!("parse {path}: {e}"))
}

/// Little's law on M/M/1 with unit service rate and load one half: the
/// time-average number in system equals the departure rate times the mean
/// sojourn time of departed customers, up to end-of-horizon edge effects
/// and simulation noise.
#[test]
fn littles_law_on_mm1() {
    let cfg = config("mm1.json");
    let opts = RunOptions::new(200_000.0, StateFunctional::TotalQueue);
    let res = engine::run(&cfg, 41, 0, &opts).unwrap();
    assert!(res.exits > 10_000);
    let l = res.area_total / res.horizon;
    let lambda = res.exits as f64 / res.horizon;
    let w = res.sojourn_sum / res.exits as f64;
    let rel = (l - lambda * w).abs() / l;
    assert!(
        rel < 0.02,
        "L = {l} but lambda * W = {} (relative gap {rel})",
        lambda * w
    );
}

/// One long run of the four-class network against the traffic equations:
/// station busy fractions match the nominal loads, and exogenous arrivals
/// and network exits both match the total exogenous rate (what comes in
/// must leave).
#[test]
fn long_run_matches_traffic_solution() {
    let cfg = config("four_class.json");
    let traffic = solve_traffic(&cfg).unwrap();
    let opts = RunOptions::new(1_000_000.0, StateFunctional::TotalQueue);
    let res = engine::run(&cfg, 7, 0, &opts).unwrap();

    for (i, (&busy, &rho)) in res.busy_time.iter().zip(&traffic.utilizations).enumerate() {
        let frac = busy / res.horizon;
        let rel = (frac - rho).abs() / rho;
        assert!(
            rel < 0.02,
            "station {i}: busy fraction {frac} vs nominal load {rho} (relative gap {rel})"
        );
    }

    let total_in_rate: f64 = traffic.exogenous_rates.iter().sum();
    let arrivals_rate = res.exogenous_arrivals as f64 / res.horizon;
    let exits_rate = res.exits as f64 / res.horizon;
    let rel_in = (arrivals_rate - total_in_rate).abs() / total_in_rate;
    let rel_out = (exits_rate - total_in_rate).abs() / total_in_rate;
    assert!(
        rel_in < 0.02,
        "exogenous arrival rate {arrivals_rate} vs solved {total_in_rate}"
    );
    assert!(
        rel_out < 0.02,
        "exit rate {exits_rate} vs solved exogenous rate {total_in_rate}"
    );
}

/// The per-class occupancy integrals are an exact decomposition of the
/// total-count integral: both are accumulated event by event from the same
/// state, so they must agree to rounding.
#[test]
fn per_class_areas_sum_to_total() {
    let cfg = config("four_class.json");
    let opts = RunOptions::new(100_000.0, StateFunctional::TotalQueue);
    let res = engine::run(&cfg, 11, 0, &opts).unwrap();
    let sum: f64 = res.area_per_class.iter().sum();
    assert!(
        (sum - res.area_total).abs() <= 1e-9 * res.area_total.max(1.0),
        "per-class areas sum to {sum} but total area is {}",
        res.area_total
    );
}

/// Centered cycle rewards from a regenerative run are independent across
/// cycles, so their lag-1 sample autocorrelation must be noise-sized.
#[test]
fn centered_cycle_rewards_uncorrelated_at_lag_one() {
    let cfg = config("mm1.json");
    let opts = RunOptions::new(200_000.0, StateFunctional::TotalQueue);
    let res = engine::run(&cfg, 5, 0, &opts).unwrap();
    let cycles = res.primary_cycles.unwrap();
    let n = cycles.len();
    assert!(n > 10_000, "expected tens of thousands of cycles, got {n}");
    let acc = EstimatorAccumulator::from_cycles(cycles.iter());
    let beta = beta_hat(&acc).unwrap();
    let w: Vec<f64> = cycles.iter().map(|c| c.r - beta * c.tau).collect();
    let num: f64 = w.windows(2).map(|p| p[0] * p[1]).sum();
    let den: f64 = w.iter().map(|x| x * x).sum();
    let rho1 = num / den;
    let bound = 3.0 / (n as f64).sqrt();
    assert!(
        rho1.abs() < bound,
        "lag-1 autocorrelation {rho1} exceeds the noise bound {bound} over {n} cycles"
    );
}

/// On an all-exponential input the alternative detector regenerates at
/// every arrival into an empty network while the primary detector only
/// fires for first-class arrivals, so the primary regeneration instants
/// must be a subsequence of the alternative ones (within the alternative
/// observation window) when both are read off the same sample path.
#[test]
fn primary_regenerations_nest_inside_alternative_ones() {
    let cfg = config("two_poisson.json");
    let mut opts = RunOptions::new(100_000.0, StateFunctional::TotalQueue);
    opts.collect_alternative = true;
    let res = engine::run(&cfg, 13, 0, &opts).unwrap();

    let instants = |cycles: &[CycleRecord], start: f64| -> Vec<f64> {
        let mut t = start;
        let mut out = vec![t];
        for c in cycles {
            t += c.tau;
            out.push(t);
        }
        out
    };
    let prim = instants(
        res.primary_cycles.as_deref().unwrap(),
        res.primary_delay_end.unwrap(),
    );
    let alt = instants(
        res.alternative_cycles.as_deref().unwrap(),
        res.alternative_delay_end.unwrap(),
    );
    assert!(prim.len() > 1_000, "only {} primary instants", prim.len());
    assert!(
        alt.len() > prim.len(),
        "alternative design should regenerate more often: {} vs {}",
        alt.len(),
        prim.len()
    );

    let alt_first = alt[0];
    let alt_last = *alt.last().unwrap();
    let mut j = 0usize;
    let mut checked = 0usize;
    for &t in &prim {
        if t < alt_first - 1e-6 || t > alt_last + 1e-6 {
            continue;
        }
        while j < alt.len() && alt[j] < t - 1e-3 {
            j += 1;
        }
        assert!(
            j < alt.len() && (alt[j] - t).abs() < 1e-3,
            "primary regeneration at t = {t} is not an alternative regeneration"
        );
        checked += 1;
    }
    assert!(checked > 1_000, "only {checked} instants fell in the window");
}

/// The plain time average over the horizon and the ratio estimator over
/// completed cycles estimate the same quantity; they may differ only by
/// the trailing fragment, which is far inside the interval noise.
#[test]
fn time_average_agrees_with_cycle_estimator() {
    let cfg = config("mm1.json");
    let opts = RunOptions::new(200_000.0, StateFunctional::TotalQueue);
    let res = engine::run(&cfg, 3, 0, &opts).unwrap();
    let acc = EstimatorAccumulator::from_cycles(res.primary_cycles.as_ref().unwrap().iter());
    let beta = beta_hat(&acc).unwrap();
    let (lo, hi) = confidence_interval(&acc, 0.99).unwrap();
    let half = 0.5 * (hi - lo);
    let ta = res.integral_h / res.horizon;
    assert!(
        (ta - beta).abs() < 3.0 * half + 1e-9,
        "time average {ta} vs cycle estimate {beta} (99% half-width {half})"
    );
}
