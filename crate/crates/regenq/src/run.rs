//! Orchestration: seeded replications, report assembly, rate sweeps, mode
//! comparison, and the self-verification battery.
//!
//! Everything here is deterministic given `(config, master seed)`: no wall
//! clock, no global RNG, and replication fan-out merges in index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::LambdaChoice;
use crate::dist::{lambda_f_grid, DensityFamily, LambdaF};
use crate::engine::{self, RunOptions, RunResult, StateFunctional};
use crate::network::{
    validate_assumptions, InterarrivalSpec, NetworkConfig, ValidationReport,
};
use crate::oracles::{
    decomposition_law_check, mg1_mean_number, mm1_mean_number,
};
use crate::regen::{CycleRecord, RegenMode};
use crate::stats::{
    avsde_hat, b_hat, beta_hat, confidence_interval, s_hat, EstimatorAccumulator,
};

pub const REPORT_SCHEMA: &str = "regenq.report.v1";
pub const VERIFY_SCHEMA: &str = "regenq.verify.v1";
pub const VALIDATE_SCHEMA: &str = "regenq.validate.v1";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("requested regeneration mode is unavailable: {0}")]
    ModeUnavailable(String),
    #[error("network is unstable (station {station}: rho = {rho:.4}); pass allow_unstable to run anyway")]
    Unstable { station: usize, rho: f64 },
    #[error("simulation failed: {0}")]
    Engine(String),
}

/// A fully resolved request for one estimation experiment.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub config: NetworkConfig,
    pub horizon: f64,
    pub seed: u64,
    pub replications: u64,
    pub mode: RegenMode,
    pub functional: StateFunctional,
    /// Two-sided confidence level, e.g. 0.95.
    pub level: f64,
    pub allow_unstable: bool,
    pub record_trace: bool,
}

impl RunSpec {
    pub fn new(config: NetworkConfig, horizon: f64, seed: u64) -> Self {
        RunSpec {
            config,
            horizon,
            seed,
            replications: 1,
            mode: RegenMode::Primary,
            functional: StateFunctional::TotalQueue,
            level: 0.95,
            allow_unstable: false,
            record_trace: false,
        }
    }
}

/// Resolved exponential-extraction summary for one exogenous class.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LambdaReport {
    pub class: usize,
    /// Extracted exponential rate, when a split exists.
    pub rate: Option<f64>,
    /// Probability the split branch applies.
    pub split_weight: Option<f64>,
}

/// Estimation results, serialized as the versioned JSON report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub mode: RegenMode,
    pub functional: String,
    pub horizon: f64,
    pub master_seed: u64,
    /// Set on per-replication reports, absent on merged ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replication: Option<u64>,
    pub replications: u64,
    pub ci_level: f64,
    pub lambda_per_class: Vec<LambdaReport>,
    /// Completed cycles behind the estimates.
    pub n_cycles: u64,
    /// Total completed-cycle time (the `t` of the estimators).
    pub total_cycle_time: f64,
    pub beta: Option<f64>,
    /// Standard-deviation estimate `s(t)`.
    pub s: Option<f64>,
    /// Time-average variance constant estimate `s(t)^2`.
    pub tavc: Option<f64>,
    pub b: Option<f64>,
    /// Asymptotic variance of the standard-deviation estimator.
    pub avsde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
    /// Whole-horizon time average of the functional, fragments included.
    pub time_average: f64,
    /// Total pre-first-regeneration time dropped across replications.
    pub delay_dropped: f64,
    pub events: u64,
    pub warnings: Vec<String>,
}

/// Cycles of one replication, with the absolute start of the first cycle.
#[derive(Clone, Debug, Serialize)]
pub struct ReplicationCycles {
    pub replication: u64,
    pub start: f64,
    pub records: Vec<CycleRecord>,
}

/// One experiment's full output.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub merged: Report,
    pub per_replication: Vec<Report>,
    pub cycles: Vec<ReplicationCycles>,
    /// Event traces when requested (debug scale).
    pub traces: Vec<Option<Vec<engine::TraceRow>>>,
}

fn lambda_summaries(cfg: &NetworkConfig) -> Vec<LambdaReport> {
    cfg.classes
        .iter()
        .enumerate()
        .filter_map(|(class, spec)| {
            let ia = spec.interarrival.as_ref()?;
            Some(match ia.decompose(spec.decompose.lambda) {
                Ok(dec) => LambdaReport {
                    class,
                    rate: Some(dec.lambda),
                    split_weight: Some(dec.q_bar),
                },
                Err(_) => LambdaReport { class, rate: None, split_weight: None },
            })
        })
        .collect()
}

/// Check the config for `mode` and map failures onto typed errors.
fn preflight(spec: &RunSpec) -> Result<ValidationReport, RunError> {
    let report = validate_assumptions(&spec.config, spec.mode);
    for check in report.hard_failures() {
        match check.name.as_str() {
            "structure" | "traffic" => {
                return Err(RunError::Config(check.detail.clone()));
            }
            "decomposability" => {
                return Err(RunError::ModeUnavailable(check.detail.clone()));
            }
            _ => {}
        }
    }
    if !spec.allow_unstable {
        if let Some(traffic) = &report.traffic {
            if let Some((station, rho)) = traffic.first_unstable() {
                return Err(RunError::Unstable { station, rho });
            }
        }
    }
    Ok(report)
}

fn mode_cycles(result: &RunResult, mode: RegenMode) -> (Option<f64>, &[CycleRecord]) {
    match mode {
        RegenMode::Primary => (
            result.primary_delay_end,
            result.primary_cycles.as_deref().unwrap_or(&[]),
        ),
        RegenMode::Alternative => (
            result.alternative_delay_end,
            result.alternative_cycles.as_deref().unwrap_or(&[]),
        ),
    }
}

fn report_skeleton(spec: &RunSpec) -> Report {
    Report {
        schema: REPORT_SCHEMA.to_string(),
        mode: spec.mode,
        functional: spec.functional.to_string(),
        horizon: spec.horizon,
        master_seed: spec.seed,
        replication: None,
        replications: spec.replications,
        ci_level: spec.level,
        lambda_per_class: lambda_summaries(&spec.config),
        n_cycles: 0,
        total_cycle_time: 0.0,
        beta: None,
        s: None,
        tavc: None,
        b: None,
        avsde: None,
        ci: None,
        time_average: 0.0,
        delay_dropped: 0.0,
        events: 0,
        warnings: Vec::new(),
    }
}

fn fill_estimates(report: &mut Report, acc: &EstimatorAccumulator, level: f64) {
    report.n_cycles = acc.n;
    report.total_cycle_time = acc.sum_t;
    match beta_hat(acc) {
        Ok(beta) => report.beta = Some(beta),
        Err(e) => report.warnings.push(format!("point estimate unavailable: {e}")),
    }
    match s_hat(acc) {
        Ok(s) => {
            report.s = Some(s);
            report.tavc = Some(s * s);
        }
        Err(e) => report.warnings.push(format!("variance estimate unavailable: {e}")),
    }
    if let Ok(b) = b_hat(acc) {
        report.b = Some(b);
    }
    match avsde_hat(acc) {
        Ok(k) => report.avsde = Some(k),
        Err(e) => report
            .warnings
            .push(format!("variance-of-variance estimate unavailable: {e}")),
    }
    if let Ok((lo, hi)) = confidence_interval(acc, level) {
        report.ci = Some([lo, hi]);
    }
}

fn assemble_outcome(spec: &RunSpec, results: Vec<RunResult>, mode: RegenMode) -> RunOutcome {
    let mut merged_acc = EstimatorAccumulator::new();
    let mut per_replication = Vec::with_capacity(results.len());
    let mut cycles = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    let mut integral_sum = 0.0;
    let mut horizon_sum = 0.0;
    let mut delay_sum = 0.0;
    let mut events_sum = 0u64;
    let mut no_regen_reps = Vec::new();

    for (rep, result) in results.into_iter().enumerate() {
        let rep = rep as u64;
        let (delay_end, records) = mode_cycles(&result, mode);
        let mut acc = EstimatorAccumulator::from_cycles(records.iter());
        acc.horizon_used = result.horizon;

        let mut rep_report = report_skeleton(spec);
        rep_report.mode = mode;
        rep_report.replication = Some(rep);
        rep_report.replications = 1;
        rep_report.time_average = result.integral_h / result.horizon;
        rep_report.delay_dropped = delay_end.unwrap_or(result.horizon);
        rep_report.events = result.events;
        if records.is_empty() {
            no_regen_reps.push(rep);
            rep_report
                .warnings
                .push("no completed regeneration cycles in this replication".into());
        }
        fill_estimates(&mut rep_report, &acc, spec.level);

        integral_sum += result.integral_h;
        horizon_sum += result.horizon;
        delay_sum += rep_report.delay_dropped;
        events_sum += result.events;
        merged_acc.merge(&acc);

        cycles.push(ReplicationCycles {
            replication: rep,
            start: delay_end.unwrap_or(f64::NAN),
            records: records.to_vec(),
        });
        traces.push(result.trace);
        per_replication.push(rep_report);
    }

    let mut merged = report_skeleton(spec);
    merged.mode = mode;
    merged.time_average = integral_sum / horizon_sum;
    merged.delay_dropped = delay_sum;
    merged.events = events_sum;
    if !no_regen_reps.is_empty() {
        merged.warnings.push(format!(
            "no completed regeneration cycles in replications {no_regen_reps:?}"
        ));
    }
    fill_estimates(&mut merged, &merged_acc, spec.level);

    RunOutcome { merged, per_replication, cycles, traces }
}

fn simulate(spec: &RunSpec, opts: &RunOptions) -> Result<Vec<RunResult>, RunError> {
    (0..spec.replications)
        .into_par_iter()
        .map(|rep| {
            engine::run(&spec.config, spec.seed, rep, opts)
                .map_err(|e| RunError::Engine(e.to_string()))
        })
        .collect()
}

/// Run replications under the requested mode and merge the reports.
pub fn execute(spec: &RunSpec) -> Result<RunOutcome, RunError> {
    preflight(spec)?;
    let opts = RunOptions {
        horizon: spec.horizon,
        functional: spec.functional,
        collect_primary: spec.mode == RegenMode::Primary,
        collect_alternative: spec.mode == RegenMode::Alternative,
        record_trace: spec.record_trace,
    };
    let results = simulate(spec, &opts)?;
    Ok(assemble_outcome(spec, results, spec.mode))
}

/// One row of a rate sweep.
#[derive(Debug)]
pub struct SweepRow {
    pub factor: f64,
    pub outcome: RunOutcome,
}

/// Re-run the request with every tunable extraction rate set to
/// `factor * minimal` for each factor, common seeds across factors.
///
/// Classes whose law fixes its own rate (pre-split sums) and classes with
/// no split at all keep their configured behavior.
pub fn sweep_lambda(spec: &RunSpec, factors: &[f64]) -> Result<Vec<SweepRow>, RunError> {
    if factors.is_empty() {
        return Err(RunError::Config("sweep needs at least one factor".into()));
    }
    if let Some(&f) = factors.iter().find(|&&f| !f.is_finite() || f < 1.0) {
        return Err(RunError::Config(format!(
            "sweep factors must be finite and >= 1, got {f}"
        )));
    }
    let mut rows = Vec::with_capacity(factors.len());
    for &factor in factors {
        let mut scaled = spec.clone();
        for class in scaled.config.classes.iter_mut() {
            if let Some(InterarrivalSpec::Plain(_)) = &class.interarrival {
                let choice = LambdaChoice::Scaled(factor);
                if class.interarrival.as_ref().unwrap().decompose(choice).is_ok() {
                    class.decompose.lambda = choice;
                }
            }
        }
        let outcome = execute(&scaled)?;
        rows.push(SweepRow { factor, outcome });
    }
    Ok(rows)
}

/// Both regeneration designs measured on the *same* sample paths: one pass
/// per replication with both detectors live, so the comparison is free of
/// between-run noise.
pub struct ModeComparison {
    pub primary: RunOutcome,
    pub alternative: RunOutcome,
}

pub fn compare_modes(spec: &RunSpec) -> Result<ModeComparison, RunError> {
    let mut primary_spec = spec.clone();
    primary_spec.mode = RegenMode::Primary;
    preflight(&primary_spec)?;
    let mut alternative_spec = spec.clone();
    alternative_spec.mode = RegenMode::Alternative;
    preflight(&alternative_spec)?;

    let opts = RunOptions {
        horizon: spec.horizon,
        functional: spec.functional,
        collect_primary: true,
        collect_alternative: true,
        record_trace: spec.record_trace,
    };
    let results = simulate(spec, &opts)?;
    let alternative = assemble_outcome(&alternative_spec, results.clone(), RegenMode::Alternative);
    let primary = assemble_outcome(&primary_spec, results, RegenMode::Primary);
    Ok(ModeComparison { primary, alternative })
}

/// Validation reports for both designs, as one serializable document.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationOutput {
    pub schema: String,
    pub primary: ValidationReport,
    pub alternative: ValidationReport,
}

pub fn validation_output(cfg: &NetworkConfig) -> ValidationOutput {
    ValidationOutput {
        schema: VALIDATE_SCHEMA.to_string(),
        primary: validate_assumptions(cfg, RegenMode::Primary),
        alternative: validate_assumptions(cfg, RegenMode::Alternative),
    }
}

/// One self-verification check.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of the verification battery.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: String,
    pub passed: bool,
    pub checks: Vec<VerifyCheck>,
}

/// The standard battery of interarrival laws exercised by verification:
/// one light-tailed law with an exact split identity, two power-law tails,
/// a hyperexponential, a lognormal, and a heavy Weibull that requires
/// truncation.
pub fn verification_families() -> Vec<DensityFamily> {
    vec![
        DensityFamily::gamma(2.0, 3.0).unwrap(),
        DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap(),
        DensityFamily::pareto_lomax(10.0, 1.0 / 9.0).unwrap(),
        DensityFamily::hyper_exp2(0.5, 2.0 / 3.0, 2.0).unwrap(),
        DensityFamily::lognormal(0.0, 2.0 / 3.0).unwrap(),
        DensityFamily::weibull(0.5, 1.0).unwrap(),
    ]
}

/// Run the self-verification battery: the hand-checked estimator values,
/// grid-vs-closed-form rate bounds, the exact split identity of the
/// gamma(2) law, analytic queueing formula consistency, and
/// law-preservation checks at the minimal and doubled rates.
///
/// `law_samples` controls the sample size of each law check (100_000 for
/// full confidence; smaller for a quick look).
pub fn verify_battery(law_samples: usize, seed: u64) -> VerifyReport {
    let mut checks = Vec::new();

    // Hand-checked two-cycle estimator values.
    {
        let cycles = [
            CycleRecord { index: 0, tau: 1.0, r: 2.0 },
            CycleRecord { index: 1, tau: 3.0, r: 4.0 },
        ];
        let acc = EstimatorAccumulator::from_cycles(cycles.iter());
        let beta = beta_hat(&acc).unwrap();
        let s = s_hat(&acc).unwrap();
        let b = b_hat(&acc).unwrap();
        let k = avsde_hat(&acc).unwrap();
        let ok = (beta - 1.5).abs() < 1e-12
            && (s - 0.125f64.sqrt()).abs() < 1e-12
            && (b + 0.5).abs() < 1e-12
            && (k - 0.140625).abs() < 1e-12;
        checks.push(VerifyCheck {
            name: "estimator-micro-oracle".into(),
            passed: ok,
            detail: format!("beta={beta}, s={s}, b={b}, avsde={k}"),
        });
    }

    // Numeric rate-bound scan vs closed forms.
    {
        let mut worst: f64 = 0.0;
        let mut detail = String::new();
        for fam in verification_families() {
            let LambdaF::Finite(closed) = fam.lambda_f() else {
                // The heavy Weibull diverges; scan its truncated tail.
                let LambdaF::Infinite { truncation: Some(cutoff) } = fam.lambda_f() else {
                    unreachable!("battery families are decomposable")
                };
                let tail = DensityFamily::truncated_tail(fam.clone(), cutoff).unwrap();
                let closed = tail.lambda_f().finite().unwrap();
                let scan = lambda_f_grid(&tail, 4000);
                let rel = (scan.sup - closed).abs() / closed;
                worst = worst.max(rel);
                continue;
            };
            let scan = lambda_f_grid(&fam, 4000);
            let rel = (scan.sup - closed).abs() / closed;
            if rel > worst {
                worst = rel;
                detail = format!("worst at {fam:?}");
            }
        }
        checks.push(VerifyCheck {
            name: "rate-bound-grid-agreement".into(),
            passed: worst < 1e-6,
            detail: format!("worst relative gap {worst:.3e} {detail}"),
        });
    }

    // Exact identity: the complementary law of gamma(2, 3) at rate 3 is
    // exponential(3).
    {
        let fam = DensityFamily::gamma(2.0, 3.0).unwrap();
        let dec = crate::decomp::build_decomposition(&fam, LambdaChoice::Minimal).unwrap();
        let expo = DensityFamily::exponential(3.0).unwrap();
        let mut sup: f64 = 0.0;
        for i in 0..1000 {
            let x = (i as f64 + 0.5) / 1000.0 * 5.0;
            sup = sup.max((dec.g_cdf(x) - expo.cdf(x)).abs());
        }
        checks.push(VerifyCheck {
            name: "gamma-exponential-identity".into(),
            passed: sup < 1e-9,
            detail: format!("sup gap {sup:.3e} over 1000 grid points"),
        });
    }

    // Analytic-formula consistency.
    {
        let exp_service = DensityFamily::exponential(1.0).unwrap();
        let pk = mg1_mean_number(0.5, &exp_service).unwrap();
        let mm1 = mm1_mean_number(0.5, 1.0).unwrap();
        checks.push(VerifyCheck {
            name: "queueing-formula-consistency".into(),
            passed: (pk - mm1).abs() < 1e-12,
            detail: format!("exponential-service mean {pk} vs birth-death mean {mm1}"),
        });
    }

    // Law preservation at minimal and doubled extraction rates.
    for (i, fam) in verification_families().iter().enumerate() {
        for (j, &factor) in [1.0, 2.0].iter().enumerate() {
            let check_seed = seed ^ ((i as u64) << 8) ^ ((j as u64) << 16);
            let rep = decomposition_law_check(
                fam,
                LambdaChoice::Scaled(factor),
                law_samples,
                0.001,
                check_seed,
            )
            .expect("battery families decompose");
            checks.push(VerifyCheck {
                name: format!("law-preservation-{i}-x{factor}"),
                passed: rep.passed,
                detail: format!(
                    "{}: KS {:.5} vs threshold {:.5} at rate {:.5}",
                    rep.family, rep.ks_statistic, rep.threshold, rep.lambda
                ),
            });
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { schema: VERIFY_SCHEMA.to_string(), passed, checks }
}

/// Render per-cycle records as CSV (`replication,index,t_end,tau,r`).
pub fn cycles_to_csv(cycles: &[ReplicationCycles]) -> String {
    let mut out = String::from("replication,index,t_end,tau,r\n");
    for rep in cycles {
        let mut t = rep.start;
        for rec in &rep.records {
            t += rec.tau;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                rep.replication, rec.index, t, rec.tau, rec.r
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ClassSpec, DecomposeDirective};

    fn mm1_spec(horizon: f64, seed: u64) -> RunSpec {
        let cfg = NetworkConfig {
            stations: 1,
            classes: vec![ClassSpec {
                station: 0,
                interarrival: Some(InterarrivalSpec::Plain(
                    DensityFamily::exponential(0.5).unwrap(),
                )),
                service: DensityFamily::exponential(1.0).unwrap(),
                decompose: DecomposeDirective::default(),
            }],
            routing: vec![vec![0.0]],
        };
        RunSpec::new(cfg, horizon, seed)
    }

    #[test]
    fn mm1_execute_produces_sane_report() {
        let mut spec = mm1_spec(50_000.0, 7);
        spec.replications = 2;
        let out = execute(&spec).unwrap();
        let m = &out.merged;
        assert_eq!(m.schema, REPORT_SCHEMA);
        assert!(m.n_cycles > 1_000);
        let beta = m.beta.unwrap();
        assert!((beta - 1.0).abs() < 0.1, "beta {beta}");
        let [lo, hi] = m.ci.unwrap();
        assert!(lo < beta && beta < hi);
        assert!(m.avsde.unwrap() > 0.0);
        assert_eq!(out.per_replication.len(), 2);
        assert_eq!(out.cycles.len(), 2);
        // Exponential interarrival: the split is total, rate = the law's.
        assert_eq!(m.lambda_per_class[0].rate, Some(0.5));
        assert_eq!(m.lambda_per_class[0].split_weight, Some(1.0));
    }

    #[test]
    fn merged_report_is_deterministic() {
        let mut spec = mm1_spec(10_000.0, 3);
        spec.replications = 4;
        let a = execute(&spec).unwrap();
        let b = execute(&spec).unwrap();
        assert_eq!(
            serde_json::to_string(&a.merged).unwrap(),
            serde_json::to_string(&b.merged).unwrap()
        );
    }

    #[test]
    fn unstable_config_refused_without_override() {
        let mut spec = mm1_spec(1_000.0, 1);
        spec.config.classes[0].service = DensityFamily::exponential(0.4).unwrap();
        match execute(&spec) {
            Err(RunError::Unstable { station: 0, rho }) => assert!(rho > 1.0),
            other => panic!("expected instability refusal, got {other:?}"),
        }
        spec.allow_unstable = true;
        let out = execute(&spec).unwrap();
        assert!(out.merged.time_average > 0.0);
    }

    #[test]
    fn alternative_mode_unavailable_for_uniform_first_class() {
        let mut spec = mm1_spec(1_000.0, 1);
        spec.config.classes[0].interarrival = Some(InterarrivalSpec::Plain(
            DensityFamily::uniform(0.0, 40.0).unwrap(),
        ));
        spec.config.classes[0].service = DensityFamily::exponential(0.25).unwrap();
        spec.mode = RegenMode::Alternative;
        assert!(matches!(execute(&spec), Err(RunError::ModeUnavailable(_))));
        assert!(matches!(compare_modes(&spec), Err(RunError::ModeUnavailable(_))));
        spec.mode = RegenMode::Primary;
        execute(&spec).unwrap();
    }

    #[test]
    fn compare_modes_shares_the_sample_path() {
        let mut spec = mm1_spec(20_000.0, 11);
        spec.replications = 2;
        let cmp = compare_modes(&spec).unwrap();
        // Same paths, same whole-horizon time averages.
        assert_eq!(
            cmp.primary.merged.time_average,
            cmp.alternative.merged.time_average
        );
        assert_eq!(cmp.primary.merged.events, cmp.alternative.merged.events);
        // Exponential first class: identical regeneration sets past the
        // delay, so cycle counts differ by at most the delay's cycle.
        let np = cmp.primary.merged.n_cycles;
        let na = cmp.alternative.merged.n_cycles;
        assert!(np.abs_diff(na) <= 2 * spec.replications, "{np} vs {na}");
        assert_eq!(cmp.primary.merged.mode, RegenMode::Primary);
        assert_eq!(cmp.alternative.merged.mode, RegenMode::Alternative);
    }

    #[test]
    fn sweep_factor_validation() {
        let spec = mm1_spec(1_000.0, 1);
        assert!(matches!(sweep_lambda(&spec, &[]), Err(RunError::Config(_))));
        assert!(matches!(
            sweep_lambda(&spec, &[0.5]),
            Err(RunError::Config(_))
        ));
        let rows = sweep_lambda(&spec, &[1.0, 2.0]).unwrap();
        assert_eq!(rows.len(), 2);
        // Exponential law: rate scales with the factor.
        assert_eq!(rows[0].outcome.merged.lambda_per_class[0].rate, Some(0.5));
        assert_eq!(rows[1].outcome.merged.lambda_per_class[0].rate, Some(1.0));
    }

    #[test]
    fn validation_output_covers_both_modes() {
        let spec = mm1_spec(1_000.0, 1);
        let out = validation_output(&spec.config);
        assert_eq!(out.primary.mode, RegenMode::Primary);
        assert_eq!(out.alternative.mode, RegenMode::Alternative);
        assert!(out.primary.mode_available());
        // Exponential first class: both designs available.
        assert!(out.alternative.mode_available());
        serde_json::to_string_pretty(&out).unwrap();
    }

    #[test]
    fn quick_verify_battery_passes() {
        let report = verify_battery(20_000, 0xBEEF);
        for check in &report.checks {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
        assert!(report.passed);
        serde_json::to_string(&report).unwrap();
    }

    #[test]
    fn cycles_csv_shape() {
        let cycles = vec![ReplicationCycles {
            replication: 0,
            start: 0.0,
            records: vec![
                CycleRecord { index: 0, tau: 2.0, r: 3.0 },
                CycleRecord { index: 1, tau: 1.5, r: 0.5 },
            ],
        }];
        let csv = cycles_to_csv(&cycles);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "replication,index,t_end,tau,r");
        assert_eq!(lines[1], "0,0,2,2,3");
        assert_eq!(lines[2], "0,1,3.5,1.5,0.5");
    }
}
