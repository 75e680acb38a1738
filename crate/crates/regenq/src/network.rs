//! Network topology, class data, traffic equations, and the checkable
//! assumptions behind regenerative estimation.
//!
//! A network has `d` single-server FIFO stations and `K` customer classes;
//! class `k` is served at station `station[k]`. Exogenous classes (those
//! with an interarrival law) must form a prefix `0..L` of the class list;
//! class 0 is the distinguished class whose arrivals mark primary
//! regenerations. On service completion a class-`k` customer becomes class
//! `l` with probability `P[k][l]` or leaves with the row deficit
//! `1 - sum_l P[k][l]`.
//!
//! JSON shape:
//!
//! ```json
//! {
//!   "stations": 2,
//!   "classes": [
//!     { "station": 0,
//!       "interarrival": { "kind": "exponential", "rate": 1.0 },
//!       "service": { "kind": "gamma", "shape": 2.0, "rate": 4.0 },
//!       "decompose": { "lambda": "minimal" } },
//!     { "station": 1, "interarrival": null,
//!       "service": { "kind": "exponential", "rate": 2.0 } }
//!   ],
//!   "routing": [[0.0, 1.0], [0.0, 0.0]]
//! }
//! ```
//!
//! All indices are zero-based. An interarrival law may also be given in
//! pre-split form `{"exp_plus": {"rate": 10.0, "addend": {...}}}`, meaning
//! the sum of an exponential and an independent addend with the
//! exponential component explicit; such laws are decomposable by
//! construction and their rate is part of the law (not tunable).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::{build_decomposition, DecompError, Decomposition, LambdaChoice};
use crate::dist::DensityFamily;
use crate::regen::RegenMode;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("routing matrix is singular: {0}")]
    SingularRouting(String),
    #[error("station {station} is unstable: utilization {rho:.4} >= 1")]
    Unstable { station: usize, rho: f64 },
}

/// Exponential-plus-addend interarrival law: `xi = E + addend` with
/// `E ~ Exp(rate)` independent of the addend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpPlusLaw {
    pub rate: f64,
    pub addend: DensityFamily,
}

/// An exogenous interarrival law: either a plain density (split via the
/// decomposition machinery) or an explicitly pre-split sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InterarrivalSpec {
    ExpPlus { exp_plus: ExpPlusLaw },
    Plain(DensityFamily),
}

impl InterarrivalSpec {
    /// Mean interarrival time; the reciprocal is the exogenous rate.
    pub fn mean(&self) -> f64 {
        match self {
            InterarrivalSpec::Plain(fam) => fam.mean(),
            InterarrivalSpec::ExpPlus { exp_plus } => {
                1.0 / exp_plus.rate + exp_plus.addend.mean()
            }
        }
    }

    /// Whether every realization is finite and positive-mean etc. is the
    /// family's own validation; here only structural checks.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            InterarrivalSpec::Plain(fam) => fam.validate().map_err(|e| e.to_string()),
            InterarrivalSpec::ExpPlus { exp_plus } => {
                if !(exp_plus.rate > 0.0 && exp_plus.rate.is_finite()) {
                    return Err(format!(
                        "pre-split exponential rate must be positive and finite, got {}",
                        exp_plus.rate
                    ));
                }
                exp_plus.addend.validate().map_err(|e| e.to_string())
            }
        }
    }

    /// Realize the exponential-component split of this law.
    ///
    /// Pre-split laws carry their rate in the law itself: only the minimal
    /// (or trivially scaled-by-one) choice is accepted, since scaling the
    /// rate would change the distribution rather than the decomposition.
    pub fn decompose(&self, choice: LambdaChoice) -> Result<Decomposition, DecompError> {
        match self {
            InterarrivalSpec::Plain(fam) => build_decomposition(fam, choice),
            InterarrivalSpec::ExpPlus { exp_plus } => {
                let identity = match choice {
                    LambdaChoice::Minimal => true,
                    LambdaChoice::Scaled(s) => s == 1.0,
                    LambdaChoice::Explicit(v) => v == exp_plus.rate,
                };
                if !identity {
                    return Err(DecompError::NotDecomposable(
                        "a pre-split law fixes its exponential rate; rate scaling does not \
                         apply"
                            .to_string(),
                    ));
                }
                Decomposition::pre_split(exp_plus.rate, exp_plus.addend.clone())
            }
        }
    }

    /// Whether a split with an exponential component exists at all.
    pub fn is_decomposable(&self) -> bool {
        self.decompose(LambdaChoice::Minimal).is_ok()
    }
}

/// Per-class rate selection directive, `{"lambda": "minimal" | {"scale": s}
/// | {"explicit": v}}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecomposeDirective {
    #[serde(default)]
    pub lambda: LambdaChoice,
}

/// One customer class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    /// Zero-based index of the station serving this class.
    pub station: usize,
    /// Exogenous interarrival law, or `null` for classes fed only by
    /// internal routing.
    #[serde(default)]
    pub interarrival: Option<InterarrivalSpec>,
    /// Service requirement law.
    pub service: DensityFamily,
    /// How to pick the extracted exponential rate for this class.
    #[serde(default)]
    pub decompose: DecomposeDirective,
}

/// A multiclass open network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub stations: usize,
    pub classes: Vec<ClassSpec>,
    /// `routing[k][l]` = probability a class-`k` completion becomes class
    /// `l`; the row deficit is the exit probability.
    pub routing: Vec<Vec<f64>>,
}

impl NetworkConfig {
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let cfg: NetworkConfig = serde_json::from_str(text)
            .map_err(|e| NetworkError::ConfigInvalid(format!("JSON parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Number of exogenous classes `L` (a prefix of the class list).
    pub fn exogenous_count(&self) -> usize {
        self.classes.iter().take_while(|c| c.interarrival.is_some()).count()
    }

    /// Structural validation: shapes, probabilities, law parameters, and
    /// the exogenous-prefix convention.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |msg: String| Err(NetworkError::ConfigInvalid(msg));
        if self.stations == 0 {
            return bad("need at least one station".into());
        }
        let k = self.classes.len();
        if k == 0 {
            return bad("need at least one class".into());
        }
        for (i, class) in self.classes.iter().enumerate() {
            if class.station >= self.stations {
                return bad(format!(
                    "class {i} references station {} but there are only {} stations",
                    class.station, self.stations
                ));
            }
            if let Err(e) = class.service.validate() {
                return bad(format!("class {i} service law: {e}"));
            }
            if let Some(ia) = &class.interarrival {
                if let Err(e) = ia.validate() {
                    return bad(format!("class {i} interarrival law: {e}"));
                }
                if !ia.mean().is_finite() {
                    return bad(format!(
                        "class {i} interarrival law has an infinite mean; its exogenous \
                         arrival rate would be zero"
                    ));
                }
            }
        }
        let l = self.exogenous_count();
        if l == 0 {
            return bad("no exogenous class: the network would stay empty forever".into());
        }
        if self.classes.iter().skip(l).any(|c| c.interarrival.is_some()) {
            return bad(
                "exogenous classes must form a prefix of the class list (a class with an \
                 interarrival law appears after one without)"
                    .into(),
            );
        }
        if self.routing.len() != k {
            return bad(format!(
                "routing matrix has {} rows for {k} classes",
                self.routing.len()
            ));
        }
        for (row_i, row) in self.routing.iter().enumerate() {
            if row.len() != k {
                return bad(format!(
                    "routing row {row_i} has {} entries for {k} classes",
                    row.len()
                ));
            }
            let mut sum = 0.0;
            for (col, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!(
                        "routing probability [{row_i}][{col}] = {p} outside [0, 1]"
                    ));
                }
                sum += p;
            }
            if sum > 1.0 + 1e-12 {
                return bad(format!("routing row {row_i} sums to {sum} > 1"));
            }
        }
        Ok(())
    }
}

/// Solution of the traffic equations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficSolution {
    /// Exogenous arrival rate per class (zero for internally fed classes).
    pub exogenous_rates: Vec<f64>,
    /// Effective (total) arrival rate per class.
    pub effective_rates: Vec<f64>,
    /// Nominal load per station.
    pub utilizations: Vec<f64>,
}

impl TrafficSolution {
    pub fn is_stable(&self) -> bool {
        self.utilizations.iter().all(|&rho| rho < 1.0)
    }

    /// First overloaded station, if any.
    pub fn first_unstable(&self) -> Option<(usize, f64)> {
        self.utilizations
            .iter()
            .enumerate()
            .find(|(_, &rho)| rho >= 1.0)
            .map(|(i, &rho)| (i, rho))
    }
}

/// Solve `sigma = alpha + P' sigma` for the effective rates and derive the
/// nominal station loads `rho_i = sum_{k at i} sigma_k E[S_k]`.
///
/// Direct dense solve (Gaussian elimination, partial pivoting); class
/// counts are small. The solution is verified to residual 1e-10 before it
/// is returned.
pub fn solve_traffic(cfg: &NetworkConfig) -> Result<TrafficSolution, NetworkError> {
    cfg.validate()?;
    let k = cfg.num_classes();
    let alpha: Vec<f64> = cfg
        .classes
        .iter()
        .map(|c| c.interarrival.as_ref().map_or(0.0, |ia| 1.0 / ia.mean()))
        .collect();

    // Rows of (I - P'): entry [k][l] = delta_kl - P[l][k].
    let mut m = vec![vec![0.0f64; k]; k];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = if r == c { 1.0 } else { 0.0 } - cfg.routing[c][r];
        }
    }
    let sigma = solve_dense(m, alpha.clone())
        .map_err(|pivot| {
            NetworkError::SingularRouting(format!(
                "I - P' has a vanishing pivot (column {pivot}); customers cycle forever"
            ))
        })?;

    // Residual check: sigma - alpha - P' sigma.
    let mut worst = 0.0f64;
    for r in 0..k {
        let mut inflow = alpha[r];
        for (row, &rate) in cfg.routing.iter().zip(&sigma) {
            inflow += row[r] * rate;
        }
        worst = worst.max((sigma[r] - inflow).abs());
    }
    if worst >= 1e-10 {
        return Err(NetworkError::SingularRouting(format!(
            "traffic solve residual {worst:.3e} exceeds 1e-10; system is near-singular"
        )));
    }

    let mut utilizations = vec![0.0f64; cfg.stations];
    for (class, spec) in cfg.classes.iter().enumerate() {
        utilizations[spec.station] += sigma[class] * spec.service.mean();
    }
    Ok(TrafficSolution { exogenous_rates: alpha, effective_rates: sigma, utilizations })
}

/// Gaussian elimination with partial pivoting; `Err(col)` on a vanishing
/// pivot.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Result<Vec<f64>, usize> {
    let n = rhs.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot_row][col].abs() < 1e-12 {
            return Err(col);
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..n {
            let (upper, lower) = m.split_at_mut(row);
            let pivot_row = &upper[col];
            let target = &mut lower[0];
            let factor = target[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (t, p) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                *t -= factor * p;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Outcome class of one assumption check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// Violation invalidates the requested run mode.
    Error,
    /// Estimates remain computable but a theoretical guarantee is
    /// unverified.
    Warning,
    /// Recorded for the report only.
    Info,
}

/// One named check with its outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub severity: Severity,
    pub detail: String,
}

/// The full validation outcome for a config under a regeneration mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mode: RegenMode,
    pub checks: Vec<AssumptionCheck>,
    /// Traffic solution when the routing system is solvable.
    pub traffic: Option<TrafficSolution>,
}

impl ValidationReport {
    /// Checks that failed at `Error` severity.
    pub fn hard_failures(&self) -> Vec<&AssumptionCheck> {
        self.checks
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Error)
            .collect()
    }

    /// True when the requested mode can run (instability excluded, which
    /// has its own override flag).
    pub fn mode_available(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.name != "stability")
            .all(|c| c.passed || c.severity != Severity::Error)
    }

    pub fn is_stable(&self) -> bool {
        self.traffic.as_ref().is_some_and(|t| t.is_stable())
    }
}

/// Largest `p` such that the family has finite moments of every order
/// below `p` (`inf` for light tails; the shape parameter for power-law
/// tails).
fn moment_order_bound(fam: &DensityFamily) -> f64 {
    match fam {
        DensityFamily::ParetoLomax { shape, .. } => *shape,
        DensityFamily::TruncatedTail { parent, .. } => moment_order_bound(parent),
        _ => f64::INFINITY,
    }
}

fn moment_order_of(spec: &InterarrivalSpec) -> f64 {
    match spec {
        InterarrivalSpec::Plain(fam) => moment_order_bound(fam),
        InterarrivalSpec::ExpPlus { exp_plus } => moment_order_bound(&exp_plus.addend),
    }
}

/// Fourth moments of the cycle pair `(R, tau)` are what the variance
/// diagnostics consume; a sufficient condition is finite primitive moments
/// of order `2 * 4 + 1`.
const REQUIRED_PRIMITIVE_MOMENT_ORDER: f64 = 9.0;

/// Run every checkable assumption for `mode` and collect the outcomes.
///
/// Checks, by name:
/// * `structure` — the structural validity of the config itself;
/// * `traffic` — the routing system solves;
/// * `stability` — every station load below one (error severity, but the
///   run layer may override it explicitly);
/// * `decomposability` — classes that must reach an exponential arrival
///   phase for `mode` actually can: all exogenous classes but the first
///   for primary, all of them for alternative;
/// * `moment-order` — interarrival and service laws keep enough moments
///   for fourth-moment cycle bounds (warning otherwise);
/// * `spread-out` — interarrival laws have density components (all
///   built-in families do; recorded for the report);
/// * `regeneration-reachable` — a first-class interarrival can exceed the
///   work it brings: passes structurally when the first class's law is
///   unbounded above or every service law has support reaching zero,
///   flagged unverified otherwise.
pub fn validate_assumptions(cfg: &NetworkConfig, mode: RegenMode) -> ValidationReport {
    let mut checks = Vec::new();

    let structural = cfg.validate();
    checks.push(AssumptionCheck {
        name: "structure".into(),
        passed: structural.is_ok(),
        severity: Severity::Error,
        detail: match &structural {
            Ok(()) => "config shape, index ranges, probabilities, and law parameters valid"
                .into(),
            Err(e) => e.to_string(),
        },
    });
    if structural.is_err() {
        return ValidationReport { mode, checks, traffic: None };
    }

    let traffic = match solve_traffic(cfg) {
        Ok(t) => {
            checks.push(AssumptionCheck {
                name: "traffic".into(),
                passed: true,
                severity: Severity::Error,
                detail: format!(
                    "effective rates {:?}",
                    t.effective_rates.iter().map(|r| (r * 1e6).round() / 1e6).collect::<Vec<_>>()
                ),
            });
            Some(t)
        }
        Err(e) => {
            checks.push(AssumptionCheck {
                name: "traffic".into(),
                passed: false,
                severity: Severity::Error,
                detail: e.to_string(),
            });
            None
        }
    };

    if let Some(t) = &traffic {
        let detail = t
            .utilizations
            .iter()
            .enumerate()
            .map(|(i, rho)| format!("station {i}: rho = {rho:.4}"))
            .collect::<Vec<_>>()
            .join("; ");
        checks.push(AssumptionCheck {
            name: "stability".into(),
            passed: t.is_stable(),
            severity: Severity::Error,
            detail,
        });
    }

    let l = cfg.exogenous_count();
    let needs_split_from = match mode {
        RegenMode::Primary => 1,
        RegenMode::Alternative => 0,
    };
    let mut blockers = Vec::new();
    for (k, class) in cfg.classes.iter().enumerate().take(l).skip(needs_split_from) {
        let ia = class.interarrival.as_ref().expect("exogenous prefix");
        if let Err(e) = ia.decompose(class.decompose.lambda) {
            blockers.push(format!("class {k}: {e}"));
        }
    }
    checks.push(AssumptionCheck {
        name: "decomposability".into(),
        passed: blockers.is_empty(),
        severity: Severity::Error,
        detail: if blockers.is_empty() {
            format!(
                "exponential components available for exogenous classes {}..{}",
                needs_split_from, l
            )
        } else {
            blockers.join("; ")
        },
    });

    let mut weakest = f64::INFINITY;
    let mut weakest_what = String::new();
    for (k, class) in cfg.classes.iter().enumerate() {
        if let Some(ia) = &class.interarrival {
            let p = moment_order_of(ia);
            if p < weakest {
                weakest = p;
                weakest_what = format!("class {k} interarrival");
            }
        }
        let p = moment_order_bound(&class.service);
        if p < weakest {
            weakest = p;
            weakest_what = format!("class {k} service");
        }
    }
    checks.push(AssumptionCheck {
        name: "moment-order".into(),
        passed: weakest > REQUIRED_PRIMITIVE_MOMENT_ORDER,
        severity: Severity::Warning,
        detail: if weakest.is_infinite() {
            "all moments of all primitive laws are finite".into()
        } else {
            format!(
                "{weakest_what} has moments only below order {weakest}; fourth-moment cycle \
                 bounds need order {REQUIRED_PRIMITIVE_MOMENT_ORDER}"
            )
        },
    });

    checks.push(AssumptionCheck {
        name: "spread-out".into(),
        passed: true,
        severity: Severity::Info,
        detail: "every built-in family has an absolutely continuous component".into(),
    });

    let first_unbounded = cfg.classes[0]
        .interarrival
        .as_ref()
        .map(|ia| match ia {
            InterarrivalSpec::Plain(fam) => fam.unbounded_above(),
            // An exponential summand makes the sum unbounded above.
            InterarrivalSpec::ExpPlus { .. } => true,
        })
        .unwrap_or(false);
    let services_reach_zero =
        cfg.classes.iter().all(|c| c.service.support_reaches_zero());
    checks.push(AssumptionCheck {
        name: "regeneration-reachable".into(),
        passed: first_unbounded || services_reach_zero,
        severity: Severity::Warning,
        detail: if first_unbounded {
            "first-class interarrival is unbounded above".into()
        } else if services_reach_zero {
            "every service law has support reaching zero".into()
        } else {
            "unverified: first-class interarrival is bounded and some service law is \
             bounded away from zero"
                .into()
        },
    });

    ValidationReport { mode, checks, traffic }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> DensityFamily {
        DensityFamily::exponential(rate).unwrap()
    }

    fn plain(fam: DensityFamily) -> Option<InterarrivalSpec> {
        Some(InterarrivalSpec::Plain(fam))
    }

    fn class(station: usize, ia: Option<InterarrivalSpec>, service: DensityFamily) -> ClassSpec {
        ClassSpec { station, interarrival: ia, service, decompose: DecomposeDirective::default() }
    }

    fn tandem() -> NetworkConfig {
        NetworkConfig {
            stations: 2,
            classes: vec![
                class(0, plain(exp(1.0)), exp(2.0)),
                class(1, None, exp(2.0)),
            ],
            routing: vec![vec![0.0, 1.0], vec![0.0, 0.0]],
        }
    }

    #[test]
    fn tandem_traffic_solution() {
        let t = solve_traffic(&tandem()).unwrap();
        assert_eq!(t.exogenous_rates, vec![1.0, 0.0]);
        assert!((t.effective_rates[0] - 1.0).abs() < 1e-12);
        assert!((t.effective_rates[1] - 1.0).abs() < 1e-12);
        assert!((t.utilizations[0] - 0.5).abs() < 1e-12);
        assert!((t.utilizations[1] - 0.5).abs() < 1e-12);
        assert!(t.is_stable());
    }

    #[test]
    fn single_class_no_routing() {
        let cfg = NetworkConfig {
            stations: 1,
            classes: vec![class(0, plain(exp(1.0 / 20.0)), exp(1.0 / 10.0))],
            routing: vec![vec![0.0]],
        };
        let t = solve_traffic(&cfg).unwrap();
        assert!((t.effective_rates[0] - 0.05).abs() < 1e-15);
        assert!((t.utilizations[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_class_feedback_geometric_series() {
        let cfg = NetworkConfig {
            stations: 1,
            classes: vec![class(0, plain(exp(1.0)), exp(10.0 / 3.0))],
            routing: vec![vec![0.5]],
        };
        let t = solve_traffic(&cfg).unwrap();
        assert!((t.effective_rates[0] - 2.0).abs() < 1e-12);
        assert!((t.utilizations[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn feedforward_matches_truncated_neumann_sum() {
        // With no cycles, (I - P')^{-1} alpha equals the finite sum of
        // routed flows; check the solver against explicit propagation.
        let cfg = NetworkConfig {
            stations: 3,
            classes: vec![
                class(0, plain(exp(0.8)), exp(4.0)),
                class(1, plain(exp(0.4)), exp(4.0)),
                class(2, None, exp(4.0)),
                class(0, None, exp(4.0)),
            ],
            routing: vec![
                vec![0.0, 0.3, 0.5, 0.0],
                vec![0.0, 0.0, 0.6, 0.2],
                vec![0.0, 0.0, 0.0, 0.7],
                vec![0.0, 0.0, 0.0, 0.0],
            ],
        };
        let t = solve_traffic(&cfg).unwrap();
        let alpha = [0.8, 0.4, 0.0, 0.0];
        let p = &cfg.routing;
        let mut expect = alpha;
        // Classes are topologically ordered, so one forward sweep settles.
        for k in 0..4 {
            for l in 0..4 {
                if p[k][l] > 0.0 {
                    expect[l] += p[k][l] * expect[k];
                }
            }
        }
        for (got, want) in t.effective_rates.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn conserving_feedback_row_is_singular() {
        // A class that routes to itself with probability one traps flow.
        let cfg = NetworkConfig {
            stations: 1,
            classes: vec![class(0, plain(exp(1.0)), exp(4.0))],
            routing: vec![vec![1.0]],
        };
        assert!(matches!(
            solve_traffic(&cfg),
            Err(NetworkError::SingularRouting(_))
        ));
    }

    #[test]
    fn structural_validation_failures() {
        let mut cfg = tandem();
        cfg.classes[0].station = 5;
        assert!(matches!(cfg.validate(), Err(NetworkError::ConfigInvalid(_))));

        let mut cfg = tandem();
        cfg.routing[0][1] = 1.5;
        assert!(cfg.validate().is_err());

        let mut cfg = tandem();
        cfg.routing[0] = vec![0.6, 0.6];
        assert!(cfg.validate().is_err());

        // Exogenous class after a null class breaks the prefix convention.
        let mut cfg = tandem();
        cfg.classes[0].interarrival = None;
        cfg.classes[1].interarrival = plain(exp(1.0));
        assert!(cfg.validate().is_err());

        // No exogenous class at all.
        let mut cfg = tandem();
        cfg.classes[0].interarrival = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_round_trip_with_null_and_exp_plus() {
        let text = r#"{
            "stations": 2,
            "classes": [
                { "station": 0,
                  "interarrival": { "exp_plus": {
                      "rate": 10.0,
                      "addend": { "kind": "weibull", "shape": 2.0, "rate": 0.04453 } } },
                  "service": { "kind": "exponential", "rate": 0.25 } },
                { "station": 1,
                  "interarrival": { "kind": "gamma", "shape": 2.0, "rate": 3.0 },
                  "service": { "kind": "exponential", "rate": 2.0 },
                  "decompose": { "lambda": { "scale": 1.5 } } },
                { "station": 1, "interarrival": null,
                  "service": { "kind": "exponential", "rate": 6.0 } }
            ],
            "routing": [
                [0.0, 0.0, 0.5],
                [0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0]
            ]
        }"#;
        let cfg = NetworkConfig::from_json(text).unwrap();
        assert_eq!(cfg.exogenous_count(), 2);
        assert!(matches!(
            cfg.classes[0].interarrival,
            Some(InterarrivalSpec::ExpPlus { .. })
        ));
        assert_eq!(
            cfg.classes[1].decompose.lambda,
            LambdaChoice::Scaled(1.5)
        );
        let round: NetworkConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn exp_plus_mean_and_decomposition_rules() {
        let ia = InterarrivalSpec::ExpPlus {
            exp_plus: ExpPlusLaw {
                rate: 10.0,
                addend: DensityFamily::weibull(2.0, 1.0).unwrap(),
            },
        };
        // Mean = 1/10 + Gamma(1.5)/1.
        let gamma_1_5 = statrs::function::gamma::gamma(1.5);
        assert!((ia.mean() - (0.1 + gamma_1_5)).abs() < 1e-12);
        assert!(ia.decompose(LambdaChoice::Minimal).is_ok());
        assert!(ia.decompose(LambdaChoice::Scaled(1.0)).is_ok());
        assert!(ia.decompose(LambdaChoice::Scaled(2.0)).is_err());
        assert!(ia.decompose(LambdaChoice::Explicit(10.0)).is_ok());
        assert!(ia.decompose(LambdaChoice::Explicit(11.0)).is_err());
    }

    #[test]
    fn mode_availability_depends_on_first_class() {
        // First class uniform: primary available, alternative not.
        let mut cfg = tandem();
        cfg.classes[0].interarrival = plain(DensityFamily::uniform(0.0, 40.0).unwrap());
        cfg.classes[0].service = exp(0.12);
        let primary = validate_assumptions(&cfg, RegenMode::Primary);
        assert!(primary.mode_available(), "{:#?}", primary.checks);
        let alt = validate_assumptions(&cfg, RegenMode::Alternative);
        assert!(!alt.mode_available());
        assert!(alt
            .hard_failures()
            .iter()
            .any(|c| c.name == "decomposability"));
    }

    #[test]
    fn stability_flagged_but_distinct_from_mode_availability() {
        let mut cfg = tandem();
        cfg.classes[1].service = exp(0.9); // rho_1 = 1/0.9 > 1
        let rep = validate_assumptions(&cfg, RegenMode::Primary);
        assert!(!rep.is_stable());
        assert!(rep.mode_available());
        assert!(rep.checks.iter().any(|c| c.name == "stability" && !c.passed));
    }

    #[test]
    fn moment_order_warning_for_heavy_tails() {
        let mut cfg = tandem();
        cfg.classes[0].interarrival =
            plain(DensityFamily::pareto_lomax(3.0, 0.5).unwrap());
        let rep = validate_assumptions(&cfg, RegenMode::Primary);
        let check = rep.checks.iter().find(|c| c.name == "moment-order").unwrap();
        assert!(!check.passed);
        assert_eq!(check.severity, Severity::Warning);
        // Shape 10 keeps ninth moments finite, which suffices.
        cfg.classes[0].interarrival =
            plain(DensityFamily::pareto_lomax(10.0, 1.0 / 9.0).unwrap());
        let rep = validate_assumptions(&cfg, RegenMode::Primary);
        assert!(rep.checks.iter().find(|c| c.name == "moment-order").unwrap().passed);
    }

    #[test]
    fn reachability_check_branches() {
        // Bounded interarrival + service bounded away from zero: unverified.
        let cfg = NetworkConfig {
            stations: 1,
            classes: vec![class(
                0,
                plain(DensityFamily::uniform(0.0, 40.0).unwrap()),
                DensityFamily::uniform(1.0, 2.0).unwrap(),
            )],
            routing: vec![vec![0.0]],
        };
        let rep = validate_assumptions(&cfg, RegenMode::Primary);
        let check = rep
            .checks
            .iter()
            .find(|c| c.name == "regeneration-reachable")
            .unwrap();
        assert!(!check.passed);
        assert_eq!(check.severity, Severity::Warning);
    }
}
