//! Independent reference values and distributional checks.
//!
//! Everything here is computed by a route disjoint from the simulator and
//! the samplers it exercises: closed-form queueing formulas, textbook
//! direct samplers (Erlang sums, Box-Muller, explicit inversions), and
//! Kolmogorov-Smirnov machinery. These are the yardsticks the test suite
//! measures the engine against.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::decomp::{build_decomposition, DecompError, Decomposition, LambdaChoice, SplitStreams};
use crate::dist::DensityFamily;
use crate::streams::{substream, Purpose};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("queue is unstable: utilization {rho} >= 1")]
    Unstable { rho: f64 },
    #[error("service law has an infinite second moment")]
    InfiniteSecondMoment,
}

/// Steady-state mean number in system for M/M/1: `rho / (1 - rho)`.
pub fn mm1_mean_number(arrival_rate: f64, service_rate: f64) -> Result<f64, OracleError> {
    assert!(arrival_rate > 0.0 && service_rate > 0.0);
    let rho = arrival_rate / service_rate;
    if rho >= 1.0 {
        return Err(OracleError::Unstable { rho });
    }
    Ok(rho / (1.0 - rho))
}

/// Steady-state mean number in system for M/G/1 (Pollaczek-Khinchine):
/// `rho + lambda^2 E[S^2] / (2 (1 - rho))`.
pub fn mg1_mean_number(
    arrival_rate: f64,
    service: &DensityFamily,
) -> Result<f64, OracleError> {
    assert!(arrival_rate > 0.0);
    let es = service.mean();
    let es2 = service.second_moment();
    if !es2.is_finite() {
        return Err(OracleError::InfiniteSecondMoment);
    }
    let rho = arrival_rate * es;
    if rho >= 1.0 {
        return Err(OracleError::Unstable { rho });
    }
    Ok(rho + arrival_rate * arrival_rate * es2 / (2.0 * (1.0 - rho)))
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|` against a CDF.
pub fn one_sample_ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_n - G_m|`, tie-safe: the
/// gap is recorded only after both empirical CDFs have absorbed every copy
/// of the current value.
pub fn two_sample_ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let by_value = |x: &f64, y: &f64| x.partial_cmp(y).expect("samples must not contain NaN");
    a.sort_by(by_value);
    b.sort_by(by_value);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Kolmogorov asymptotic critical constant `c(alpha) = sqrt(ln(2/alpha)/2)`.
fn ks_critical_constant(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    ((2.0 / alpha).ln() / 2.0).sqrt()
}

/// Rejection threshold for the one-sample statistic at significance `alpha`.
pub fn ks_one_sample_threshold(n: usize, alpha: f64) -> f64 {
    ks_critical_constant(alpha) / (n as f64).sqrt()
}

/// Rejection threshold for the two-sample statistic at significance `alpha`.
pub fn ks_two_sample_threshold(n: usize, m: usize, alpha: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    ks_critical_constant(alpha) * ((nf + mf) / (nf * mf)).sqrt()
}

/// Draw from `family` through a textbook construction that shares no code
/// with [`DensityFamily::sample`] or the split-decomposition path: Erlang
/// sums for integer/half-integer gamma shapes, Box-Muller normals for the
/// lognormal, explicit exponential transforms for Pareto and Weibull, and
/// closed-form conditional tails for truncated laws.
///
/// Panics for parameter ranges with no such construction (non-half-integer
/// gamma shapes, truncated tails of parents without a closed-form tail).
pub fn direct_sample<R: Rng + ?Sized>(family: &DensityFamily, rng: &mut R) -> f64 {
    fn std_exp<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        -(1.0 - u).ln()
    }
    fn box_muller<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    match family {
        DensityFamily::Exponential { rate } => std_exp(rng) / rate,
        DensityFamily::Gamma { shape, rate } => {
            let whole = shape.floor();
            let frac = shape - whole;
            let mut x = 0.0;
            for _ in 0..whole as u64 {
                x += std_exp(rng);
            }
            if frac.abs() < 1e-12 {
                // Integer shape: Erlang sum alone.
            } else if (frac - 0.5).abs() < 1e-12 {
                // Half-integer: add a chi-square(1)/2 term.
                let z = box_muller(rng);
                x += 0.5 * z * z;
            } else {
                panic!("direct gamma sampler needs an integer or half-integer shape, got {shape}");
            }
            x / rate
        }
        DensityFamily::Lognormal { mu, sigma_sq } => {
            (mu + sigma_sq.sqrt() * box_muller(rng)).exp()
        }
        DensityFamily::ParetoLomax { shape, scale } => {
            ((std_exp(rng) / shape).exp() - 1.0) / scale
        }
        DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
            let u: f64 = rng.random();
            if u < *p1 {
                std_exp(rng) / rate1
            } else {
                std_exp(rng) / rate2
            }
        }
        DensityFamily::Weibull { shape, rate } => std_exp(rng).powf(1.0 / shape) / rate,
        DensityFamily::Uniform { lo, hi } => {
            let u: f64 = rng.random();
            lo + u * (hi - lo)
        }
        DensityFamily::TruncatedTail { parent, cutoff } => match parent.as_ref() {
            // Survival beyond x >= cutoff relative to the cutoff has closed
            // form for these parents; invert it with a standard exponential.
            DensityFamily::Weibull { shape, rate } => {
                let base = (rate * cutoff).powf(*shape);
                (base + std_exp(rng)).powf(1.0 / shape) / rate
            }
            DensityFamily::Exponential { rate } => cutoff + std_exp(rng) / rate,
            DensityFamily::ParetoLomax { shape, scale } => {
                ((1.0 + scale * cutoff) * (std_exp(rng) / shape).exp() - 1.0) / scale
            }
            DensityFamily::Lognormal { mu, sigma_sq } => {
                let sigma = sigma_sq.sqrt();
                let normal = Normal::new(0.0, 1.0).expect("unit normal");
                let head = normal.cdf((cutoff.ln() - mu) / sigma);
                let u: f64 = rng.random();
                (mu + sigma * normal.inverse_cdf(head + u * (1.0 - head))).exp()
            }
            other => panic!("no independent direct sampler for a truncated {other:?} tail"),
        },
    }
}

/// Result of one law-preservation check.
#[derive(Clone, Debug, Serialize)]
pub struct LawCheckReport {
    /// Debug rendering of the interarrival family checked.
    pub family: String,
    /// Exponential-component rate used by the decomposition.
    pub lambda: f64,
    /// Mixing weight of the split branch.
    pub q_bar: f64,
    /// Samples drawn from each side.
    pub n: usize,
    pub ks_statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Check that the split interarrival sampler preserves the original law:
/// draw `n` totals `Z + E` (or residuals) through the decomposition, `n`
/// values through the independent direct sampler, and compare by two-sample
/// KS at significance `alpha`.
pub fn decomposition_law_check(
    family: &DensityFamily,
    choice: LambdaChoice,
    n: usize,
    alpha: f64,
    seed: u64,
) -> Result<LawCheckReport, DecompError> {
    let decomp = build_decomposition(family, choice)?;
    Ok(law_check_of(&decomp, n, alpha, seed))
}

/// The same check for an already-built decomposition (pre-split laws
/// included, where the "original" is the addend and the exponential part is
/// checked by its contribution to the total).
pub fn law_check_of(decomp: &Decomposition, n: usize, alpha: f64, seed: u64) -> LawCheckReport {
    let mut streams = SplitStreams {
        mixture: substream(seed, 0, 0, Purpose::Mixture),
        exp_component: substream(seed, 0, 0, Purpose::ExpComponent),
        z_component: substream(seed, 0, 0, Purpose::ZComponent),
        residual: substream(seed, 0, 0, Purpose::Residual),
    };
    let mut via_split: Vec<f64> =
        (0..n).map(|_| decomp.sample_interarrival(&mut streams).total()).collect();

    let mut direct_rng = substream(seed, 1, 0, Purpose::Oracle);
    let mut via_direct: Vec<f64> = (0..n)
        .map(|_| {
            let base = direct_sample(&decomp.original, &mut direct_rng);
            if decomp.is_pre_split() {
                // The original is the addend; the law is the addend plus an
                // independent exponential of the declared rate.
                let u: f64 = direct_rng.random();
                base - (1.0 - u).ln() / decomp.lambda
            } else {
                base
            }
        })
        .collect();

    let ks = two_sample_ks_statistic(&mut via_split, &mut via_direct);
    let threshold = ks_two_sample_threshold(n, n, alpha);
    let family = if decomp.is_pre_split() {
        format!("Exp({}) + {:?}", decomp.lambda, decomp.original)
    } else {
        format!("{:?}", decomp.original)
    };
    LawCheckReport {
        family,
        lambda: decomp.lambda,
        q_bar: decomp.q_bar,
        n,
        ks_statistic: ks,
        passed: ks < threshold,
        threshold,
    }
}
