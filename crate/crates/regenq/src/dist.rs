//! Distribution families with densities, CDFs, samplers, and the `lambda_f`
//! functional that decides decomposability.
//!
//! A family belongs to the decomposable class when its density `f` lives on
//! a half line `[a, inf)`, is differentiable on the interior, and
//! `lambda_f = sup_{x>a} (-f'(x)/f(x))` is finite. `1/lambda_f` is the
//! largest exponential mean extractable from `f`. Derivatives are closed
//! form per family, never finite-differenced, so `lambda_f` is exact; a grid
//! scan with local refinement exists as an opt-in diagnostic.
//!
//! Parameterizations follow the heavy-tail conventions used throughout the
//! crate: Pareto is the Lomax form with tail `(1 + scale*x)^(-shape)`, and
//! Weibull has tail `exp(-(rate*x)^shape)`.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};
use thiserror::Error;

/// Errors from family construction and family-level queries.
#[derive(Debug, Error, PartialEq)]
pub enum DistError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
}

/// Result of the `lambda_f` functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaF {
    /// `sup(-f'/f)` is finite: the family is decomposable as-is.
    Finite(f64),
    /// The sup diverges. When `truncation` is set, conditioning the law on
    /// `[cutoff, inf)` yields a decomposable tail family.
    Infinite { truncation: Option<f64> },
}

impl LambdaF {
    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            LambdaF::Finite(v) => Some(v),
            LambdaF::Infinite { .. } => None,
        }
    }
}

/// The distribution families understood by the simulator.
///
/// All supports sit on the nonnegative half line (interarrival and service
/// times). `TruncatedTail` is the parent law conditioned on `[cutoff, inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityFamily {
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    Lognormal {
        mu: f64,
        sigma_sq: f64,
    },
    #[serde(alias = "pareto")]
    ParetoLomax {
        shape: f64,
        scale: f64,
    },
    #[serde(alias = "hyperexp2")]
    HyperExp2 {
        p1: f64,
        rate1: f64,
        rate2: f64,
    },
    Weibull {
        shape: f64,
        rate: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    TruncatedTail {
        parent: Box<DensityFamily>,
        cutoff: f64,
    },
}

/// The truncation point for a heavy Weibull tail (`shape < 1`):
/// `(1/(rate * shape^shape)) * (1-shape)^(1/(2*shape))`. Conditioning the
/// Weibull on values at or above this point produces a family with finite
/// `lambda_f`.
pub fn weibull_truncation_point(shape: f64, rate: f64) -> Result<f64, DistError> {
    if !(shape > 0.0 && shape < 1.0) {
        return Err(DistError::InvalidShape(format!(
            "tail truncation applies to Weibull shape in (0,1), got {shape}"
        )));
    }
    if rate <= 0.0 {
        return Err(DistError::InvalidParameters(format!(
            "Weibull rate must be positive, got {rate}"
        )));
    }
    Ok((1.0 - shape).powf(1.0 / (2.0 * shape)) / (rate * shape.powf(shape)))
}

fn require(cond: bool, msg: &str) -> Result<(), DistError> {
    if cond {
        Ok(())
    } else {
        Err(DistError::InvalidParameters(msg.to_string()))
    }
}

impl DensityFamily {
    /// Exponential with the given rate.
    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        require(rate > 0.0, "exponential rate must be positive")?;
        Ok(DensityFamily::Exponential { rate })
    }

    /// Gamma with shape `alpha` and rate `gamma` (mean `alpha/gamma`).
    pub fn gamma(shape: f64, rate: f64) -> Result<Self, DistError> {
        require(shape > 0.0 && rate > 0.0, "gamma shape and rate must be positive")?;
        Ok(DensityFamily::Gamma { shape, rate })
    }

    /// Lognormal: `ln X ~ Normal(mu, sigma_sq)`.
    pub fn lognormal(mu: f64, sigma_sq: f64) -> Result<Self, DistError> {
        require(sigma_sq > 0.0, "lognormal sigma_sq must be positive")?;
        require(mu.is_finite(), "lognormal mu must be finite")?;
        Ok(DensityFamily::Lognormal { mu, sigma_sq })
    }

    /// Pareto in Lomax form: tail `(1 + scale*x)^(-shape)`.
    pub fn pareto_lomax(shape: f64, scale: f64) -> Result<Self, DistError> {
        require(shape > 0.0 && scale > 0.0, "pareto shape and scale must be positive")?;
        Ok(DensityFamily::ParetoLomax { shape, scale })
    }

    /// Two-phase hyperexponential; normalized so that `rate1 > rate2`.
    pub fn hyper_exp2(p1: f64, rate1: f64, rate2: f64) -> Result<Self, DistError> {
        require(p1 > 0.0 && p1 < 1.0, "hyperexponential p1 must lie in (0,1)")?;
        require(rate1 > 0.0 && rate2 > 0.0, "hyperexponential rates must be positive")?;
        require(rate1 != rate2, "hyperexponential rates must differ (use exponential)")?;
        if rate1 > rate2 {
            Ok(DensityFamily::HyperExp2 { p1, rate1, rate2 })
        } else {
            Ok(DensityFamily::HyperExp2 { p1: 1.0 - p1, rate1: rate2, rate2: rate1 })
        }
    }

    /// Weibull with tail `exp(-(rate*x)^shape)` (mean `Gamma(1+1/shape)/rate`).
    pub fn weibull(shape: f64, rate: f64) -> Result<Self, DistError> {
        require(shape > 0.0 && rate > 0.0, "weibull shape and rate must be positive")?;
        Ok(DensityFamily::Weibull { shape, rate })
    }

    /// Uniform on `[lo, hi]`, `0 <= lo < hi`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistError> {
        require(lo >= 0.0 && hi > lo, "uniform needs 0 <= lo < hi")?;
        Ok(DensityFamily::Uniform { lo, hi })
    }

    /// The parent law conditioned on `[cutoff, inf)`. Nested truncations
    /// collapse onto the outermost cutoff.
    pub fn truncated_tail(parent: DensityFamily, cutoff: f64) -> Result<Self, DistError> {
        let (root, root_cut) = match parent {
            DensityFamily::TruncatedTail { parent: inner, cutoff: c } => (*inner, Some(c)),
            other => (other, None),
        };
        let edge = root.support_edge();
        require(
            cutoff > edge && cutoff >= root_cut.unwrap_or(edge),
            "truncation cutoff must lie strictly inside the parent support",
        )?;
        if let DensityFamily::Uniform { hi, .. } = root {
            require(cutoff < hi, "truncation cutoff must lie strictly inside the parent support")?;
        }
        require(root.survival(cutoff) > 0.0, "parent has no mass at or above the cutoff")?;
        Ok(DensityFamily::TruncatedTail { parent: Box::new(root), cutoff })
    }

    /// Validate the parameters of a deserialized family.
    pub fn validate(&self) -> Result<(), DistError> {
        match self.clone() {
            DensityFamily::Exponential { rate } => Self::exponential(rate).map(|_| ()),
            DensityFamily::Gamma { shape, rate } => Self::gamma(shape, rate).map(|_| ()),
            DensityFamily::Lognormal { mu, sigma_sq } => Self::lognormal(mu, sigma_sq).map(|_| ()),
            DensityFamily::ParetoLomax { shape, scale } => {
                Self::pareto_lomax(shape, scale).map(|_| ())
            }
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                Self::hyper_exp2(p1, rate1, rate2).map(|_| ())
            }
            DensityFamily::Weibull { shape, rate } => Self::weibull(shape, rate).map(|_| ()),
            DensityFamily::Uniform { lo, hi } => Self::uniform(lo, hi).map(|_| ()),
            DensityFamily::TruncatedTail { parent, cutoff } => {
                parent.validate()?;
                Self::truncated_tail((*parent).clone(), cutoff).map(|_| ())
            }
        }
    }

    /// Normalize deserialized parameters (hyperexponential rate ordering,
    /// nested truncation flattening) and validate.
    pub fn normalized(self) -> Result<Self, DistError> {
        match self {
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => Self::hyper_exp2(p1, rate1, rate2),
            DensityFamily::TruncatedTail { parent, cutoff } => {
                let parent = parent.normalized()?;
                Self::truncated_tail(parent, cutoff)
            }
            other => {
                other.validate()?;
                Ok(other)
            }
        }
    }

    /// Left edge `a` of the support.
    pub fn support_edge(&self) -> f64 {
        match self {
            DensityFamily::Uniform { lo, .. } => *lo,
            DensityFamily::TruncatedTail { cutoff, .. } => *cutoff,
            _ => 0.0,
        }
    }

    /// Whether the support extends to infinity.
    pub fn unbounded_above(&self) -> bool {
        match self {
            DensityFamily::Uniform { .. } => false,
            DensityFamily::TruncatedTail { parent, .. } => parent.unbounded_above(),
            _ => true,
        }
    }

    /// Whether the support edge is 0 (used by the service-floor check).
    pub fn support_reaches_zero(&self) -> bool {
        self.support_edge() == 0.0
    }

    /// Density `f(x)`, zero left of the support edge.
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            DensityFamily::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            DensityFamily::Gamma { shape, rate } => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match shape.partial_cmp(&1.0).expect("finite shape") {
                        std::cmp::Ordering::Less => f64::INFINITY,
                        std::cmp::Ordering::Equal => *rate,
                        std::cmp::Ordering::Greater => 0.0,
                    }
                } else {
                    let a = *shape;
                    (a * rate.ln() + (a - 1.0) * x.ln() - rate * x - gamma(a).ln()).exp()
                }
            }
            DensityFamily::Lognormal { mu, sigma_sq } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let sd = sigma_sq.sqrt();
                    let z = (x.ln() - mu) / sd;
                    (-0.5 * z * z).exp() / (x * sd * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
            DensityFamily::ParetoLomax { shape, scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    shape * scale * (1.0 + scale * x).powf(-(shape + 1.0))
                }
            }
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                if x < 0.0 {
                    0.0
                } else {
                    p1 * rate1 * (-rate1 * x).exp() + (1.0 - p1) * rate2 * (-rate2 * x).exp()
                }
            }
            DensityFamily::Weibull { shape, rate } => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match shape.partial_cmp(&1.0).expect("finite shape") {
                        std::cmp::Ordering::Less => f64::INFINITY,
                        std::cmp::Ordering::Equal => *rate,
                        std::cmp::Ordering::Greater => 0.0,
                    }
                } else {
                    let y = rate * x;
                    shape * rate * y.powf(shape - 1.0) * (-y.powf(*shape)).exp()
                }
            }
            DensityFamily::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            DensityFamily::TruncatedTail { parent, cutoff } => {
                if x < *cutoff {
                    0.0
                } else {
                    parent.pdf(x) / parent.survival(*cutoff)
                }
            }
        }
    }

    /// CDF `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DensityFamily::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(*shape, rate * x)
                }
            }
            DensityFamily::Uniform { lo, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            _ => {
                if x <= self.support_edge() {
                    0.0
                } else {
                    1.0 - self.survival(x)
                }
            }
        }
    }

    /// Survival `P(X > x)`, computed directly for tail accuracy.
    pub fn survival(&self, x: f64) -> f64 {
        let a = self.support_edge();
        if x <= a {
            return 1.0;
        }
        match self {
            DensityFamily::Exponential { rate } => (-rate * x).exp(),
            DensityFamily::Gamma { shape, rate } => gamma_ur(*shape, rate * x),
            DensityFamily::Lognormal { mu, sigma_sq } => {
                let z = (x.ln() - mu) / sigma_sq.sqrt();
                0.5 * erfc(z / std::f64::consts::SQRT_2)
            }
            DensityFamily::ParetoLomax { shape, scale } => (1.0 + scale * x).powf(-shape),
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                p1 * (-rate1 * x).exp() + (1.0 - p1) * (-rate2 * x).exp()
            }
            DensityFamily::Weibull { shape, rate } => (-(rate * x).powf(*shape)).exp(),
            DensityFamily::Uniform { lo, hi } => {
                if x >= *hi {
                    0.0
                } else {
                    (hi - x) / (hi - lo)
                }
            }
            DensityFamily::TruncatedTail { parent, cutoff } => {
                parent.survival(x) / parent.survival(*cutoff)
            }
        }
    }

    /// Right limit of the density at the support edge, `f(a+)`. May be
    /// `+inf` (e.g. Weibull with shape < 1).
    pub fn edge_density(&self) -> f64 {
        match self {
            DensityFamily::Exponential { rate } => *rate,
            DensityFamily::Gamma { shape, rate } => {
                match shape.partial_cmp(&1.0).expect("finite shape") {
                    std::cmp::Ordering::Less => f64::INFINITY,
                    std::cmp::Ordering::Equal => *rate,
                    std::cmp::Ordering::Greater => 0.0,
                }
            }
            DensityFamily::Lognormal { .. } => 0.0,
            DensityFamily::ParetoLomax { shape, scale } => shape * scale,
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                p1 * rate1 + (1.0 - p1) * rate2
            }
            DensityFamily::Weibull { shape, rate } => {
                match shape.partial_cmp(&1.0).expect("finite shape") {
                    std::cmp::Ordering::Less => f64::INFINITY,
                    std::cmp::Ordering::Equal => *rate,
                    std::cmp::Ordering::Greater => 0.0,
                }
            }
            DensityFamily::Uniform { lo, hi } => 1.0 / (hi - lo),
            DensityFamily::TruncatedTail { parent, cutoff } => {
                parent.pdf(*cutoff) / parent.survival(*cutoff)
            }
        }
    }

    /// `-f'(x)/f(x)` on the support interior, closed form per family.
    pub fn neg_log_density_deriv(&self, x: f64) -> f64 {
        match self {
            DensityFamily::Exponential { rate } => *rate,
            DensityFamily::Gamma { shape, rate } => rate - (shape - 1.0) / x,
            DensityFamily::Lognormal { mu, sigma_sq } => {
                (1.0 + (x.ln() - mu) / sigma_sq) / x
            }
            DensityFamily::ParetoLomax { shape, scale } => {
                (shape + 1.0) * scale / (1.0 + scale * x)
            }
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                let w1 = p1 * rate1 * (-rate1 * x).exp();
                let w2 = (1.0 - p1) * rate2 * (-rate2 * x).exp();
                (rate1 * w1 + rate2 * w2) / (w1 + w2)
            }
            DensityFamily::Weibull { shape, rate } => {
                (1.0 - shape) / x + shape * rate * (rate * x).powf(shape - 1.0)
            }
            DensityFamily::Uniform { .. } => 0.0,
            DensityFamily::TruncatedTail { parent, .. } => parent.neg_log_density_deriv(x),
        }
    }

    /// `lambda_f = sup_{x>a} (-f'/f)`, closed form.
    pub fn lambda_f(&self) -> LambdaF {
        match self {
            DensityFamily::Exponential { rate } => LambdaF::Finite(*rate),
            DensityFamily::Gamma { shape, rate } => {
                if *shape >= 1.0 {
                    // -f'/f = rate - (shape-1)/x climbs to `rate` as x grows.
                    LambdaF::Finite(*rate)
                } else {
                    // (1-shape)/x blows up at the edge; no shipped truncation rule.
                    LambdaF::Infinite { truncation: None }
                }
            }
            DensityFamily::Lognormal { mu, sigma_sq } => {
                // Attained at x* = exp(mu + 1 - sigma_sq).
                LambdaF::Finite((sigma_sq - mu - 1.0).exp() / sigma_sq)
            }
            DensityFamily::ParetoLomax { shape, scale } => {
                // Decreasing in x; sup at the edge.
                LambdaF::Finite((shape + 1.0) * scale)
            }
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                let (p2, l1, l2) = (1.0 - p1, *rate1, *rate2);
                LambdaF::Finite((p1 * l1 * l1 + p2 * l2 * l2) / (p1 * l1 + p2 * l2))
            }
            DensityFamily::Weibull { shape, rate } => {
                if *shape == 1.0 {
                    LambdaF::Finite(*rate)
                } else if *shape < 1.0 {
                    // Diverges at the edge, but the tail beyond the standard
                    // truncation point is decomposable.
                    let cutoff = weibull_truncation_point(*shape, *rate)
                        .expect("shape in (0,1) by branch");
                    LambdaF::Infinite { truncation: Some(cutoff) }
                } else {
                    // Lighter than every exponential tail.
                    LambdaF::Infinite { truncation: None }
                }
            }
            DensityFamily::Uniform { .. } => LambdaF::Infinite { truncation: None },
            DensityFamily::TruncatedTail { parent, cutoff } => {
                let c = *cutoff;
                match &**parent {
                    DensityFamily::Exponential { rate } => LambdaF::Finite(*rate),
                    DensityFamily::Gamma { shape, rate } => {
                        if *shape >= 1.0 {
                            LambdaF::Finite(*rate)
                        } else {
                            LambdaF::Finite(rate + (1.0 - shape) / c)
                        }
                    }
                    DensityFamily::Lognormal { mu, sigma_sq } => {
                        let x_star = (mu + 1.0 - sigma_sq).exp();
                        if c <= x_star {
                            LambdaF::Finite((sigma_sq - mu - 1.0).exp() / sigma_sq)
                        } else {
                            LambdaF::Finite(parent.neg_log_density_deriv(c))
                        }
                    }
                    DensityFamily::ParetoLomax { shape, scale } => {
                        LambdaF::Finite((shape + 1.0) * scale / (1.0 + scale * c))
                    }
                    DensityFamily::HyperExp2 { .. } => {
                        // -f'/f decreasing for exponential mixtures.
                        LambdaF::Finite(parent.neg_log_density_deriv(c))
                    }
                    DensityFamily::Weibull { shape, .. } => {
                        if *shape <= 1.0 {
                            // Both terms of -f'/f decrease; sup at the cutoff.
                            LambdaF::Finite(parent.neg_log_density_deriv(c))
                        } else {
                            LambdaF::Infinite { truncation: None }
                        }
                    }
                    DensityFamily::Uniform { .. } => LambdaF::Infinite { truncation: None },
                    DensityFamily::TruncatedTail { .. } => {
                        unreachable!("nested truncations are flattened at construction")
                    }
                }
            }
        }
    }

    /// Mean; `+inf` when divergent.
    pub fn mean(&self) -> f64 {
        match self {
            DensityFamily::Exponential { rate } => 1.0 / rate,
            DensityFamily::Gamma { shape, rate } => shape / rate,
            DensityFamily::Lognormal { mu, sigma_sq } => (mu + 0.5 * sigma_sq).exp(),
            DensityFamily::ParetoLomax { shape, scale } => {
                if *shape > 1.0 {
                    1.0 / ((shape - 1.0) * scale)
                } else {
                    f64::INFINITY
                }
            }
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                p1 / rate1 + (1.0 - p1) / rate2
            }
            DensityFamily::Weibull { shape, rate } => gamma(1.0 + 1.0 / shape) / rate,
            DensityFamily::Uniform { lo, hi } => 0.5 * (lo + hi),
            DensityFamily::TruncatedTail { parent, cutoff } => {
                let c = *cutoff;
                match &**parent {
                    DensityFamily::Exponential { rate } => c + 1.0 / rate,
                    DensityFamily::ParetoLomax { shape, scale } => {
                        if *shape > 1.0 {
                            c + (1.0 + scale * c) / ((shape - 1.0) * scale)
                        } else {
                            f64::INFINITY
                        }
                    }
                    DensityFamily::Weibull { shape, rate } => {
                        // E[X ; X > c] = Gamma(1+1/shape) * Q(1+1/shape, (rate*c)^shape) / rate.
                        let s = 1.0 + 1.0 / shape;
                        let z = (rate * c).powf(*shape);
                        gamma(s) * gamma_ur(s, z) / (rate * parent.survival(c))
                    }
                    DensityFamily::Uniform { hi, .. } => 0.5 * (c + hi),
                    _ => c + tail_integral(|x| parent.survival(x), c, parent.characteristic_scale())
                        / parent.survival(c),
                }
            }
        }
    }

    /// Second moment; `+inf` when divergent.
    pub fn second_moment(&self) -> f64 {
        match self {
            DensityFamily::Exponential { rate } => 2.0 / (rate * rate),
            DensityFamily::Gamma { shape, rate } => shape * (shape + 1.0) / (rate * rate),
            DensityFamily::Lognormal { mu, sigma_sq } => (2.0 * mu + 2.0 * sigma_sq).exp(),
            DensityFamily::ParetoLomax { shape, scale } => {
                if *shape > 2.0 {
                    2.0 / ((shape - 1.0) * (shape - 2.0) * scale * scale)
                } else {
                    f64::INFINITY
                }
            }
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                2.0 * (p1 / (rate1 * rate1) + (1.0 - p1) / (rate2 * rate2))
            }
            DensityFamily::Weibull { shape, rate } => gamma(1.0 + 2.0 / shape) / (rate * rate),
            DensityFamily::Uniform { lo, hi } => (hi * hi + hi * lo + lo * lo) / 3.0,
            DensityFamily::TruncatedTail { parent, cutoff } => {
                let c = *cutoff;
                match &**parent {
                    DensityFamily::Exponential { rate } => {
                        // (c + Y)^2 with Y ~ Exp(rate), by memorylessness.
                        c * c + 2.0 * c / rate + 2.0 / (rate * rate)
                    }
                    DensityFamily::ParetoLomax { shape, scale } => {
                        if *shape > 2.0 {
                            // X - c | X > c is Lomax(shape, scale/(1+scale*c)).
                            let sc = scale / (1.0 + scale * c);
                            let m1 = 1.0 / ((shape - 1.0) * sc);
                            let m2 = 2.0 / ((shape - 1.0) * (shape - 2.0) * sc * sc);
                            c * c + 2.0 * c * m1 + m2
                        } else {
                            f64::INFINITY
                        }
                    }
                    DensityFamily::Weibull { shape, rate } => {
                        let s = 1.0 + 2.0 / shape;
                        let z = (rate * c).powf(*shape);
                        gamma(s) * gamma_ur(s, z) / (rate * rate * parent.survival(c))
                    }
                    DensityFamily::Uniform { hi, .. } => (hi * hi + hi * c + c * c) / 3.0,
                    _ => {
                        // E[X^2 ; X > c] = c^2 S(c) + int_c^inf 2 x S(x) dx.
                        let sc = parent.survival(c);
                        let tail = tail_integral(
                            |x| 2.0 * x * parent.survival(x),
                            c,
                            parent.characteristic_scale(),
                        );
                        c * c + tail / sc
                    }
                }
            }
        }
    }

    /// A finite length scale for brackets and grids: the mean when finite,
    /// otherwise the median.
    pub fn characteristic_scale(&self) -> f64 {
        let m = self.mean();
        if m.is_finite() {
            return m;
        }
        match self {
            DensityFamily::ParetoLomax { shape, scale } => {
                (f64::powf(2.0, 1.0 / shape) - 1.0) / scale
            }
            DensityFamily::TruncatedTail { parent, cutoff } => match &**parent {
                DensityFamily::ParetoLomax { shape, scale } => {
                    let sc = scale / (1.0 + scale * cutoff);
                    cutoff + (f64::powf(2.0, 1.0 / shape) - 1.0) / sc
                }
                _ => cutoff * 2.0,
            },
            _ => 1.0,
        }
    }

    /// One draw, inverse-transform or via well-tested library samplers.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DensityFamily::Exponential { rate } => {
                rand_distr::Exp::new(*rate).expect("validated rate").sample(rng)
            }
            DensityFamily::Gamma { shape, rate } => {
                rand_distr::Gamma::new(*shape, 1.0 / rate).expect("validated params").sample(rng)
            }
            DensityFamily::Lognormal { mu, sigma_sq } => {
                rand_distr::LogNormal::new(*mu, sigma_sq.sqrt())
                    .expect("validated params")
                    .sample(rng)
            }
            DensityFamily::ParetoLomax { shape, scale } => {
                let u: f64 = rng.random();
                ((1.0 - u).powf(-1.0 / shape) - 1.0) / scale
            }
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                let rate = if rng.random::<f64>() < *p1 { *rate1 } else { *rate2 };
                rand_distr::Exp::new(rate).expect("validated rate").sample(rng)
            }
            DensityFamily::Weibull { shape, rate } => {
                rand_distr::Weibull::new(1.0 / rate, *shape)
                    .expect("validated params")
                    .sample(rng)
            }
            DensityFamily::Uniform { lo, hi } => rng.random_range(*lo..*hi),
            DensityFamily::TruncatedTail { parent, cutoff } => {
                let u: f64 = rng.random();
                sample_tail_conditional(parent, *cutoff, u)
            }
        }
    }
}

/// Inverse-transform draw from `parent | parent >= cutoff` at uniform `u`.
fn sample_tail_conditional(parent: &DensityFamily, cutoff: f64, u: f64) -> f64 {
    match parent {
        DensityFamily::Exponential { rate } => cutoff - (1.0 - u).ln() / rate,
        DensityFamily::ParetoLomax { shape, scale } => {
            ((1.0 + scale * cutoff) * (1.0 - u).powf(-1.0 / shape) - 1.0) / scale
        }
        DensityFamily::Weibull { shape, rate } => {
            let z = (rate * cutoff).powf(*shape) - (1.0 - u).ln();
            z.powf(1.0 / shape) / rate
        }
        DensityFamily::Uniform { hi, .. } => cutoff + u * (hi - cutoff),
        _ => {
            // Generic monotone inversion of the conditional survival.
            let target = parent.survival(cutoff) * (1.0 - u);
            let scale = parent.characteristic_scale().max(f64::MIN_POSITIVE);
            let mut hi = cutoff + scale;
            let mut guard = 0;
            while parent.survival(hi) > target && guard < 2000 {
                hi = cutoff + 2.0 * (hi - cutoff);
                guard += 1;
            }
            let mut lo = cutoff;
            let tol = 1e-12 * scale;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if parent.survival(mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

/// `int_from^inf g(x) dx` for a smooth, eventually negligible integrand:
/// composite Simpson over windows of width `scale`, stopping once a window
/// contributes a negligible fraction.
fn tail_integral(g: impl Fn(f64) -> f64, from: f64, scale: f64) -> f64 {
    let w = scale.max(f64::MIN_POSITIVE);
    let simpson = |lo: f64, hi: f64| {
        let n = 128;
        let h = (hi - lo) / n as f64;
        let mut s = g(lo) + g(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            s += if i % 2 == 1 { 4.0 * g(x) } else { 2.0 * g(x) };
        }
        s * h / 3.0
    };
    // Geometric panels over the first scale: uniform panels lose accuracy
    // where the integrand (or its derivatives) blows up at the edge, and
    // dyadic panels keep the per-panel relative error flat for power-law
    // behavior. The skipped sliver of width `w * 2^-80` is negligible for
    // any integrable singularity.
    let mut acc = 0.0;
    let mut lo_off = w * 2f64.powi(-80);
    while lo_off < w {
        let hi_off = (lo_off * 2.0).min(w);
        acc += simpson(from + lo_off, from + hi_off);
        lo_off = hi_off;
    }
    // Uniform windows beyond, until the tail stops contributing.
    let mut lo = from + w;
    for _ in 0..100_000 {
        let hi = lo + w;
        let window = simpson(lo, hi);
        acc += window;
        if window.abs() < 1e-13 * acc.abs() + 1e-300 {
            break;
        }
        lo = hi;
    }
    acc
}

/// Report of the opt-in numeric `lambda_f` diagnostic.
///
/// The scan is approximate by design: `-f'/f` need not be unimodal for
/// arbitrary densities, so the closed forms remain authoritative. For the
/// built-in families the scan agrees with the closed form to 1e-6 relative.
#[derive(Clone, Copy, Debug)]
pub struct GridScanReport {
    /// Best value of `-f'/f` found.
    pub sup: f64,
    /// Location of the best value.
    pub argmax: f64,
    /// Total points evaluated.
    pub evaluations: usize,
    /// Right-extension rounds taken beyond the initial 50-scale window.
    pub extensions: usize,
    /// Set when the value kept growing without bound (sup likely infinite).
    pub diverged: bool,
}

/// Numeric `sup(-f'/f)`: log-spaced grid over `(a, a + 50*scale]` with
/// right-edge extension (suprema approached at infinity), left-edge
/// refinement (suprema at the edge), and golden-section polish for interior
/// maxima.
pub fn lambda_f_grid(fam: &DensityFamily, points: usize) -> GridScanReport {
    let a = fam.support_edge();
    let scale = fam.characteristic_scale();
    let n = points.max(16);
    let phi = |x: f64| fam.neg_log_density_deriv(x);

    let lo_off = 1e-9 * scale;
    let mut hi_off = 50.0 * scale;
    let mut evals = 0usize;

    let mut best = f64::NEG_INFINITY;
    let mut best_x = a + lo_off;
    let mut best_at_left = false;
    let mut best_at_right = false;
    let mut neighbors = (a + lo_off, a + hi_off);

    {
        let ratio = (hi_off / lo_off).powf(1.0 / (n - 1) as f64);
        let mut off = lo_off;
        let mut prev_x = a + lo_off;
        let mut xs = Vec::with_capacity(n);
        for _ in 0..n {
            xs.push(a + off);
            off *= ratio;
        }
        for (i, &x) in xs.iter().enumerate() {
            let v = phi(x);
            evals += 1;
            if v > best {
                best = v;
                best_x = x;
                best_at_left = i == 0;
                best_at_right = i + 1 == n;
                let left = if i == 0 { prev_x } else { xs[i - 1] };
                let right = if i + 1 == n { x } else { xs[i + 1] };
                neighbors = (left, right);
            }
            prev_x = x;
        }
    }

    let mut extensions = 0usize;
    let mut diverged = false;

    // Sup approached as x -> inf (e.g. Gamma shape > 1): extend geometrically.
    // Each doubling roughly halves the remaining gap of a `L - c/x`-shaped
    // tail, so the gap left behind is about the last round's gain; stop only
    // once a whole round adds less than 1e-9 relative.
    while best_at_right && extensions < 200 {
        let new_hi = hi_off * 2.0;
        let m = (n / 8).max(64);
        let ratio = (new_hi / hi_off).powf(1.0 / m as f64);
        let mut off = hi_off;
        let before = best;
        for _ in 0..m {
            off *= ratio;
            let x = a + off;
            let v = phi(x);
            evals += 1;
            if v > best {
                best = v;
                best_x = x;
            }
        }
        hi_off = new_hi;
        extensions += 1;
        if best > 1e60 {
            diverged = true;
            break;
        }
        let round_gain = (best - before) / best.abs().max(f64::MIN_POSITIVE);
        if round_gain < 1e-9 {
            best_at_right = false;
        }
    }

    // Sup at the support edge (e.g. Pareto, hyperexponential): creep toward a.
    if best_at_left {
        let mut off = lo_off;
        for _ in 0..400 {
            off /= 4.0;
            if off < 1e-300 {
                break;
            }
            let x = a + off;
            let v = phi(x);
            evals += 1;
            if v > best {
                let gain = (v - best) / v.abs().max(f64::MIN_POSITIVE);
                best = v;
                best_x = x;
                if v > 1e60 {
                    diverged = true;
                    break;
                }
                if gain < 1e-12 {
                    break;
                }
            } else {
                break;
            }
        }
    } else if !diverged && !best_at_right && best_x > neighbors.0 && best_x < neighbors.1 {
        // Interior maximum (e.g. lognormal): golden-section polish.
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = neighbors;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = phi(x1);
        let mut f2 = phi(x2);
        for _ in 0..200 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = phi(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = phi(x1);
            }
            evals += 2;
            if (hi - lo) < 1e-13 * (a.abs() + hi.abs()) {
                break;
            }
        }
        let (v, x) = if f1 > f2 { (f1, x1) } else { (f2, x2) };
        if v > best {
            best = v;
            best_x = x;
        }
    }

    GridScanReport { sup: best, argmax: best_x, evaluations: evals, extensions, diverged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{substream, Purpose};

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }

    fn builtins() -> Vec<DensityFamily> {
        let weib = DensityFamily::weibull(0.5, 1.0).unwrap();
        let cut = weibull_truncation_point(0.5, 1.0).unwrap();
        vec![
            DensityFamily::exponential(1.3).unwrap(),
            DensityFamily::gamma(2.0, 3.0).unwrap(),
            DensityFamily::lognormal(0.0, 2.0 / 3.0).unwrap(),
            DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap(),
            DensityFamily::pareto_lomax(10.0, 1.0 / 9.0).unwrap(),
            DensityFamily::hyper_exp2(0.75, 0.15, 0.05).unwrap(),
            DensityFamily::hyper_exp2(0.5, 2.0 / 3.0, 2.0).unwrap(),
            DensityFamily::uniform(0.0, 40.0).unwrap(),
            weib.clone(),
            DensityFamily::truncated_tail(weib, cut).unwrap(),
        ]
    }

    #[test]
    fn pdf_edge_cases() {
        let g = DensityFamily::gamma(2.0, 3.0).unwrap();
        assert_eq!(g.pdf(0.0), 0.0);
        let p = DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap();
        assert!(rel_err(p.pdf(0.0), 10.0 / 18.0) < 1e-15);
        let u = DensityFamily::uniform(0.0, 40.0).unwrap();
        assert_eq!(u.pdf(50.0), 0.0);
        assert_eq!(u.pdf(20.0), 1.0 / 40.0);
    }

    #[test]
    fn density_mass_accounts_to_one() {
        for fam in builtins() {
            let a = fam.support_edge();
            let integral = if fam.unbounded_above() {
                // Edge-graded integral of the density over the whole support.
                tail_integral(|x| fam.pdf(x), a, fam.characteristic_scale())
            } else {
                // Bounded support: Simpson exactly to the top edge, where
                // the density may jump to zero.
                let hi = 40.0;
                let n = 200_000;
                let h = (hi - a) / n as f64;
                let mut s = fam.pdf(a) + fam.pdf(hi);
                for i in 1..n {
                    let x = a + i as f64 * h;
                    s += if i % 2 == 1 { 4.0 * fam.pdf(x) } else { 2.0 * fam.pdf(x) };
                }
                s * h / 3.0
            };
            assert!(
                (integral - 1.0).abs() < 1e-6,
                "mass {integral} for {fam:?}"
            );
        }
    }

    #[test]
    fn lambda_f_closed_forms() {
        let cases = vec![
            (DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap(), 11.0 / 18.0),
            (DensityFamily::gamma(2.0, 3.0).unwrap(), 3.0),
            (
                DensityFamily::lognormal(0.0, 2.0 / 3.0).unwrap(),
                1.5 * (-1.0f64 / 3.0).exp(),
            ),
            (DensityFamily::hyper_exp2(0.75, 0.15, 0.05).unwrap(), 0.14),
            (DensityFamily::exponential(1.3).unwrap(), 1.3),
            (DensityFamily::hyper_exp2(0.5, 2.0 / 3.0, 2.0).unwrap(), 5.0 / 3.0),
        ];
        for (fam, want) in cases {
            let got = fam.lambda_f().finite().expect("finite lambda_f");
            assert!(rel_err(got, want) < 1e-12, "{fam:?}: {got} vs {want}");
        }
        assert_eq!(
            DensityFamily::uniform(0.0, 40.0).unwrap().lambda_f(),
            LambdaF::Infinite { truncation: None }
        );
        match DensityFamily::weibull(0.5, 1.0).unwrap().lambda_f() {
            LambdaF::Infinite { truncation: Some(c) } => {
                assert!(rel_err(c, std::f64::consts::SQRT_2 / 2.0) < 1e-12);
            }
            other => panic!("expected truncatable divergence, got {other:?}"),
        }
        // Light Weibull tails are not decomposable at all.
        assert_eq!(
            DensityFamily::weibull(2.0, 1.0).unwrap().lambda_f(),
            LambdaF::Infinite { truncation: None }
        );
    }

    #[test]
    fn truncation_point_closed_form() {
        assert!(rel_err(
            weibull_truncation_point(0.5, 1.0).unwrap(),
            std::f64::consts::SQRT_2 / 2.0
        ) < 1e-12);
        assert!(rel_err(
            weibull_truncation_point(0.5, 2.0).unwrap(),
            std::f64::consts::SQRT_2 / 4.0
        ) < 1e-12);
        // The point scales as 1/rate and shrinks as shape -> 1:
        // (1-shape)^(1/(2*shape)) -> 0 while shape^shape -> 1.
        let mid = weibull_truncation_point(0.9, 1.0).unwrap();
        let near_one = weibull_truncation_point(0.999, 1.0).unwrap();
        assert!(near_one < mid && mid < std::f64::consts::SQRT_2 / 2.0);
        assert!(near_one < 0.05, "got {near_one}");
        assert!(matches!(
            weibull_truncation_point(1.0, 1.0),
            Err(DistError::InvalidShape(_))
        ));
    }

    #[test]
    fn truncated_weibull_lambda_f_matches_formula() {
        let shape = 0.5;
        let rate = 1.0;
        let cut = weibull_truncation_point(shape, rate).unwrap();
        let fam = DensityFamily::truncated_tail(
            DensityFamily::weibull(shape, rate).unwrap(),
            cut,
        )
        .unwrap();
        let want = (1.0 - shape) / cut + shape * rate * (rate * cut).powf(shape - 1.0);
        let got = fam.lambda_f().finite().unwrap();
        assert!(rel_err(got, want) < 1e-12);
    }

    #[test]
    fn grid_diagnostic_matches_closed_forms() {
        for fam in builtins() {
            let Some(closed) = fam.lambda_f().finite() else { continue };
            let report = lambda_f_grid(&fam, 10_000);
            assert!(!report.diverged, "{fam:?} diverged");
            // The scan is a sup over sampled points: a lower bound.
            assert!(
                closed >= report.sup - 1e-9 * closed,
                "{fam:?}: scan {} exceeds closed form {closed}",
                report.sup
            );
            assert!(
                rel_err(report.sup, closed) < 1e-6,
                "{fam:?}: scan {} vs closed {closed}",
                report.sup
            );
        }
    }

    #[test]
    fn grid_diagnostic_flags_divergence() {
        let report = lambda_f_grid(&DensityFamily::weibull(0.5, 1.0).unwrap(), 4_000);
        assert!(report.diverged || report.sup > 1e12);
    }

    #[test]
    fn log_convex_families_have_monotone_hazard_of_density() {
        // -f'/f non-increasing for Pareto, hyperexponential, truncated
        // heavy Weibull.
        let weib = DensityFamily::weibull(0.5, 1.0).unwrap();
        let cut = weibull_truncation_point(0.5, 1.0).unwrap();
        let fams = vec![
            DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap(),
            DensityFamily::hyper_exp2(0.75, 0.15, 0.05).unwrap(),
            DensityFamily::truncated_tail(weib, cut).unwrap(),
        ];
        for fam in fams {
            let a = fam.support_edge();
            let scale = fam.characteristic_scale();
            let mut prev = f64::INFINITY;
            for i in 0..10_000 {
                let x = a + scale * 1e-9 * (50.0f64 / 1e-9).powf(i as f64 / 9_999.0);
                let v = fam.neg_log_density_deriv(x);
                assert!(v <= prev * (1.0 + 1e-12) + 1e-12, "{fam:?} not monotone at {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn sampler_means_match_analytic() {
        let mut rng = substream(2024, 0, 0, Purpose::Init);
        let p = DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap();
        let n = 1_000_000;
        let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.02, "pareto mean {mean}");

        let h = DensityFamily::hyper_exp2(0.75, 0.15, 0.05).unwrap();
        let mean = (0..n).map(|_| h.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 10.0).abs() < 0.15, "hyperexp mean {mean}");

        let u = DensityFamily::uniform(0.0, 40.0).unwrap();
        for _ in 0..1000 {
            let x = u.sample(&mut rng);
            assert!((0.0..40.0).contains(&x));
        }
    }

    #[test]
    fn samples_match_analytic_cdf() {
        // One-sample KS per family at n = 1e5 against the analytic CDF,
        // 99.9% asymptotic critical value.
        let n = 100_000usize;
        let crit = (0.5 * (2.0f64 / 0.001).ln()).sqrt() / (n as f64).sqrt();
        for (i, fam) in builtins().into_iter().enumerate() {
            let mut rng = substream(777, i as u64, 0, Purpose::Init);
            let mut xs: Vec<f64> = (0..n).map(|_| fam.sample(&mut rng)).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut d: f64 = 0.0;
            for (k, &x) in xs.iter().enumerate() {
                let f = fam.cdf(x);
                d = d.max((f - k as f64 / n as f64).abs());
                d = d.max(((k + 1) as f64 / n as f64 - f).abs());
            }
            assert!(d < crit, "{fam:?}: KS {d} >= {crit}");
        }
    }

    #[test]
    fn moments_match_numeric_integrals() {
        for fam in builtins() {
            let mean = fam.mean();
            if !mean.is_finite() {
                continue;
            }
            let a = fam.support_edge();
            let got = a + tail_integral(|x| fam.survival(x), a, fam.characteristic_scale());
            assert!(rel_err(got, mean) < 1e-6, "{fam:?}: mean {got} vs {mean}");

            let m2 = fam.second_moment();
            if m2.is_finite() {
                let got2 = a * a
                    + tail_integral(|x| 2.0 * x * fam.survival(x), a, fam.characteristic_scale());
                assert!(rel_err(got2, m2) < 1e-6, "{fam:?}: m2 {got2} vs {m2}");
            }
        }
    }

    #[test]
    fn hyperexp_constructor_normalizes_rate_order() {
        let fam = DensityFamily::hyper_exp2(0.5, 2.0 / 3.0, 2.0).unwrap();
        match fam {
            DensityFamily::HyperExp2 { p1, rate1, rate2 } => {
                assert!(rate1 > rate2);
                assert!((p1 - 0.5).abs() < 1e-15);
                assert!((rate1 - 2.0).abs() < 1e-15);
                assert!((rate2 - 2.0 / 3.0).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn truncated_tail_moments_closed_forms() {
        // Cross-check the closed-form conditional moments against the
        // generic numeric path.
        let cases = vec![
            DensityFamily::truncated_tail(DensityFamily::exponential(0.7).unwrap(), 1.3).unwrap(),
            DensityFamily::truncated_tail(
                DensityFamily::pareto_lomax(10.0, 0.25).unwrap(),
                0.8,
            )
            .unwrap(),
            DensityFamily::truncated_tail(DensityFamily::weibull(0.5, 1.0).unwrap(), 0.7).unwrap(),
        ];
        for fam in cases {
            let DensityFamily::TruncatedTail { ref parent, cutoff } = fam else { unreachable!() };
            let mean = fam.mean();
            let num_mean = cutoff
                + tail_integral(|x| fam.survival(x), cutoff, parent.characteristic_scale());
            assert!(rel_err(mean, num_mean) < 1e-7, "{fam:?} mean");
            let m2 = fam.second_moment();
            let num_m2 = cutoff * cutoff
                + tail_integral(
                    |x| 2.0 * x * fam.survival(x),
                    cutoff,
                    parent.characteristic_scale(),
                );
            assert!(rel_err(m2, num_m2) < 1e-7, "{fam:?} m2");
        }
    }

    #[test]
    fn serde_round_trip_and_aliases() {
        let fam = DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap();
        let json = serde_json::to_string(&fam).unwrap();
        assert!(json.contains("pareto_lomax"));
        let back: DensityFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fam);
        let aliased: DensityFamily =
            serde_json::from_str(r#"{"kind":"pareto","shape":10.0,"scale":0.1}"#).unwrap();
        assert!(matches!(aliased, DensityFamily::ParetoLomax { .. }));
    }
}
