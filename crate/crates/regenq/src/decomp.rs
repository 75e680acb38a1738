//! Interarrival decomposition: `xi = (1-q) xi_tilde + q (E + Z)`.
//!
//! For a density `f` on `[a, inf)` with finite `lambda_f`, the law of `xi`
//! equals that of `E + Z` where `E ~ Exp(lambda)` for any
//! `lambda >= lambda_f`, `Z` is independent of `E`, and `Z` follows
//! `G(x) = F(x) + f(x)/lambda`: a point mass `f(a)/lambda` at the support
//! edge plus the density `f + f'/lambda` on the interior. Heavy Weibull
//! tails (`shape < 1`) enter through a preliminary truncation: with
//! probability `q = P(xi >= cutoff)` the draw comes from the decomposed tail
//! law, otherwise from the conditional law below the cutoff.
//!
//! The engine consumes decompositions through [`Decomposition::sample_interarrival`],
//! which reports the split `(non_exp_part, exp_part)`: the non-exponential
//! part elapses first, after which the class sits in its exponential phase
//! until the arrival fires.

use crate::dist::{DensityFamily, LambdaF};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from building a decomposition.
#[derive(Debug, Error, PartialEq)]
pub enum DecompError {
    #[error("family is not decomposable: {0}")]
    NotDecomposable(String),
    #[error("lambda {given} is below the minimal feasible rate {required}")]
    LambdaTooSmall { required: f64, given: f64 },
}

/// How to pick the exponential rate relative to the minimal feasible rate.
///
/// `Minimal` maximizes the extracted exponential mean `1/lambda`, which is
/// the variance-optimal choice among valid rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LambdaChoiceRepr", into = "LambdaChoiceRepr")]
pub enum LambdaChoice {
    /// `lambda = lambda_f` exactly.
    #[default]
    Minimal,
    /// `lambda = factor * lambda_f`, `factor >= 1`.
    Scaled(f64),
    /// A literal rate, validated against `lambda_f`.
    Explicit(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LambdaChoiceRepr {
    Keyword(String),
    Scale { scale: f64 },
    Explicit { explicit: f64 },
}

impl TryFrom<LambdaChoiceRepr> for LambdaChoice {
    type Error = String;
    fn try_from(repr: LambdaChoiceRepr) -> Result<Self, String> {
        match repr {
            LambdaChoiceRepr::Keyword(s) if s == "minimal" => Ok(LambdaChoice::Minimal),
            LambdaChoiceRepr::Keyword(s) => Err(format!("unknown lambda choice {s:?}")),
            LambdaChoiceRepr::Scale { scale } => Ok(LambdaChoice::Scaled(scale)),
            LambdaChoiceRepr::Explicit { explicit } => Ok(LambdaChoice::Explicit(explicit)),
        }
    }
}

impl From<LambdaChoice> for LambdaChoiceRepr {
    fn from(c: LambdaChoice) -> Self {
        match c {
            LambdaChoice::Minimal => LambdaChoiceRepr::Keyword("minimal".into()),
            LambdaChoice::Scaled(scale) => LambdaChoiceRepr::Scale { scale },
            LambdaChoice::Explicit(explicit) => LambdaChoiceRepr::Explicit { explicit },
        }
    }
}

impl LambdaChoice {
    /// Resolve against the minimal feasible rate.
    pub fn resolve(self, minimal: f64) -> Result<f64, DecompError> {
        match self {
            LambdaChoice::Minimal => Ok(minimal),
            LambdaChoice::Scaled(factor) => {
                if factor >= 1.0 {
                    Ok(factor * minimal)
                } else {
                    Err(DecompError::LambdaTooSmall {
                        required: minimal,
                        given: factor * minimal,
                    })
                }
            }
            LambdaChoice::Explicit(v) => {
                if v >= minimal * (1.0 - 1e-12) {
                    Ok(v)
                } else {
                    Err(DecompError::LambdaTooSmall { required: minimal, given: v })
                }
            }
        }
    }
}

/// The law of the residual branch `xi_tilde` taken with probability `1-q`:
/// the parent conditioned on values below the truncation cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualLaw {
    pub parent: DensityFamily,
    pub below: f64,
}

impl ResidualLaw {
    /// Mass of the parent below the cutoff.
    fn head_mass(&self) -> f64 {
        self.parent.cdf(self.below)
    }

    /// Inverse-transform draw from `parent | parent < below`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let target = u * self.head_mass();
        match &self.parent {
            DensityFamily::Weibull { shape, rate } => {
                // F(x) = 1 - exp(-(rate x)^shape).
                (-(1.0 - target).ln()).powf(1.0 / shape) / rate
            }
            DensityFamily::Exponential { rate } => -(1.0 - target).ln() / rate,
            DensityFamily::ParetoLomax { shape, scale } => {
                ((1.0 - target).powf(-1.0 / shape) - 1.0) / scale
            }
            parent => {
                let edge = parent.support_edge();
                let mut lo = edge;
                let mut hi = self.below;
                let tol = 1e-12 * parent.characteristic_scale().min(self.below - edge);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if parent.cdf(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// How the complementary component `Z` is produced.
#[derive(Clone, Debug, PartialEq)]
enum ZSource {
    /// Numeric inversion of `G(x) = F(x) + f(x)/lambda` of `base`.
    GInverse,
    /// `Z` has an explicitly given law (pre-split interarrival such as
    /// exponential-plus-addend); no `G` inversion involved.
    Direct,
}

/// A realized decomposition of an interarrival law.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// The decomposable density whose `(F, f)` define `G` — the original
    /// family, its truncated tail (heavy Weibull), or the literal law of `Z`
    /// for pre-split inputs.
    pub base: DensityFamily,
    /// Mixing weight of the exponential-carrying branch.
    pub q_bar: f64,
    /// Rate of the exponential component `E`; at least `lambda_f(base)`.
    pub lambda: f64,
    /// Law of the residual branch when `q_bar < 1`.
    pub residual_mix: Option<ResidualLaw>,
    /// Point mass of `G` at the support edge, `f(a)/lambda`.
    pub atom_mass: f64,
    /// The undecomposed law, kept for law-preservation checks.
    pub original: DensityFamily,
    z_source: ZSource,
}

/// One split interarrival draw. The total `non_exp_part + exp_part` is
/// distributed as the original interarrival law; the class reaches its
/// exponential phase only on branches where the split applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitDraw {
    pub is_exp_phase_reachable: bool,
    pub non_exp_part: f64,
    pub exp_part: f64,
}

impl SplitDraw {
    pub fn total(self) -> f64 {
        self.non_exp_part + self.exp_part
    }
}

/// Independent substreams feeding one class's interarrival draws. Keeping
/// the four sources separate means `E` and `Z` are sampled independently, as
/// the distributional identity requires, and never derived from one another.
pub struct SplitStreams<R> {
    pub mixture: R,
    pub exp_component: R,
    pub z_component: R,
    pub residual: R,
}

impl Decomposition {
    /// Build with an explicit rate and no feasibility check. `G` is not a
    /// valid CDF when `lambda < lambda_f`; this constructor exists so
    /// diagnostics can demonstrate exactly that failure.
    pub fn with_unchecked_lambda(fam: DensityFamily, lambda: f64) -> Self {
        let atom = edge_atom(&fam, lambda);
        Decomposition {
            base: fam.clone(),
            q_bar: 1.0,
            lambda,
            residual_mix: None,
            atom_mass: atom,
            original: fam,
            z_source: ZSource::GInverse,
        }
    }

    /// A pre-split law `xi = E + addend` with `E ~ Exp(rate)`: the split is
    /// given, not derived, so `Z` is the addend itself and every draw
    /// reaches the exponential phase.
    pub fn pre_split(rate: f64, addend: DensityFamily) -> Result<Self, DecompError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(DecompError::NotDecomposable(format!(
                "pre-split exponential rate must be positive, got {rate}"
            )));
        }
        Ok(Decomposition {
            base: addend.clone(),
            q_bar: 1.0,
            lambda: rate,
            residual_mix: None,
            atom_mass: 0.0,
            original: addend,
            z_source: ZSource::Direct,
        })
    }

    /// True when the law was given directly in split form (`E + Z` with `Z`
    /// following `original` itself), so the exponential part is an addend on
    /// top of `original` rather than extracted from it.
    pub fn is_pre_split(&self) -> bool {
        matches!(self.z_source, ZSource::Direct)
    }

    /// Evaluate `G(x) = F(x) + f(x)/lambda` for the base family. Monotone
    /// non-decreasing from `atom_mass` at the support edge to 1 whenever
    /// `lambda >= lambda_f(base)`.
    pub fn g_cdf(&self, x: f64) -> f64 {
        match self.z_source {
            ZSource::Direct => self.base.cdf(x),
            ZSource::GInverse => {
                let a = self.base.support_edge();
                if x < a {
                    0.0
                } else if x == a {
                    self.atom_mass
                } else {
                    self.base.cdf(x) + self.base.pdf(x) / self.lambda
                }
            }
        }
    }

    /// Draw `Z`: the support-edge atom with probability `atom_mass`,
    /// otherwise monotone bisection of `G` (bracket doubling from one
    /// characteristic scale, absolute tolerance 1e-12 of that scale).
    /// Bisection rather than Newton: `f + f'/lambda` vanishes wherever
    /// `-f'/f` attains `lambda`, so `G` can be locally flat.
    pub fn sample_g<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let ZSource::Direct = self.z_source {
            return self.base.sample(rng);
        }
        let a = self.base.support_edge();
        let u: f64 = rng.random();
        if u < self.atom_mass {
            return a;
        }
        let scale = self.base.characteristic_scale().max(f64::MIN_POSITIVE);
        let mut hi = a + scale;
        let mut guard = 0;
        while self.g_cdf(hi) < u && guard < 2000 {
            hi = a + 2.0 * (hi - a);
            guard += 1;
        }
        let mut lo = a;
        let tol = 1e-12 * scale;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.g_cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// One split interarrival draw; see [`SplitDraw`].
    pub fn sample_interarrival<R: Rng>(&self, streams: &mut SplitStreams<R>) -> SplitDraw {
        let take_split = if self.q_bar >= 1.0 {
            true
        } else {
            streams.mixture.random::<f64>() < self.q_bar
        };
        if take_split {
            let u: f64 = streams.exp_component.random();
            let e = -(1.0 - u).ln() / self.lambda;
            let z = self.sample_g(&mut streams.z_component);
            SplitDraw { is_exp_phase_reachable: true, non_exp_part: z, exp_part: e }
        } else {
            let residual = self
                .residual_mix
                .as_ref()
                .expect("q_bar < 1 implies a residual law");
            let x = residual.sample(&mut streams.residual);
            SplitDraw { is_exp_phase_reachable: false, non_exp_part: x, exp_part: 0.0 }
        }
    }

    /// Mean of the exponential part across all branches, `q_bar / lambda`.
    pub fn mean_exp_part(&self) -> f64 {
        self.q_bar / self.lambda
    }
}

/// `f(a+)/lambda`, the atom of `G` at the support edge.
fn edge_atom(base: &DensityFamily, lambda: f64) -> f64 {
    let d = base.edge_density();
    if d.is_infinite() {
        // Only reachable through the unchecked constructor; a decomposable
        // base never has a divergent edge density.
        1.0
    } else {
        (d / lambda).min(1.0)
    }
}

/// Decompose `fam` with the requested rate choice.
///
/// Families with finite `lambda_f` decompose directly with `q_bar = 1`.
/// Heavy Weibull tails (`shape < 1`) are auto-truncated at the standard
/// cutoff: the base becomes the conditional tail law, `q_bar` its mass, and
/// the residual the conditional law below the cutoff. Everything else is
/// rejected.
pub fn build_decomposition(
    fam: &DensityFamily,
    choice: LambdaChoice,
) -> Result<Decomposition, DecompError> {
    match fam.lambda_f() {
        LambdaF::Finite(minimal) => {
            let lambda = choice.resolve(minimal)?;
            Ok(Decomposition {
                base: fam.clone(),
                q_bar: 1.0,
                lambda,
                residual_mix: None,
                atom_mass: edge_atom(fam, lambda),
                original: fam.clone(),
                z_source: ZSource::GInverse,
            })
        }
        LambdaF::Infinite { truncation: Some(cutoff) } => {
            let base = DensityFamily::truncated_tail(fam.clone(), cutoff)
                .expect("cutoff lies inside the parent support");
            let minimal = base
                .lambda_f()
                .finite()
                .expect("truncated tail is decomposable by construction");
            let lambda = choice.resolve(minimal)?;
            let q_bar = fam.survival(cutoff);
            Ok(Decomposition {
                atom_mass: edge_atom(&base, lambda),
                base,
                q_bar,
                lambda,
                residual_mix: Some(ResidualLaw { parent: fam.clone(), below: cutoff }),
                original: fam.clone(),
                z_source: ZSource::GInverse,
            })
        }
        LambdaF::Infinite { truncation: None } => Err(DecompError::NotDecomposable(format!(
            "sup(-f'/f) diverges and no truncation rule applies to {fam:?}"
        ))),
    }
}
