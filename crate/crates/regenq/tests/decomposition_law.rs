//! End-to-end checks that the interarrival split preserves the law it came
//! from: interarrival times assembled from the exponential-plus-complement
//! branch (mixed, where applicable, with the untruncated shoulder) must be
//! statistically indistinguishable from direct draws of the original law,
//! for every way of choosing the exponential rate.

use regenq::decomp::DecompError;
use regenq::oracles::{decomposition_law_check, law_check_of};
use regenq::{DensityFamily, InterarrivalSpec, LambdaChoice};

const N: usize = 100_000;
const ALPHA: f64 = 0.001;

/// Raising the exponential rate above the minimal feasible one changes the
/// split (smaller exponential mean, different complement) but must not
/// change the assembled law. Checked at a fractional factor on one family
/// from each closed-form branch.
#[test]
fn law_preserved_at_scaled_rates() {
    let families = [
        DensityFamily::gamma(2.0, 3.0).unwrap(),
        DensityFamily::lognormal(0.0, 2.0 / 3.0).unwrap(),
        DensityFamily::hyper_exp2(0.5, 2.0 / 3.0, 2.0).unwrap(),
        DensityFamily::pareto_lomax(10.0, 1.0 / 18.0).unwrap(),
    ];
    for (i, fam) in families.iter().enumerate() {
        let seed = 0xDEC0_0000 + i as u64;
        let minimal = decomposition_law_check(fam, LambdaChoice::Minimal, N, ALPHA, seed)
            .unwrap_or_else(|e| panic!("{fam:?}: {e}"));
        let scaled = decomposition_law_check(fam, LambdaChoice::Scaled(1.5), N, ALPHA, seed ^ 0xF00)
            .unwrap_or_else(|e| panic!("{fam:?}: {e}"));
        assert!(
            minimal.passed,
            "{}: minimal-rate split failed the two-sample check: D = {} > {}",
            minimal.family, minimal.ks_statistic, minimal.threshold
        );
        assert!(
            scaled.passed,
            "{}: scaled-rate split failed the two-sample check: D = {} > {}",
            scaled.family, scaled.ks_statistic, scaled.threshold
        );
        let ratio = scaled.lambda / minimal.lambda;
        assert!(
            (ratio - 1.5).abs() < 1e-12,
            "{}: scaling the rate choice by 1.5 moved lambda by {ratio}",
            minimal.family
        );
    }
}

/// An explicit rate strictly above the minimal one is accepted verbatim
/// and still preserves the law.
#[test]
fn law_preserved_at_explicit_rate() {
    let fam = DensityFamily::gamma(2.0, 3.0).unwrap();
    let report =
        decomposition_law_check(&fam, LambdaChoice::Explicit(5.0), N, ALPHA, 0xDEC0_0010).unwrap();
    assert_eq!(report.lambda, 5.0);
    assert!(
        report.passed,
        "explicit-rate split failed: D = {} > {}",
        report.ks_statistic, report.threshold
    );
}

/// A density whose rate-bound functional diverges only because of a light
/// right shoulder is split by truncation: the shoulder is sampled plainly
/// with the complementary probability. The mixture must still reproduce
/// the parent law.
#[test]
fn law_preserved_through_shoulder_truncation() {
    let fam = DensityFamily::weibull(0.5, 1.0).unwrap();
    let report =
        decomposition_law_check(&fam, LambdaChoice::Minimal, N, ALPHA, 0xDEC0_0020).unwrap();
    assert!(
        report.q_bar > 0.0 && report.q_bar < 1.0,
        "expected a proper mixture weight, got {}",
        report.q_bar
    );
    assert!(
        report.passed,
        "truncated split failed: D = {} > {}",
        report.ks_statistic, report.threshold
    );
}

/// Laws declared as "exponential plus an independent addend" are already
/// split by construction: the sampler must reproduce the convolution, and
/// the declared exponential rate is not negotiable.
#[test]
fn pre_split_law_round_trips() {
    let spec: InterarrivalSpec = serde_json::from_str(
        r#"{"exp_plus":{"rate":10.0,"addend":{"kind":"weibull","shape":2.0,"rate":0.044534016354409955}}}"#,
    )
    .unwrap();
    let decomp = spec.decompose(LambdaChoice::Minimal).unwrap();
    assert!(decomp.is_pre_split());
    assert_eq!(decomp.lambda, 10.0);
    let report = law_check_of(&decomp, N, ALPHA, 0xDEC0_0030);
    assert!(
        report.passed,
        "{}: pre-split sampler failed the convolution check: D = {} > {}",
        report.family, report.ks_statistic, report.threshold
    );

    // The declared rate is part of the law; asking to scale it is an error.
    let err = spec.decompose(LambdaChoice::Scaled(2.0)).unwrap_err();
    assert!(matches!(err, DecompError::NotDecomposable(_)), "got {err:?}");
    // Restating the same rate is fine.
    assert!(spec.decompose(LambdaChoice::Explicit(10.0)).is_ok());
}

/// Negative controls: rates below the feasible minimum are rejected with
/// the minimum reported, and a family whose rate bound diverges with no
/// truncation rule cannot be split at all.
#[test]
fn infeasible_choices_are_rejected() {
    let fam = DensityFamily::gamma(2.0, 3.0).unwrap();
    match decomposition_law_check(&fam, LambdaChoice::Explicit(2.9), 10, ALPHA, 0) {
        Err(DecompError::LambdaTooSmall { required, given }) => {
            assert!((required - 3.0).abs() < 1e-9, "minimal rate should be 3, got {required}");
            assert_eq!(given, 2.9);
        }
        other => panic!("expected LambdaTooSmall, got {other:?}"),
    }
    assert!(matches!(
        decomposition_law_check(&fam, LambdaChoice::Scaled(0.8), 10, ALPHA, 0),
        Err(DecompError::LambdaTooSmall { .. })
    ));

    let uniform = DensityFamily::uniform(0.0, 40.0).unwrap();
    assert!(matches!(
        decomposition_law_check(&uniform, LambdaChoice::Minimal, 10, ALPHA, 0),
        Err(DecompError::NotDecomposable(_))
    ));
}
