//! Cross-validation of the closed-form evaluator against the brute-force
//! permutation oracle, plus the structural properties of the per-shift
//! expectations.

use cminhash::experiments::{synth_pair, Placement, SyntheticPairSpec};
use cminhash::theory::{bruteforce_collision_expectations, LocationVector, TheoryEvaluator};

fn location(dim: u32, f: u32, a: u32, placement: Placement, seed: u64) -> LocationVector {
    let (v, w) = synth_pair(&SyntheticPairSpec {
        dim,
        f,
        a,
        placement,
        seed,
    })
    .unwrap();
    LocationVector::from_pair(&v, &w).unwrap()
}

#[test]
fn closed_form_matches_oracle_on_small_instances() {
    let ev = TheoryEvaluator::new();
    for &(dim, f, a) in &[(6u32, 3u32, 1u32), (7, 4, 2), (8, 6, 3)] {
        for placement in [Placement::Structured, Placement::Random] {
            let x = location(dim, f, a, placement, 1);
            let oracle = bruteforce_collision_expectations(&x).unwrap();
            for k in 1..=dim {
                let got = ev.collision_expectation_k(&x, k).unwrap();
                let want = *oracle[(k - 1) as usize].numer() as f64
                    / *oracle[(k - 1) as usize].denom() as f64;
                assert!(
                    (got - want).abs() <= 1e-9,
                    "D={dim} f={f} a={a} {placement} k={k}: {got} vs {want}"
                );
            }
        }
    }
}

/// The float path and the exact rational path must agree to 1e-10 well past
/// the oracle's reach.
#[test]
fn float_and_exact_paths_agree() {
    let ev = TheoryEvaluator::new();

    let x = location(16, 6, 2, Placement::Random, 4);
    for k in 1..=16 {
        let f = ev.collision_expectation_k(&x, k).unwrap();
        let e = ev.collision_expectation_k_exact(&x, k).unwrap();
        let e = cminhash::theory::eval::rational_to_f64(&e);
        assert!((f - e).abs() <= 1e-10, "D=16 k={k}: {f} vs {e}");
    }

    let x = location(32, 12, 5, Placement::Random, 9);
    for k in [1u32, 7, 32] {
        let f = ev.collision_expectation_k(&x, k).unwrap();
        let e = ev.collision_expectation_k_exact(&x, k).unwrap();
        let e = cminhash::theory::eval::rational_to_f64(&e);
        assert!((f - e).abs() <= 1e-10, "D=32 k={k}: {f} vs {e}");
    }
}

#[test]
fn expectations_stay_in_range() {
    let ev = TheoryEvaluator::new();
    for &(dim, f, a, seed) in &[(12u32, 5u32, 2u32, 1u64), (16, 16, 7, 2), (24, 6, 6, 3)] {
        let x = location(dim, f, a, Placement::Random, seed);
        for k in 1..=dim {
            let e = ev.collision_expectation_k(&x, k).unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&e), "D={dim} k={k}: {e}");
        }
        assert!(ev.bias_squared(&x, dim as usize).unwrap() >= 0.0);
    }
}

/// With (f, a) fixed, the estimator mean at K = D approaches J as the
/// dimension grows; and per-shift deviations mix signs while their average
/// shrinks with K.
#[test]
fn convergence_in_dimension_and_per_shift_sign_mixing() {
    let ev = TheoryEvaluator::new();
    let j = 0.5;

    let mut gaps = Vec::new();
    for dim in [16u32, 32, 64] {
        let x = location(dim, 8, 4, Placement::Structured, 0);
        let mean = ev.estimator_mean(&x, dim as usize).unwrap();
        gaps.push((mean - j).abs());
    }
    assert!(
        gaps[1] <= gaps[0] + 1e-6 && gaps[2] <= gaps[1] + 1e-6,
        "|mean - J| should not increase with D: {gaps:?}"
    );

    // sign mixing on a D = 64 instance
    let x = location(64, 8, 4, Placement::Random, 1);
    let per_k = ev.per_k_expectations(&x, 64).unwrap();
    let n_pos = per_k.iter().filter(|&&e| e > j).count();
    let n_neg = per_k.iter().filter(|&&e| e < j).count();
    assert!(
        n_pos > 0 && n_neg > 0,
        "per-shift deviations should take both signs"
    );

    let mean_at = |k: usize| per_k[..k].iter().sum::<f64>() / k as f64;
    let dev4 = (mean_at(4) - j).abs();
    let dev64 = (mean_at(64) - j).abs();
    assert!(
        dev64 <= dev4,
        "averaging should shrink the bias: {dev4} -> {dev64}"
    );
}

/// On (64, 16, 4) the full-length estimator's squared bias is tiny, and the
/// Monte Carlo collision frequency of the first shift confirms the exact
/// value over 1e6 trials.
#[test]
fn small_bias_at_full_length_and_mc_per_shift_agreement() {
    use cminhash::experiments::mc_per_k_collision;
    use cminhash::Scheme;

    let (v, w) = synth_pair(&SyntheticPairSpec {
        dim: 64,
        f: 16,
        a: 4,
        placement: Placement::Random,
        seed: 3,
    })
    .unwrap();
    let x = LocationVector::from_pair(&v, &w).unwrap();
    let ev = TheoryEvaluator::new();
    assert!(ev.bias_squared(&x, 64).unwrap() <= 1e-4);

    let exact = ev.collision_expectation_k(&x, 1).unwrap();
    let (p, se) = mc_per_k_collision(&v, &w, 1, Scheme::PiPi, 1_000_000, 17).unwrap();
    assert!(
        (p - exact).abs() <= 4.0 * se,
        "mc {p} vs exact {exact} (se {se})"
    );
}

/// The empirical squared bias of the one-permutation scheme shrinks as K
/// grows, up to the sampling error of both estimates.
#[test]
fn empirical_bias_shrinks_with_k() {
    use cminhash::experiments::mc_bias_mse;
    use cminhash::Scheme;

    let (v, w) = synth_pair(&SyntheticPairSpec {
        dim: 64,
        f: 16,
        a: 4,
        placement: Placement::Random,
        seed: 5,
    })
    .unwrap();
    let rows = mc_bias_mse(&v, &w, &[4, 64], Scheme::PiPi, 100_000, 21).unwrap();
    let (r4, r64) = (&rows[0], &rows[1]);
    // delta-method standard error of each bias^2 estimate
    let se_b2 = |r: &cminhash::experiments::McStats| {
        2.0 * r.bias2.sqrt() * r.stderr_mean + r.stderr_mean * r.stderr_mean
    };
    let band = 3.0 * (se_b2(r4).powi(2) + se_b2(r64).powi(2)).sqrt();
    assert!(
        r64.bias2 <= r4.bias2 + band,
        "bias^2 at K=64 ({}) should not exceed K=4 ({}) beyond {band}",
        r64.bias2,
        r4.bias2
    );
}

/// Classic MinHash is unbiased: over 1e5 fresh-permutation trials the mean
/// collision fraction lands within four standard errors of J.
#[test]
fn minhash_unbiasedness_large_sample() {
    use cminhash::experiments::mc_bias_mse;
    use cminhash::Scheme;

    let (v, w) = synth_pair(&SyntheticPairSpec {
        dim: 64,
        f: 16,
        a: 4,
        placement: Placement::Random,
        seed: 7,
    })
    .unwrap();
    let rows = mc_bias_mse(&v, &w, &[16], Scheme::MinHash, 100_000, 123).unwrap();
    let row = &rows[0];
    assert!(
        (row.mean - 0.25).abs() <= 4.0 * row.stderr_mean,
        "mean {} vs 0.25 (se {})",
        row.mean,
        row.stderr_mean
    );
}
