//! Offspring laws checked against independent references.
//!
//! Frozen `f` values come from the polylogarithm identity
//! `Σ_{n≥2} n^{-α}(1 − q^{n−1}) = ζ(α) − 1 − (Li_α(q) − q)/q`, evaluated at
//! 40 digits with mpmath. That route shares nothing with the crate's
//! summation-by-parts plus Euler–Maclaurin evaluation.

use branchmax_core::offspring::{make_explicit, make_stable_tail};
use branchmax_core::rng::{open_unit, tree_stream};
use branchmax_core::special::hurwitz_zeta;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn f_matches_polylog_reference() {
    let cases: &[(f64, f64, f64, f64)] = &[
        (1.5, 0.2, 0.2, 0.207_832_476_856_139_558_6),
        (1.5, 0.2, 1e-2, 0.063_553_842_058_713_975_68),
        (1.5, 0.2, 1e-4, 0.007_009_237_732_686_252_516),
        (1.5, 0.2, 1e-6, 0.000_708_167_879_678_821_267_4),
        (1.5, 0.2, 1e-8, 0.000_070_890_009_462_638_606_94),
        (1.9, 0.05, 0.5, 0.028_559_096_579_171_670_36),
        (1.1, 0.05, 0.5, 0.461_553_187_889_530_210_9),
        (1.9, 0.05, 1e-3, 0.000_496_305_076_893_658_563_1),
        (1.1, 0.05, 1e-3, 0.267_513_053_189_175_048_9),
        (1.9, 0.05, 1e-8, 2.775_794_547_920_400_932e-8),
        (1.1, 0.05, 1e-8, 0.084_683_113_058_302_912_12),
    ];
    for &(alpha, kappa, v, expect) in cases {
        let law = make_stable_tail(alpha, kappa).unwrap();
        let got = law.f_of_v(1.0, v).unwrap();
        assert!(rel(got, expect) < 1e-10, "alpha={alpha} v={v}: {got} vs {expect}");
    }
}

#[test]
fn f_matches_definition_for_explicit_laws() {
    // direct evaluation of β(Σ p_k (1−v)^k − (1−v))/v where no cancellation bites
    let probs = [0.4, 0.4, 0.05, 0.1, 0.05];
    let law = make_explicit(&probs).unwrap();
    for v in [0.05, 0.3, 0.9] {
        let direct: f64 = probs
            .iter()
            .enumerate()
            .map(|(k, x)| x * (1.0f64 - v).powi(k as i32))
            .sum::<f64>();
        let expect = 2.5 * (direct - (1.0 - v)) / v;
        assert!(rel(law.f_of_v(2.5, v).unwrap(), expect) < 1e-12);
    }
}

#[test]
fn lemma2_ratio_converges() {
    let law = make_stable_tail(1.5, 0.2).unwrap();
    let limit = law.lemma2_constant(1.0).unwrap();
    let at = |v: f64| law.f_of_v(1.0, v).unwrap() / v.powf(0.5);
    assert!(rel(at(1e-4), limit) <= 0.02);
    assert!(rel(at(1e-6), limit) <= 0.005);
    // β enters multiplicatively
    for v in [1e-3, 0.4] {
        assert!(rel(law.f_of_v(3.0, v).unwrap() / 3.0, law.f_of_v(1.0, v).unwrap()) < 1e-14);
    }
}

#[test]
fn f_is_nonnegative_and_continuous() {
    let law = make_stable_tail(1.7, 0.3).unwrap();
    let mut prev = 0.0;
    for i in 0..=2000 {
        let v = i as f64 / 2000.0;
        let f = law.f_of_v(1.0, v).unwrap();
        assert!(f >= 0.0);
        assert!((f - prev).abs() < 0.02, "jump at v={v}");
        prev = f;
    }
}

#[test]
fn moments_match_direct_summation() {
    for &(alpha, kappa) in &[(1.5, 0.2), (1.1, 0.05), (1.9, 0.4), (1.3, 0.1)] {
        let law = make_stable_tail(alpha, kappa).unwrap();
        let cutoff = 2_000_000u64;
        let mut mass = 0.0f64;
        let mut mean = 0.0f64;
        for k in (0..=cutoff).rev() {
            let p = law.pmf(k);
            mass += p;
            mean += k as f64 * p;
        }
        let rest = kappa * (cutoff as f64 + 1.0).powf(-alpha);
        mass += rest;
        // Σ_{k>c} k p_k = (c+1) P(K ≥ c+1) + Σ_{n ≥ c+2} P(K ≥ n)
        mean += (cutoff as f64 + 1.0) * rest + kappa * hurwitz_zeta(alpha, cutoff as f64 + 2.0);
        assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
        assert!((mean - 1.0).abs() < 1e-10, "mean {mean}");
        assert!((law.mean() - 1.0).abs() < 1e-12);
    }
    let law = make_explicit(&[0.2, 0.7, 0.0, 0.1]).unwrap();
    assert!((law.sigma2().unwrap() - (0.7 + 0.9 - 1.0)).abs() < 1e-14);
}

#[test]
fn inversion_sampler_tail_frequencies() {
    let law = make_stable_tail(1.5, 0.2).unwrap();
    let n = 10_000_000u64;
    let levels = [2u64, 5, 10, 100];
    let mut hits = [0u64; 4];
    let mut rng = tree_stream(2024, 0);
    for _ in 0..n {
        let k = law.sample_offspring(open_unit(&mut rng));
        for (h, &level) in hits.iter_mut().zip(&levels) {
            if k >= level {
                *h += 1;
            }
        }
    }
    for (&h, &level) in hits.iter().zip(&levels) {
        let p = 0.2 * (level as f64).powf(-1.5);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let freq = h as f64 / n as f64;
        assert!((freq - p).abs() < 5.0 * se, "level {level}: {freq} vs {p}");
    }
}
