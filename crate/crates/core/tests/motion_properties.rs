use branchmax_core::motion::{JumpLaw, LatticeStep, MotionModel, Segment, Span};
use branchmax_core::rng::tree_stream;
use branchmax_core::special::normal_cdf;
use proptest::prelude::*;

fn draws(model: &MotionModel, span: Span, n: usize, seed: u64) -> Vec<Segment> {
    let mut rng = tree_stream(seed, 0);
    (0..n).map(|_| model.sample_segment(span, &mut rng).unwrap()).collect()
}

/// Sample mean and variance, with standard errors for both.
fn moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, (m2 / n).sqrt(), m2, ((m4 - m2 * m2) / n).sqrt())
}

fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn brownian_reflection_identity() {
    let model = MotionModel::brownian(1.0).unwrap();
    let segs = draws(&model, Span::Time(1.0), 1_000_000, 11);
    let n = segs.len() as f64;
    for a in [0.5, 1.0, 2.0] {
        let expected = 2.0 * (1.0 - normal_cdf(a));
        let observed = segs.iter().filter(|s| s.path_max > a).count() as f64 / n;
        let se = (expected * (1.0 - expected) / n).sqrt();
        assert!(
            (observed - expected).abs() < 5.0 * se,
            "a={a}: {observed} vs {expected}"
        );
    }
    assert!((2.0 * (1.0 - normal_cdf(1.0)) - 0.31731).abs() < 1e-5);
}

#[test]
fn brownian_endpoint_moments() {
    let model = MotionModel::brownian(1.0).unwrap();
    let w: Vec<f64> = draws(&model, Span::Time(1.0), 1_000_000, 12)
        .iter()
        .map(|s| s.displacement)
        .collect();
    let (mean, se_mean, var, se_var) = moments(&w);
    assert!(mean.abs() < 5.0 * se_mean, "mean {mean}");
    assert!((var - 1.0).abs() < 5.0 * se_var, "var {var}");
}

#[test]
fn brownian_scaling_two_sample_ks() {
    let n = 100_000;
    let (c, t) = (2.5, 0.7);
    let scaled = draws(&MotionModel::brownian(c).unwrap(), Span::Time(t), n, 21);
    let unit = draws(&MotionModel::brownian(1.0).unwrap(), Span::Time(t), n, 22);
    // two-sample critical value at significance 1e-3
    let crit = (-(1e-3f64 / 2.0).ln() / 2.0).sqrt() * (2.0 / n as f64).sqrt();
    let root = c.sqrt();
    let mut a: Vec<f64> = scaled.iter().map(|s| s.displacement).collect();
    let mut b: Vec<f64> = unit.iter().map(|s| root * s.displacement).collect();
    let d = ks_statistic(&mut a, &mut b);
    assert!(d < crit, "displacement D={d} crit={crit}");
    let mut a: Vec<f64> = scaled.iter().map(|s| s.path_max).collect();
    let mut b: Vec<f64> = unit.iter().map(|s| root * s.path_max).collect();
    let d = ks_statistic(&mut a, &mut b);
    assert!(d < crit, "path_max D={d} crit={crit}");
}

#[test]
fn lattice_displacement_variance_is_n_eta2() {
    let steps = 10u64;
    for (min_step, probs) in [
        (-1, vec![0.5, 0.0, 0.5]),
        (-2, vec![0.1, 0.2, 0.4, 0.2, 0.1]),
    ] {
        let step = LatticeStep::new(min_step, probs).unwrap();
        let eta2 = step.second_moment();
        let model = MotionModel::lattice(step).unwrap();
        let w: Vec<f64> = draws(&model, Span::Steps(steps), 1_000_000, 31)
            .iter()
            .map(|s| s.displacement)
            .collect();
        let (mean, se_mean, var, se_var) = moments(&w);
        assert!(mean.abs() < 5.0 * se_mean);
        assert!(
            (var - steps as f64 * eta2).abs() < 5.0 * se_var,
            "var {var} vs {}",
            steps as f64 * eta2
        );
    }
}

#[test]
fn compound_poisson_diffusion_moments() {
    let jumps = JumpLaw::new(vec![-1.0, 2.0], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
    let model = MotionModel::compound_poisson_diffusion(1.5, jumps, 0.4).unwrap();
    let t = 2.0;
    let segs = draws(&model, Span::Time(t), 400_000, 41);
    let w: Vec<f64> = segs.iter().map(|s| s.displacement).collect();
    let (mean, se_mean, var, se_var) = moments(&w);
    assert!(mean.abs() < 5.0 * se_mean, "mean {mean}");
    let expected = model.eta2_total() * t;
    assert!((var - expected).abs() < 5.0 * se_var, "var {var} vs {expected}");
    assert!((model.eta2_total() - (0.4 + 1.5 * 2.0)).abs() < 1e-12);
}

#[test]
fn unit_jump_model_matches_lattice_walk_report() {
    let jumps = JumpLaw::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
    let model = MotionModel::compound_poisson_diffusion(1.0, jumps, 0.0).unwrap();
    let report = model.validate_moments(1.5).unwrap();
    assert_eq!(report.eta2_total, 1.0);
    assert_eq!(report.mean, 0.0);
    assert_eq!(report.r_threshold, 6.0);
    assert!(report.all_moments_finite);
}

fn model_strategy() -> impl Strategy<Value = MotionModel> {
    prop_oneof![
        (0.01f64..10.0).prop_map(|e| MotionModel::brownian(e).unwrap()),
        (1usize..4).prop_map(|k| {
            let probs = vec![1.0 / (2 * k + 1) as f64; 2 * k + 1];
            MotionModel::lattice(LatticeStep::new(-(k as i64), probs).unwrap()).unwrap()
        }),
        (0.0f64..5.0, 0.0f64..2.0, 0.1f64..3.0).prop_map(|(rate, diff, size)| {
            let jumps = JumpLaw::new(vec![-size, size], vec![0.5, 0.5]).unwrap();
            MotionModel::compound_poisson_diffusion(rate, jumps, diff + 1e-3).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn path_max_dominates_zero_and_endpoint(
        model in model_strategy(),
        duration in 1e-3f64..20.0,
        seed in any::<u64>(),
    ) {
        let span = if model.is_discrete_time() {
            Span::Steps(1 + (duration as u64))
        } else {
            Span::Time(duration)
        };
        let mut rng = tree_stream(seed, 7);
        for _ in 0..64 {
            let s = model.sample_segment(span, &mut rng).unwrap();
            prop_assert!(s.path_max >= 0.0);
            prop_assert!(s.path_max >= s.displacement);
            prop_assert!(s.path_max.is_finite() && s.displacement.is_finite());
        }
    }
}
