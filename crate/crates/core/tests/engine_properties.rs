use branchmax_core::engine::{simulate_range, simulate_tree, Mode, SimConfig};
use branchmax_core::estimator::{estimate_tail_with_confidence, TailEstimate};
use branchmax_core::motion::{JumpLaw, LatticeStep, MotionModel};
use branchmax_core::offspring::{make_explicit, make_stable_tail, OffspringLaw};
use branchmax_core::special::zeta;
use branchmax_core::theory::{discrete_fixed_point, FixedPointOptions};
use proptest::prelude::*;

const CRITICAL_LAWS: &[&[f64]] = &[
    &[0.5, 0.0, 0.5],
    &[0.25, 0.5, 0.25],
    &[2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0],
    &[0.4, 0.4, 0.05, 0.1, 0.05],
    &[0.75, 0.0, 0.0, 0.0, 0.25],
];

fn binary() -> OffspringLaw {
    make_explicit(&[0.5, 0.0, 0.5]).unwrap()
}

fn walk() -> MotionModel {
    MotionModel::lattice(LatticeStep::simple()).unwrap()
}

fn discrete(budget: u64, stop: Option<f64>, seed: u64) -> SimConfig {
    SimConfig {
        mode: Mode::DiscreteTime,
        budget,
        stop_threshold: stop,
        master_seed: seed,
    }
}

fn continuous(budget: u64, stop: Option<f64>, seed: u64) -> SimConfig {
    SimConfig {
        mode: Mode::ContinuousTime { beta: 1.0 },
        budget,
        stop_threshold: stop,
        master_seed: seed,
    }
}

/// Critical law mixed with a point mass at one child; `p1 < 1` throughout.
fn explicit_law() -> impl Strategy<Value = (OffspringLaw, u64)> {
    (0..CRITICAL_LAWS.len(), 0.0f64..0.9).prop_map(|(i, hold)| {
        let base = CRITICAL_LAWS[i];
        let mut p: Vec<f64> = base.iter().map(|q| q * (1.0 - hold)).collect();
        p[1] += hold;
        let max_brood = (base.len() - 1) as u64;
        (make_explicit(&p).unwrap(), max_brood)
    })
}

fn stable_law() -> impl Strategy<Value = OffspringLaw> {
    (1.05f64..1.95, 0.01f64..1.0).prop_map(|(alpha, frac)| {
        let kappa_max = 1.0 / (libm::pow(2.0, -alpha) + zeta(alpha) - 1.0);
        make_stable_tail(alpha, frac * kappa_max).unwrap()
    })
}

fn continuous_model() -> impl Strategy<Value = MotionModel> {
    prop_oneof![
        (0.1f64..4.0).prop_map(|e| MotionModel::brownian(e).unwrap()),
        (0.1f64..3.0, 0.0f64..1.0).prop_map(|(rate, diff)| {
            let jumps = JumpLaw::new(vec![-1.0, 2.0], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
            MotionModel::compound_poisson_diffusion(rate, jumps, diff).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5_000))]

    #[test]
    fn discrete_trees_terminate_within_overshoot(
        (law, max_brood) in explicit_law(),
        budget in 1u64..2_000,
        stop in prop::option::of(0.0f64..30.0),
        seed in any::<u64>(),
        index in any::<u64>(),
    ) {
        let out = simulate_tree(&law, &walk(), &discrete(budget, stop, seed), index).unwrap();
        prop_assert!(out.m_observed >= 0.0);
        prop_assert!(!(out.censored && out.stopped_early));
        prop_assert!(out.particles_created <= budget + max_brood);
        if !out.censored {
            prop_assert!(out.particles_created <= budget);
        }
        if let Some(s) = stop {
            prop_assert_eq!(out.stopped_early, out.m_observed >= s);
        }
    }

    #[test]
    fn continuous_trees_terminate(
        law in stable_law(),
        model in continuous_model(),
        budget in 1u64..2_000,
        stop in prop::option::of(0.0f64..20.0),
        seed in any::<u64>(),
        index in any::<u64>(),
    ) {
        let out = simulate_tree(&law, &model, &continuous(budget, stop, seed), index).unwrap();
        prop_assert!(out.m_observed >= 0.0 && out.m_observed.is_finite());
        prop_assert!(!(out.censored && out.stopped_early));
        if !out.censored {
            prop_assert!(out.particles_created <= budget);
        }
    }
}

#[test]
fn doubling_the_budget_never_lowers_the_maximum() {
    let cases: [(OffspringLaw, MotionModel, fn(u64, Option<f64>, u64) -> SimConfig); 2] = [
        (binary(), walk(), discrete),
        (make_stable_tail(1.5, 0.2).unwrap(), MotionModel::brownian(1.0).unwrap(), continuous),
    ];
    for (law, model, make) in &cases {
        let mut censored = 0;
        for budget in [10, 100, 1000] {
            for index in 0..3000 {
                let a = simulate_tree(law, model, &make(budget, None, 5), index).unwrap();
                if !a.censored {
                    continue;
                }
                censored += 1;
                let b = simulate_tree(law, model, &make(2 * budget, None, 5), index).unwrap();
                assert!(b.m_observed >= a.m_observed, "tree {index} budget {budget}");
                assert!(b.particles_created >= a.particles_created);
            }
        }
        assert!(censored > 100, "too few censored trees to test: {censored}");
    }
}

#[test]
fn early_stop_flags_exactly_the_crossing_trees() {
    let stable = make_stable_tail(1.5, 0.2).unwrap();
    let bm = MotionModel::brownian(1.0).unwrap();
    for budget in [50, 1_000_000] {
        for x in [0.0, 3.0, 8.0] {
            let free = simulate_range(&stable, &bm, &continuous(budget, None, 9), 0..4000).unwrap();
            let stopped = simulate_range(&stable, &bm, &continuous(budget, Some(x), 9), 0..4000).unwrap();
            for (a, b) in free.iter().zip(&stopped) {
                assert_eq!(a.m_observed >= x, b.stopped_early || b.m_observed >= x);
            }
        }
        for x in [1.0, 5.0, 12.0] {
            let free = simulate_range(&binary(), &walk(), &discrete(budget, None, 9), 0..4000).unwrap();
            let stopped = simulate_range(&binary(), &walk(), &discrete(budget, Some(x), 9), 0..4000).unwrap();
            for (a, b) in free.iter().zip(&stopped) {
                assert_eq!(a.m_observed >= x, b.stopped_early || b.m_observed >= x);
            }
        }
    }
}

fn assert_inside(est: &TailEstimate, exact: &[f64]) {
    for (i, &p) in exact.iter().enumerate() {
        let (lo, hi) = (est.ci_low[i].0, est.ci_high[i].1);
        assert!(
            lo <= p && p <= hi,
            "x={}: exact {p} outside [{lo}, {hi}]",
            est.x_grid[i]
        );
    }
}

#[test]
fn branching_random_walk_matches_lattice_fixed_point() {
    let grid = [15.0, 20.0, 25.0, 30.0];
    let step = LatticeStep::simple();
    let sol = discrete_fixed_point(&binary(), &step, 4000, &FixedPointOptions::default()).unwrap();
    let exact: Vec<f64> = grid.iter().map(|&x| sol.value(x as i64)).collect();
    let out = simulate_range(&binary(), &walk(), &discrete(1_000_000, None, 77), 0..100_000).unwrap();
    let est = estimate_tail_with_confidence(&out, &grid, 0.999).unwrap();
    assert_inside(&est, &exact);
}

/// `P(M ≥ x)` for StableTail(1.5, 0.2), β = 1, η² = 1, from the first
/// integral of `½u'' = f(u)` with the exact offspring generating function
/// (30-digit polylogarithms, converged to 1e-8 relative).
const BBM_EXACT: [(f64, f64); 5] = [
    (8.0, 0.0152496579),
    (10.0, 0.00790886676),
    (12.0, 0.00447126603),
    (14.0, 0.00270409272),
    (16.0, 0.00172576276),
];

#[test]
fn branching_brownian_motion_matches_exact_survival_curve() {
    let law = make_stable_tail(1.5, 0.2).unwrap();
    let bm = MotionModel::brownian(1.0).unwrap();
    let out = simulate_range(&law, &bm, &continuous(1_000_000, Some(16.0), 78), 0..400_000).unwrap();
    let grid: Vec<f64> = BBM_EXACT.iter().map(|r| r.0).collect();
    let exact: Vec<f64> = BBM_EXACT.iter().map(|r| r.1).collect();
    let est = estimate_tail_with_confidence(&out, &grid, 0.999).unwrap();
    assert_eq!(est.n_censored, 0);
    assert_inside(&est, &exact);
}
