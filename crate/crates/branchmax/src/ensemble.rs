//! Multi-threaded ensembles with worker-independent results.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use branchmax_core::engine::{simulate_range, SimConfig, TreeOutcome};
use branchmax_core::motion::MotionModel;
use branchmax_core::offspring::OffspringLaw;

/// Trees handed to a worker at a time.
const CHUNK: u64 = 2048;

/// Simulate trees `0..n_trees` on `workers` threads.
///
/// Each tree draws from its own `(master_seed, tree_index)` stream and the
/// chunks are reassembled by index, so the output does not depend on
/// `workers` or on scheduling.
pub fn run_ensemble(
    law: &OffspringLaw,
    model: &MotionModel,
    config: &SimConfig,
    n_trees: u64,
    workers: usize,
) -> branchmax_core::Result<Vec<TreeOutcome>> {
    config.validate(model)?;
    let workers = workers.max(1);
    if workers == 1 {
        return simulate_range(law, model, config, 0..n_trees);
    }
    let next = AtomicU64::new(0);
    let done: Mutex<Vec<(u64, Vec<TreeOutcome>)>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<branchmax_core::Error>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let start = next.fetch_add(CHUNK, Ordering::Relaxed);
                if start >= n_trees {
                    break;
                }
                let end = (start + CHUNK).min(n_trees);
                match simulate_range(law, model, config, start..end) {
                    Ok(chunk) => done.lock().unwrap().push((start, chunk)),
                    Err(e) => {
                        *failure.lock().unwrap() = Some(e);
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut chunks = done.into_inner().unwrap();
    chunks.sort_unstable_by_key(|c| c.0);
    let mut out = Vec::with_capacity(n_trees as usize);
    for (_, chunk) in chunks {
        out.extend(chunk);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use branchmax_core::engine::Mode;
    use branchmax_core::motion::LatticeStep;
    use branchmax_core::offspring::{make_explicit, make_stable_tail};

    #[test]
    fn worker_count_does_not_change_outcomes() {
        let law = make_explicit(&[0.5, 0.0, 0.5]).unwrap();
        let model = MotionModel::lattice(LatticeStep::simple()).unwrap();
        let config = SimConfig {
            mode: Mode::DiscreteTime,
            budget: 10_000,
            stop_threshold: None,
            master_seed: 99,
        };
        let one = run_ensemble(&law, &model, &config, 5000, 1).unwrap();
        let eight = run_ensemble(&law, &model, &config, 5000, 8).unwrap();
        assert_eq!(one, eight);
        let hundred = run_ensemble(&law, &model, &config, 100, 8).unwrap();
        assert_eq!(&one[..100], &hundred[..]);
    }

    #[test]
    fn continuous_ensemble_is_deterministic() {
        let law = make_stable_tail(1.5, 0.2).unwrap();
        let model = MotionModel::brownian(1.0).unwrap();
        let config = SimConfig {
            mode: Mode::ContinuousTime { beta: 1.0 },
            budget: 100_000,
            stop_threshold: Some(16.0),
            master_seed: 3,
        };
        let a = run_ensemble(&law, &model, &config, 3000, 3).unwrap();
        let b = run_ensemble(&law, &model, &config, 3000, 1).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.m_observed.to_bits() == y.m_observed.to_bits()));
        assert_eq!(a, b);
    }
}
