//! Empirical tail of `M` with censoring brackets, Wilson intervals, and a
//! log–log exponent fit.

use alloc::vec::Vec;

use crate::engine::TreeOutcome;
use crate::special::normal_quantile;
use crate::{Error, Result};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// `P̂(M ≥ x)` on a grid.
///
/// `counts_low` counts trees whose observed maximum reached `x`;
/// `counts_high` additionally counts censored trees that had not, since
/// their true maximum is unknown. The true empirical survival lies between.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub x_grid: Vec<f64>,
    pub n_trees: u64,
    pub n_censored: u64,
    pub counts_low: Vec<u64>,
    pub counts_high: Vec<u64>,
    pub p_low: Vec<f64>,
    pub p_high: Vec<f64>,
    /// Wilson interval for `p_low` at `confidence`.
    pub ci_low: Vec<(f64, f64)>,
    /// Wilson interval for `p_high` at `confidence`.
    pub ci_high: Vec<(f64, f64)>,
    pub confidence: f64,
}

impl TailEstimate {
    pub fn p_mid(&self, i: usize) -> f64 {
        0.5 * (self.p_low[i] + self.p_high[i])
    }

    pub fn censored_fraction(&self) -> f64 {
        self.n_censored as f64 / self.n_trees as f64
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    debug_assert!(k <= n && n > 0);
    let z = normal_quantile(0.5 + 0.5 * confidence);
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn check_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.is_empty()
        || x_grid.iter().any(|x| !(*x > 0.0) || !x.is_finite())
        || x_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

pub fn estimate_tail(outcomes: &[TreeOutcome], x_grid: &[f64]) -> Result<TailEstimate> {
    estimate_tail_with_confidence(outcomes, x_grid, DEFAULT_CONFIDENCE)
}

pub fn estimate_tail_with_confidence(
    outcomes: &[TreeOutcome],
    x_grid: &[f64],
    confidence: f64,
) -> Result<TailEstimate> {
    check_grid(x_grid)?;
    if outcomes.is_empty() {
        return Err(Error::InsufficientData { usable: 0, required: 1 });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter {
            name: "confidence",
            value: confidence,
            constraint: "must lie in (0, 1)",
        });
    }
    // an early-stopped tree only certifies M ≥ its observed value
    let x_last = *x_grid.last().expect("nonempty");
    if let Some(stopped) = outcomes
        .iter()
        .filter(|o| o.stopped_early)
        .map(|o| o.m_observed)
        .reduce(f64::min)
    {
        if x_last > stopped {
            return Err(Error::GridBeyondStopThreshold { x: x_last, x_stop: stopped });
        }
    }

    let n = outcomes.len() as u64;
    let n_censored = outcomes.iter().filter(|o| o.censored).count() as u64;
    let mut counts_low = Vec::with_capacity(x_grid.len());
    let mut counts_high = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let mut low = 0u64;
        let mut pending = 0u64;
        for o in outcomes {
            if o.m_observed >= x {
                low += 1;
            } else if o.censored {
                pending += 1;
            }
        }
        counts_low.push(low);
        counts_high.push(low + pending);
    }
    let nf = n as f64;
    let p_low = counts_low.iter().map(|&c| c as f64 / nf).collect();
    let p_high = counts_high.iter().map(|&c| c as f64 / nf).collect();
    let ci_low = counts_low.iter().map(|&c| wilson_interval(c, n, confidence)).collect();
    let ci_high = counts_high.iter().map(|&c| wilson_interval(c, n, confidence)).collect();
    Ok(TailEstimate {
        x_grid: x_grid.to_vec(),
        n_trees: n,
        n_censored,
        counts_low,
        counts_high,
        p_low,
        p_high,
        ci_low,
        ci_high,
        confidence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Minimum `counts_low` for a grid point to enter the fit.
pub const FIT_MIN_COUNT: u64 = 100;

/// Weighted least squares of `ln p_mid` on `ln x` over `x_min ≤ x ≤ x_max`.
///
/// Each point is weighted by the inverse of the relative variance of its
/// proportion, `n p / (1 − p)`.
pub fn fit_exponent(est: &TailEstimate, window: (f64, f64)) -> Result<ExponentFit> {
    let (x_min, x_max) = window;
    let n = est.n_trees as f64;
    let pts: Vec<(f64, f64, f64)> = est
        .x_grid
        .iter()
        .enumerate()
        .filter(|(i, x)| **x >= x_min && **x <= x_max && est.counts_low[*i] >= FIT_MIN_COUNT)
        .map(|(i, &x)| {
            let p = est.p_mid(i);
            let w = n * p / (1.0 - p).max(1.0 / n);
            (libm::log(x), libm::log(p), w)
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            usable: pts.len(),
            required: 3,
        });
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(ExponentFit {
        slope,
        stderr: libm::sqrt(1.0 / sxx),
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRow {
    pub x: f64,
    pub scaled_low: f64,
    pub scaled_high: f64,
    /// `(x^e p_mid − c*) / c*`
    pub rel_deviation: f64,
}

/// `x^exponent · p` for both bracket ends, sorted by `x`.
pub fn compare_constant(est: &TailEstimate, exponent: f64, c_star: f64) -> Vec<ConstantRow> {
    let mut rows: Vec<ConstantRow> = est
        .x_grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let scale = libm::pow(x, exponent);
            let lo = scale * est.p_low[i];
            let hi = scale * est.p_high[i];
            ConstantRow {
                x,
                scaled_low: lo,
                scaled_high: hi,
                rel_deviation: (0.5 * (lo + hi) - c_star) / c_star,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.x.total_cmp(&b.x));
    rows
}
