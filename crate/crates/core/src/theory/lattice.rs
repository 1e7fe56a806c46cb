//! Non-crossing probabilities for the branching random walk on `Z`.
//!
//! Let `u(x)` be the probability that the reflected process started from one
//! particle at `x > 0` never puts a particle at or below 0, and `v = 1 − u`,
//! so `v(x) = P(M ≥ x)`. A particle at `x` has `K` children, each displaced
//! by an independent step. Conditioning on the first brood gives
//!
//! `v(x) = H(w(x))`, `w(x) = Σ_y μ_y ṽ(x − y)`, `H(w) = 1 − G(1 − w)`,
//!
//! with `ṽ = 1` on `(−∞, 0]`, `ṽ = v` on `[1, x_max]` and `ṽ = 0` beyond
//! `x_max`. Both solvers start from `v ≡ 1` (`u ≡ 0`) and decrease
//! monotonically to the maximal solution in `v`, i.e. the minimal one in `u`.

use alloc::vec;
use alloc::vec::Vec;

use crate::motion::LatticeStep;
use crate::offspring::OffspringLaw;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointMethod {
    /// Newton's method on `v − T(v) = 0` with a banded linear solve.
    Newton,
    /// Plain Jacobi sweeps `v ← T(v)`; converges like `1 − O(x_max^{-2})`.
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Sup-norm change between iterates at which to stop.
    pub tol: f64,
    pub max_iter: usize,
    pub method: FixedPointMethod,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
            method: FixedPointMethod::Newton,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    pub x_max: usize,
    /// `v[i]` is `v(i + 1)`.
    pub v: Vec<f64>,
    pub iterations: usize,
    pub last_change: f64,
}

impl FixedPointSolution {
    /// `ṽ(x)`: 1 at or below zero, 0 beyond the window.
    pub fn value(&self, x: i64) -> f64 {
        if x <= 0 {
            1.0
        } else if x as usize > self.x_max {
            0.0
        } else {
            self.v[x as usize - 1]
        }
    }
}

struct Problem<'a> {
    law: &'a OffspringLaw,
    support: Vec<(i64, f64)>,
    x_max: usize,
}

impl Problem<'_> {
    fn arg(&self, v: &[f64], x: usize) -> f64 {
        let mut w = 0.0;
        for &(y, p) in &self.support {
            let z = x as i64 - y;
            let vz = if z <= 0 {
                1.0
            } else if z as usize > self.x_max {
                0.0
            } else {
                v[z as usize - 1]
            };
            w += p * vz;
        }
        w.min(1.0)
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.law.complement_pgf(self.arg(v, i + 1));
        }
    }
}

/// Solve for `v(x)`, `x = 1..=x_max`.
pub fn discrete_fixed_point(
    law: &OffspringLaw,
    step: &LatticeStep,
    x_max: usize,
    options: &FixedPointOptions,
) -> Result<FixedPointSolution> {
    if !law.is_explicit() {
        return Err(Error::WrongKind);
    }
    let mean = step.mean();
    if mean.abs() > 1e-12 {
        return Err(Error::NonzeroMean { mean });
    }
    if x_max == 0 {
        return Err(Error::InvalidParameter {
            name: "x_max",
            value: 0.0,
            constraint: "must be positive",
        });
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: options.tol,
            constraint: "must be positive",
        });
    }
    let problem = Problem {
        law,
        support: step.support().collect(),
        x_max,
    };
    match options.method {
        FixedPointMethod::Jacobi => jacobi(&problem, options, |_, _| {}),
        FixedPointMethod::Newton => newton(&problem, step, options, |_, _| {}),
    }
}

/// As [`discrete_fixed_point`], calling `observe(iteration, iterate)` after
/// every update.
pub fn discrete_fixed_point_traced(
    law: &OffspringLaw,
    step: &LatticeStep,
    x_max: usize,
    options: &FixedPointOptions,
    observe: impl FnMut(usize, &[f64]),
) -> Result<FixedPointSolution> {
    if !law.is_explicit() {
        return Err(Error::WrongKind);
    }
    let problem = Problem {
        law,
        support: step.support().collect(),
        x_max,
    };
    match options.method {
        FixedPointMethod::Jacobi => jacobi(&problem, options, observe),
        FixedPointMethod::Newton => newton(&problem, step, options, observe),
    }
}

/// Largest change at `points` when the window grows from `x_max` to `2 x_max`.
pub fn boundary_sensitivity(
    law: &OffspringLaw,
    step: &LatticeStep,
    x_max: usize,
    points: &[i64],
    options: &FixedPointOptions,
) -> Result<f64> {
    let a = discrete_fixed_point(law, step, x_max, options)?;
    let b = discrete_fixed_point(law, step, 2 * x_max, options)?;
    Ok(points
        .iter()
        .map(|&x| (a.value(x) - b.value(x)).abs())
        .fold(0.0, f64::max))
}

fn jacobi(
    problem: &Problem<'_>,
    options: &FixedPointOptions,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<FixedPointSolution> {
    let n = problem.x_max;
    let mut v = vec![1.0; n];
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    for it in 1..=options.max_iter {
        problem.apply(&v, &mut next);
        change = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        core::mem::swap(&mut v, &mut next);
        observe(it, &v);
        if change < options.tol {
            return Ok(FixedPointSolution {
                x_max: n,
                v,
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: options.max_iter,
        change,
    })
}

fn newton(
    problem: &Problem<'_>,
    step: &LatticeStep,
    options: &FixedPointOptions,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<FixedPointSolution> {
    let n = problem.x_max;
    // column z = x − y, so offsets z − x run over [−max_step, −min_step]
    let lower = step.max_step().max(0) as usize;
    let upper = (-step.min_step()).max(0) as usize;
    let mut band = Band::new(n, lower, upper);
    let mut v = vec![1.0; n];
    let mut rhs = vec![0.0; n];
    let mut change = f64::INFINITY;
    for it in 1..=options.max_iter {
        band.clear();
        for x in 1..=n {
            let w = problem.arg(&v, x);
            rhs[x - 1] = v[x - 1] - problem.law.complement_pgf(w);
            let slope = problem.law.pgf_derivative(1.0 - w)?;
            band.add(x - 1, x - 1, 1.0);
            for &(y, p) in &problem.support {
                let z = x as i64 - y;
                if z >= 1 && z as usize <= n {
                    band.add(x - 1, z as usize - 1, -slope * p);
                }
            }
        }
        band.solve(&mut rhs);
        change = 0.0;
        for (vi, d) in v.iter_mut().zip(&rhs) {
            // iterates stay in [0, 1]; clamping only trims round-off
            let next = (*vi - d).clamp(0.0, 1.0);
            change = change.max((next - *vi).abs());
            *vi = next;
        }
        observe(it, &v);
        if change < options.tol {
            return Ok(FixedPointSolution {
                x_max: n,
                v,
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: options.max_iter,
        change,
    })
}

/// Banded matrix with `lower` sub- and `upper` super-diagonals, eliminated
/// without pivoting (the Newton matrices are diagonally dominant M-matrices).
struct Band {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl Band {
    fn new(n: usize, lower: usize, upper: usize) -> Self {
        Band {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    fn clear(&mut self) {
        self.data.iter_mut().for_each(|a| *a = 0.0);
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.lower + self.upper + 1) + (j + self.lower - i)
    }

    fn add(&mut self, i: usize, j: usize, a: f64) {
        let k = self.idx(i, j);
        self.data[k] += a;
    }

    fn solve(&mut self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let pivot = self.data[self.idx(k, k)];
            let row_end = (k + self.upper).min(n - 1);
            for i in k + 1..=(k + self.lower).min(n - 1) {
                let f = self.data[self.idx(i, k)] / pivot;
                if f == 0.0 {
                    continue;
                }
                for j in k..=row_end {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= f * kj;
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + self.upper).min(n - 1) {
                acc -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = acc / self.data[self.idx(k, k)];
        }
    }
}
