//! Shooting on the initial slope for
//! `(η²/2) φ'' = c φ^α`, `φ(0) = 1`, `φ(∞) = 0`.
//!
//! `φ(y_max)` is increasing in the slope `s = φ'(0)`: too steep and the
//! trajectory crosses zero, too shallow and it turns back up. Bisection on
//! `s` against a far-field value at `y_max` pins the decaying solution.

use alloc::vec::Vec;

use super::{phi_closed_form, theta, TheoryParams};
use crate::{Error, Result};

const MAX_BRACKET_DOUBLINGS: u32 = 60;
const MAX_BISECTIONS: u32 = 200;

/// Value imposed on `φ(y_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarField {
    Zero,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    pub y: Vec<f64>,
    pub phi: Vec<f64>,
    /// Recovered `φ'(0)`.
    pub slope_at_zero: f64,
    pub bisection_steps: u32,
}

/// Shooting solve with the far-field value taken from the power-law tail at
/// `y_max`; that value is used only as the bisection target.
pub fn solve_bvp_shooting(params: &TheoryParams, y_max: f64, grid_step: f64) -> Result<BvpSolution> {
    params.check_stable()?;
    let target = phi_closed_form(y_max.max(0.0), params)?;
    solve_bvp_shooting_with(params, y_max, grid_step, FarField::Value(target))
}

pub fn solve_bvp_shooting_with(
    params: &TheoryParams,
    y_max: f64,
    grid_step: f64,
    far_field: FarField,
) -> Result<BvpSolution> {
    params.check_stable()?;
    let th = theta(params);
    if !(y_max >= 10.0 / th) || !y_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "y_max",
            value: y_max,
            constraint: "must be at least 10/theta",
        });
    }
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            value: grid_step,
            constraint: "must lie in (0, 0.01]",
        });
    }
    let target = match far_field {
        FarField::Zero => 0.0,
        FarField::Value(v) => v,
    };
    let steps = libm::ceil(y_max / grid_step) as usize;
    let ode = Rhs {
        k: 2.0 * params.reaction_coefficient() / params.eta2,
        alpha: params.alpha,
        h: y_max / steps as f64,
        steps,
    };

    let mut hi = 0.0f64;
    let mut lo = -1.0f64;
    let mut doublings = 0;
    while ode.end_value(lo, target) >= target {
        hi = lo;
        lo *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::ShootingBracketFailure { lo, hi });
        }
    }
    if ode.end_value(hi, target) < target {
        return Err(Error::ShootingBracketFailure { lo, hi });
    }

    let mut bisection_steps = 0;
    while bisection_steps < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ode.end_value(mid, target) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        bisection_steps += 1;
    }

    let slope = 0.5 * (lo + hi);
    let mut y = Vec::with_capacity(steps + 1);
    let mut phi = Vec::with_capacity(steps + 1);
    ode.integrate(slope, |i, state| {
        y.push(i as f64 * ode.h);
        phi.push(state.0);
        true
    });
    Ok(BvpSolution {
        y,
        phi,
        slope_at_zero: slope,
        bisection_steps,
    })
}

struct Rhs {
    k: f64,
    alpha: f64,
    h: f64,
    steps: usize,
}

impl Rhs {
    #[inline]
    fn accel(&self, phi: f64) -> f64 {
        if phi > 0.0 {
            self.k * libm::exp(self.alpha * libm::log(phi))
        } else {
            0.0
        }
    }

    /// Classical RK4 on `(φ, φ')`; `visit` may stop the sweep early.
    fn integrate(&self, slope: f64, mut visit: impl FnMut(usize, (f64, f64)) -> bool) -> (f64, f64) {
        let h = self.h;
        let mut state = (1.0f64, slope);
        if !visit(0, state) {
            return state;
        }
        for i in 1..=self.steps {
            let (p, d) = state;
            let k1p = d;
            let k1d = self.accel(p);
            let k2p = d + 0.5 * h * k1d;
            let k2d = self.accel(p + 0.5 * h * k1p);
            let k3p = d + 0.5 * h * k2d;
            let k3d = self.accel(p + 0.5 * h * k2p);
            let k4p = d + h * k3d;
            let k4d = self.accel(p + h * k3p);
            state = (
                p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
                d + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
            );
            if !visit(i, state) {
                return state;
            }
        }
        state
    }

    /// `φ(y_max)` for slope `s`, cut short once the outcome is decided.
    fn end_value(&self, slope: f64, target: f64) -> f64 {
        let mut decided = None;
        let end = self.integrate(slope, |_, (p, d)| {
            if p <= 0.0 {
                decided = Some(-1.0);
                false
            } else if d > 0.0 && p > target {
                // convex from here on: φ only grows
                decided = Some(f64::INFINITY);
                false
            } else {
                true
            }
        });
        decided.unwrap_or(end.0)
    }
}
