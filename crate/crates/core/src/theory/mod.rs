//! Closed-form limit objects and two independent numerical oracles for them:
//! a shooting solver for the Emden–Fowler boundary value problem and a
//! lattice fixed-point solver for the non-crossing probability.

mod bvp;
mod lattice;

pub use bvp::{solve_bvp_shooting, solve_bvp_shooting_with, BvpSolution, FarField};
pub use lattice::{
    boundary_sensitivity, discrete_fixed_point, discrete_fixed_point_traced, FixedPointMethod,
    FixedPointOptions, FixedPointSolution,
};

use alloc::vec::Vec;

use crate::special::gamma;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub alpha: f64,
    pub kappa: f64,
    pub beta: f64,
    pub eta2: f64,
    pub sigma2: Option<f64>,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint: "must be positive and finite",
        })
    }
}

impl TheoryParams {
    /// Parameters for the stable-branching formulas.
    pub fn stable(alpha: f64, kappa: f64, beta: f64, eta2: f64) -> Result<Self> {
        let p = TheoryParams {
            alpha,
            kappa,
            beta,
            eta2,
            sigma2: None,
        };
        p.check_stable()?;
        Ok(p)
    }

    /// Parameters for the finite-variance baselines.
    pub fn finite_variance(beta: f64, eta2: f64, sigma2: f64) -> Result<Self> {
        positive("beta", beta)?;
        positive("eta2", eta2)?;
        positive("sigma2", sigma2)?;
        Ok(TheoryParams {
            alpha: f64::NAN,
            kappa: f64::NAN,
            beta,
            eta2,
            sigma2: Some(sigma2),
        })
    }

    pub fn check_stable(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        positive("kappa", self.kappa)?;
        positive("beta", self.beta)?;
        positive("eta2", self.eta2)
    }

    /// `β κ Γ(2−α) / (α−1)`, the coefficient of `φ^α` in the limit ODE.
    pub fn reaction_coefficient(&self) -> f64 {
        self.beta * self.kappa * gamma(2.0 - self.alpha) / (self.alpha - 1.0)
    }

    /// `2/(α−1)`, the tail exponent.
    pub fn tail_exponent(&self) -> f64 {
        2.0 / (self.alpha - 1.0)
    }
}

/// `θ = (β κ Γ(2−α)(α−1) / (η²(α+1)))^{1/2}`.
pub fn theta(params: &TheoryParams) -> f64 {
    let a = params.alpha;
    libm::sqrt(params.beta * params.kappa * gamma(2.0 - a) * (a - 1.0) / (params.eta2 * (a + 1.0)))
}

/// `lim x^{2/(α−1)} P(M ≥ x)`.
pub fn limit_constant(params: &TheoryParams) -> f64 {
    let a = params.alpha;
    let base = (a + 1.0) * params.eta2 / (params.beta * params.kappa * (a - 1.0) * gamma(2.0 - a));
    libm::pow(base, 1.0 / (a - 1.0))
}

/// Finite-variance limit of `x² P(M ≥ x)`.
///
/// Discrete time gives `6η²/σ²`. For continuous time the constant is
/// reported as `6η²/(βσ²)`, which is `6/σ²` for a standard Brownian motion
/// branching at unit rate; only that case is checked numerically.
pub fn finite_variance_constant(params: &TheoryParams, discrete: bool) -> Result<f64> {
    let sigma2 = params.sigma2.ok_or(Error::MissingSigma2)?;
    let c = 6.0 * params.eta2 / sigma2;
    Ok(if discrete { c } else { c / params.beta })
}

/// `φ(y) = (θ y + 1)^{−2/(α−1)}`.
pub fn phi_closed_form(y: f64, params: &TheoryParams) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::NegativeY(y));
    }
    Ok(libm::pow(theta(params) * y + 1.0, -params.tail_exponent()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub max_abs: f64,
    /// Max of `|residual| / (c φ^α)`.
    pub max_rel: f64,
}

/// Residual of `(η²/2) φ'' − c φ^α` for the closed form, with `φ''` exact.
pub fn ode_residual(params: &TheoryParams, y_grid: &[f64]) -> Residual {
    let th = theta(params);
    let m = params.tail_exponent();
    ode_residual_of(params, y_grid, |y| {
        let base = th * y + 1.0;
        (libm::pow(base, -m), m * (m + 1.0) * th * th * libm::pow(base, -m - 2.0))
    })
}

/// Residual for any candidate `y ↦ (φ(y), φ''(y))`.
pub fn ode_residual_of(
    params: &TheoryParams,
    y_grid: &[f64],
    phi_and_second: impl Fn(f64) -> (f64, f64),
) -> Residual {
    let c = params.reaction_coefficient();
    let mut out = Residual {
        max_abs: 0.0,
        max_rel: 0.0,
    };
    for &y in y_grid {
        let (phi, second) = phi_and_second(y);
        let reaction = c * libm::pow(phi, params.alpha);
        let r = libm::fabs(0.5 * params.eta2 * second - reaction);
        out.max_abs = out.max_abs.max(r);
        out.max_rel = out.max_rel.max(r / reaction);
    }
    out
}

/// Derived constants for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryTable {
    pub theta: f64,
    pub c_star: f64,
    pub lemma2_constant: f64,
    pub tail_exponent: f64,
    pub phi_slope_at_zero: f64,
    pub phi_samples: Vec<(f64, f64)>,
}

pub fn theory_table(params: &TheoryParams) -> Result<TheoryTable> {
    params.check_stable()?;
    let th = theta(params);
    let m = params.tail_exponent();
    let phi_samples = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|&y| (y, libm::pow(th * y + 1.0, -m)))
        .collect();
    Ok(TheoryTable {
        theta: th,
        c_star: limit_constant(params),
        lemma2_constant: params.reaction_coefficient(),
        tail_exponent: m,
        phi_slope_at_zero: -m * th,
        phi_samples,
    })
}
