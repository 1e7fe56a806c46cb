//! Spatial motion between branching events.
//!
//! Every sampler returns the endpoint displacement together with the exact
//! supremum of the path over the segment, so the engine's running maximum has
//! no time-discretisation bias.

use alloc::vec::Vec;

use rand::{Rng, RngCore};
use rand_distr::{Exp1, StandardNormal};

use crate::rng::open_unit;
use crate::{Error, Result};

const MEAN_TOL: f64 = 1e-12;

/// Integer-valued step law `P(step = min_step + i) = probs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeStep {
    min_step: i64,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl LatticeStep {
    pub fn new(min_step: i64, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidMotion("lattice step weights must be nonnegative"));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMotion("lattice step weights must sum to one"));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let step = LatticeStep { min_step, probs, cdf };
        if step.second_moment() == 0.0 {
            return Err(Error::InvalidMotion("lattice walk must move"));
        }
        Ok(step)
    }

    /// The simple walk: ±1 with probability 1/2 each.
    pub fn simple() -> Self {
        LatticeStep::new(-1, alloc::vec![0.5, 0.0, 0.5]).expect("valid")
    }

    pub fn min_step(&self) -> i64 {
        self.min_step
    }

    pub fn max_step(&self) -> i64 {
        self.min_step + self.probs.len() as i64 - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(step, probability)` pairs with nonzero probability.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(i, p)| (self.min_step + i as i64, *p))
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(y, p)| y as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.support().map(|(y, p)| (y * y) as f64 * p).sum()
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        let u = open_unit(rng);
        let i = match self.cdf.iter().position(|&c| u < c) {
            Some(i) => i,
            None => self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0),
        };
        self.min_step + i as i64
    }
}

/// Bounded-support jump law: a finite set of real jump sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl JumpLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidMotion("jump values and weights must pair up"));
        }
        if values.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidMotion("jump law must be finite and nonnegative"));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMotion("jump weights must sum to one"));
        }
        Ok(JumpLaw { values, probs })
    }

    /// The same law shifted to mean zero.
    pub fn centered(&self) -> Self {
        let m = self.mean();
        JumpLaw {
            values: self.values.iter().map(|v| v - m).collect(),
            probs: self.probs.clone(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * v * p).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut u = open_unit(rng);
        for (v, p) in self.values.iter().zip(&self.probs) {
            if u < *p {
                return *v;
            }
            u -= p;
        }
        *self.values.last().expect("nonempty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MotionModel {
    Brownian {
        eta2: f64,
    },
    LatticeWalk {
        step: LatticeStep,
    },
    CompoundPoissonDiffusion {
        jump_rate: f64,
        jump_law: JumpLaw,
        diffusion_eta2: f64,
    },
}

/// Length of a motion segment: continuous time or a number of lattice steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Span {
    Time(f64),
    Steps(u64),
}

/// Endpoint displacement and supremum of the path over one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub displacement: f64,
    pub path_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub mean: f64,
    pub eta2_total: f64,
    /// `2α/(α−1)`: a finite moment of order above this is required.
    pub r_threshold: f64,
    /// Bounded jumps and Gaussian increments have every moment finite.
    pub all_moments_finite: bool,
}

impl MotionModel {
    pub fn brownian(eta2: f64) -> Result<Self> {
        if !(eta2 > 0.0 && eta2.is_finite()) {
            return Err(Error::InvalidMotion("Brownian variance must be positive"));
        }
        Ok(MotionModel::Brownian { eta2 })
    }

    pub fn lattice(step: LatticeStep) -> Result<Self> {
        let mean = step.mean();
        if mean.abs() > MEAN_TOL {
            return Err(Error::NonzeroMean { mean });
        }
        Ok(MotionModel::LatticeWalk { step })
    }

    pub fn compound_poisson_diffusion(
        jump_rate: f64,
        jump_law: JumpLaw,
        diffusion_eta2: f64,
    ) -> Result<Self> {
        if !(jump_rate >= 0.0 && jump_rate.is_finite()) {
            return Err(Error::InvalidMotion("jump rate must be nonnegative"));
        }
        if !(diffusion_eta2 >= 0.0 && diffusion_eta2.is_finite()) {
            return Err(Error::InvalidMotion("diffusion variance must be nonnegative"));
        }
        let mean = jump_rate * jump_law.mean();
        if mean.abs() > MEAN_TOL {
            return Err(Error::NonzeroMean { mean });
        }
        let model = MotionModel::CompoundPoissonDiffusion {
            jump_rate,
            jump_law,
            diffusion_eta2,
        };
        if model.eta2_total() <= 0.0 {
            return Err(Error::InvalidMotion("motion must have positive variance"));
        }
        Ok(model)
    }

    /// `Π₀(ξ₁²)`, the variance per unit time (per step for lattice walks).
    pub fn eta2_total(&self) -> f64 {
        match self {
            MotionModel::Brownian { eta2 } => *eta2,
            MotionModel::LatticeWalk { step } => step.second_moment(),
            MotionModel::CompoundPoissonDiffusion {
                jump_rate,
                jump_law,
                diffusion_eta2,
            } => diffusion_eta2 + jump_rate * jump_law.second_moment(),
        }
    }

    pub fn mean_per_unit_time(&self) -> f64 {
        match self {
            MotionModel::Brownian { .. } => 0.0,
            MotionModel::LatticeWalk { step } => step.mean(),
            MotionModel::CompoundPoissonDiffusion {
                jump_rate, jump_law, ..
            } => jump_rate * jump_law.mean(),
        }
    }

    pub fn is_discrete_time(&self) -> bool {
        matches!(self, MotionModel::LatticeWalk { .. })
    }

    /// Check the centring and moment conditions for offspring index `alpha`.
    pub fn validate_moments(&self, alpha: f64) -> Result<MomentReport> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let mean = self.mean_per_unit_time();
        if mean.abs() > MEAN_TOL {
            return Err(Error::NonzeroMean { mean });
        }
        Ok(MomentReport {
            mean,
            eta2_total: self.eta2_total(),
            r_threshold: 2.0 * alpha / (alpha - 1.0),
            all_moments_finite: true,
        })
    }

    /// Sample `(displacement, path_max)` over one segment.
    pub fn sample_segment<R: RngCore + ?Sized>(&self, span: Span, rng: &mut R) -> Result<Segment> {
        match (self, span) {
            (MotionModel::Brownian { eta2 }, Span::Time(t)) => {
                if !(t > 0.0) {
                    return Err(Error::NonpositiveDuration);
                }
                Ok(brownian_segment(eta2 * t, rng))
            }
            (MotionModel::LatticeWalk { step }, Span::Steps(n)) => {
                if n == 0 {
                    return Err(Error::NonpositiveDuration);
                }
                let mut pos = 0i64;
                let mut max = 0i64;
                for _ in 0..n {
                    pos += step.sample(rng);
                    max = max.max(pos);
                }
                Ok(Segment {
                    displacement: pos as f64,
                    path_max: max as f64,
                })
            }
            (
                MotionModel::CompoundPoissonDiffusion {
                    jump_rate,
                    jump_law,
                    diffusion_eta2,
                },
                Span::Time(t),
            ) => {
                if !(t > 0.0) {
                    return Err(Error::NonpositiveDuration);
                }
                Ok(cpd_segment(*jump_rate, jump_law, *diffusion_eta2, t, rng))
            }
            (MotionModel::LatticeWalk { .. }, Span::Time(_)) => {
                Err(Error::ConfigMismatch("lattice walks take an integer step count"))
            }
            (_, Span::Steps(_)) => Err(Error::ConfigMismatch("continuous motions take a real duration")),
        }
    }
}

/// Brownian segment with total variance `var = η² T`.
///
/// Given the endpoint `W`, the bridge maximum satisfies
/// `P(M⁺ ≥ m | W) = exp(−2 m (m − W) / var)` for `m ≥ max(0, W)`;
/// inverting at a uniform `U` gives `M⁺ = (W + sqrt(W² − 2 var ln U)) / 2`.
#[inline]
pub(crate) fn brownian_segment<R: RngCore + ?Sized>(var: f64, rng: &mut R) -> Segment {
    let z: f64 = rng.sample(StandardNormal);
    let w = libm::sqrt(var) * z;
    let u = open_unit(rng);
    let m = 0.5 * (w + libm::sqrt(w * w - 2.0 * var * libm::log(u)));
    Segment {
        displacement: w,
        path_max: m.max(0.0).max(w),
    }
}

fn cpd_segment<R: RngCore + ?Sized>(
    jump_rate: f64,
    jump_law: &JumpLaw,
    diffusion_eta2: f64,
    t: f64,
    rng: &mut R,
) -> Segment {
    let mut pos = 0.0f64;
    let mut max = 0.0f64;
    let mut elapsed = 0.0;
    loop {
        let gap = if jump_rate > 0.0 {
            let e: f64 = rng.sample(Exp1);
            e / jump_rate
        } else {
            f64::INFINITY
        };
        let piece = gap.min(t - elapsed);
        if diffusion_eta2 > 0.0 && piece > 0.0 {
            let s = brownian_segment(diffusion_eta2 * piece, rng);
            max = max.max(pos + s.path_max);
            pos += s.displacement;
        }
        elapsed += gap;
        if elapsed >= t {
            break;
        }
        pos += jump_law.sample(rng);
        max = max.max(pos);
    }
    Segment {
        displacement: pos,
        path_max: max,
    }
}
