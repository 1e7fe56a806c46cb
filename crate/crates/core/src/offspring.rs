//! Critical offspring laws.
//!
//! Two families are supported. [`OffspringKind::StableTail`] has the tail
//! `P(K ≥ n) = κ n^{-α}` exactly for every `n ≥ 2`, with `p_0` and `p_1`
//! chosen so that the mean is one. [`OffspringKind::Explicit`] is a finite
//! probability vector, used for the finite-variance baselines.

use alloc::vec::Vec;

use crate::special::{euler_maclaurin_correction, gamma, hurwitz_zeta, upper_incomplete_gamma, zeta};
use crate::{Error, Result};

const MASS_TOL: f64 = 1e-12;
const MEAN_TOL: f64 = 1e-9;

/// Number of tail terms summed directly before switching to Euler–Maclaurin.
const DIRECT_TERMS: u32 = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum OffspringKind {
    StableTail { alpha: f64, kappa: f64 },
    Explicit { p: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    kind: OffspringKind,
    p0: f64,
    p1: f64,
    mean: f64,
    // 1 − mean for subcritical test laws, exactly 0 for critical ones
    deficit: f64,
    sigma2: Option<f64>,
    // Explicit only: cdf[k] = P(K ≤ k), tail[n] = P(K ≥ n)
    cdf: Vec<f64>,
    tail: Vec<f64>,
}

/// The canonical exact-tail law with parameters `(alpha, kappa)`.
pub fn make_stable_tail(alpha: f64, kappa: f64) -> Result<OffspringLaw> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            value: kappa,
            constraint: "must be positive and finite",
        });
    }
    let tail2 = kappa * libm::pow(2.0, -alpha);
    let zeta_excess = zeta(alpha) - 1.0;
    let s = tail2 + kappa * zeta_excess;
    if s > 1.0 {
        return Err(Error::InfeasibleParameters { required: s });
    }
    let p0 = kappa * zeta_excess;
    let p1 = 1.0 - s;
    // Σ k p_k = p_1 + P(K ≥ 2) + Σ_{n≥2} P(K ≥ n)
    let mean = p1 + tail2 + kappa * zeta_excess;
    Ok(OffspringLaw {
        kind: OffspringKind::StableTail { alpha, kappa },
        p0,
        p1,
        mean,
        deficit: 0.0,
        sigma2: None,
        cdf: Vec::new(),
        tail: Vec::new(),
    })
}

/// A finite critical law `P(K = k) = p[k]`.
pub fn make_explicit(p: &[f64]) -> Result<OffspringLaw> {
    build_explicit(p, true)
}

/// Like [`make_explicit`] but accepts any mean `≤ 1`, e.g. the childless law
/// `p_0 = 1` used as a boundary case.
pub fn make_explicit_subcritical(p: &[f64]) -> Result<OffspringLaw> {
    build_explicit(p, false)
}

fn build_explicit(p: &[f64], critical: bool) -> Result<OffspringLaw> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::NotADistribution { mass: p.iter().sum() });
    }
    let mass: f64 = p.iter().sum();
    if libm::fabs(mass - 1.0) > MASS_TOL {
        return Err(Error::NotADistribution { mass });
    }
    let mean: f64 = p.iter().enumerate().map(|(k, &x)| k as f64 * x).sum();
    let off = if critical { libm::fabs(mean - 1.0) } else { mean - 1.0 };
    if off > MEAN_TOL {
        return Err(Error::NotCritical { mean });
    }
    let p1 = p.get(1).copied().unwrap_or(0.0);
    if p1 >= 1.0 {
        return Err(Error::DegenerateLaw);
    }
    let second: f64 = p.iter().enumerate().map(|(k, &x)| (k * k) as f64 * x).sum();

    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in p {
        acc += x;
        cdf.push(acc);
    }
    let mut tail = alloc::vec![0.0; p.len() + 1];
    for k in (0..p.len()).rev() {
        tail[k] = tail[k + 1] + p[k];
    }

    Ok(OffspringLaw {
        kind: OffspringKind::Explicit { p: p.to_vec() },
        p0: p.first().copied().unwrap_or(0.0),
        p1,
        mean,
        deficit: if critical { 0.0 } else { 1.0 - mean },
        sigma2: Some(second - 1.0),
        cdf,
        tail,
    })
}

impl OffspringLaw {
    pub fn kind(&self) -> &OffspringKind {
        &self.kind
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `Σ k² p_k − 1` for explicit laws; `None` for the infinite-variance family.
    pub fn sigma2(&self) -> Option<f64> {
        self.sigma2
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.kind, OffspringKind::Explicit { .. })
    }

    /// `P(K = k)`.
    pub fn pmf(&self, k: u64) -> f64 {
        match &self.kind {
            OffspringKind::StableTail { alpha, kappa } => match k {
                0 => self.p0,
                1 => self.p1,
                _ => {
                    let k = k as f64;
                    kappa * (libm::pow(k, -alpha) - libm::pow(k + 1.0, -alpha))
                }
            },
            OffspringKind::Explicit { p } => p.get(k as usize).copied().unwrap_or(0.0),
        }
    }

    /// `P(K ≥ n)`.
    pub fn tail_prob(&self, n: u64) -> f64 {
        match &self.kind {
            OffspringKind::StableTail { alpha, kappa } => match n {
                0 => 1.0,
                1 => 1.0 - self.p0,
                _ => kappa * libm::pow(n as f64, -alpha),
            },
            OffspringKind::Explicit { .. } => self.tail.get(n as usize).copied().unwrap_or(0.0),
        }
    }

    /// Exact inversion: the offspring count for a uniform `u ∈ (0, 1)`.
    pub fn sample_offspring(&self, u: f64) -> u64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match &self.kind {
            OffspringKind::StableTail { alpha, kappa } => {
                if u < self.p0 {
                    return 0;
                }
                if u < self.p0 + self.p1 {
                    return 1;
                }
                // largest n ≥ 2 with κ n^{-α} ≥ v
                let v = 1.0 - u;
                let mut k = libm::floor(libm::pow(kappa / v, 1.0 / alpha)) as u64;
                k = k.max(2);
                while kappa * libm::pow((k + 1) as f64, -alpha) >= v {
                    k += 1;
                }
                while k > 2 && kappa * libm::pow(k as f64, -alpha) < v {
                    k -= 1;
                }
                k
            }
            OffspringKind::Explicit { p } => {
                match self.cdf.iter().position(|&c| u < c) {
                    Some(k) => k as u64,
                    // rounding left u above the last cumulative value
                    None => p.iter().rposition(|&x| x > 0.0).unwrap_or(0) as u64,
                }
            }
        }
    }

    /// `f(v) = β (Σ p_k (1−v)^k − (1−v)) / v`, with `f(0) = 0`.
    ///
    /// Summation by parts against the mean-one condition gives
    /// `f(v)/β = Σ_{n≥2} P(K ≥ n) (1 − (1−v)^{n−1})`, a sum of nonnegative
    /// terms with no cancellation at small `v`. Subcritical laws add the
    /// constant `β (1 − E[K])`.
    pub fn f_of_v(&self, beta: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::DomainError(v));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(beta * (self.deficit + self.branching_defect(v)))
    }

    /// `lim_{v↓0} f(v) / v^{α−1} = β κ Γ(2−α) / (α−1)`.
    pub fn lemma2_constant(&self, beta: f64) -> Result<f64> {
        match self.kind {
            OffspringKind::StableTail { alpha, kappa } => {
                Ok(beta * kappa * gamma(2.0 - alpha) / (alpha - 1.0))
            }
            OffspringKind::Explicit { .. } => Err(Error::WrongKind),
        }
    }

    /// `1 − G(1 − w) = w (E[K] − Σ_{n≥2} P(K ≥ n)(1 − (1−w)^{n−1}))`.
    pub fn complement_pgf(&self, w: f64) -> f64 {
        if w == 0.0 {
            return 0.0;
        }
        w * (1.0 - self.deficit - self.branching_defect(w))
    }

    /// `G'(s) = Σ k p_k s^{k−1}`; explicit laws only.
    pub fn pgf_derivative(&self, s: f64) -> Result<f64> {
        match &self.kind {
            OffspringKind::Explicit { p } => {
                // Horner on Σ_{k≥1} k p_k s^{k-1}
                let mut acc = 0.0;
                for k in (1..p.len()).rev() {
                    acc = acc * s + k as f64 * p[k];
                }
                Ok(acc)
            }
            OffspringKind::StableTail { .. } => Err(Error::WrongKind),
        }
    }

    // f(v)/β for v ∈ (0, 1]
    fn branching_defect(&self, v: f64) -> f64 {
        let log_q = libm::log1p(-v);
        match &self.kind {
            OffspringKind::Explicit { .. } => self
                .tail
                .iter()
                .enumerate()
                .skip(2)
                .map(|(n, &t)| t * -libm::expm1((n - 1) as f64 * log_q))
                .sum(),
            OffspringKind::StableTail { alpha, kappa } => {
                stable_defect_sum(*alpha, log_q) * kappa
            }
        }
    }
}

// Σ_{n≥2} n^{-α} (1 − q^{n−1}) with ln q = log_q.
fn stable_defect_sum(alpha: f64, log_q: f64) -> f64 {
    let mut head = 0.0;
    for n in 2..DIRECT_TERMS {
        head += libm::pow(n as f64, -alpha) * -libm::expm1((n - 1) as f64 * log_q);
    }
    let start = DIRECT_TERMS as f64;
    let mut tail = hurwitz_zeta(alpha, start);

    let lambda = -log_q;
    if lambda * start < 700.0 {
        // Σ_{n≥N} n^{-α} q^{n−1} = q^{-1} Σ_{n≥N} h(n),  h(n) = n^{-α} e^{-λn}
        let decay = libm::exp(-lambda * start);
        let integral = (libm::pow(start, 1.0 - alpha) * decay
            - libm::pow(lambda, alpha - 1.0) * upper_incomplete_gamma(2.0 - alpha, lambda * start))
            / (alpha - 1.0);
        let h_derivative = |m: u32| {
            // Leibniz: Σ_i C(m,i) (α)_i N^{-α-i} λ^{m-i}, overall sign (-1)^m
            let mut binom = 1.0;
            let mut rising = 1.0;
            let mut acc = 0.0;
            for i in 0..=m {
                acc += binom * rising * libm::pow(start, -alpha - i as f64)
                    * libm::pow(lambda, (m - i) as f64);
                binom = binom * (m - i) as f64 / (i + 1) as f64;
                rising *= alpha + i as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * acc * decay
        };
        let weighted = integral + 0.5 * h_derivative(0) + euler_maclaurin_correction(h_derivative);
        tail -= weighted * libm::exp(-log_q);
    }
    head + tail
}
