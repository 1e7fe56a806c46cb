//! Special functions shared by the offspring and theory modules.
//!
//! One Γ implementation backs every constant in the crate.

use core::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) by the Lanczos approximation (g = 7, nine terms) with reflection
/// below 1/2. Relative error is a few ulps over the range used here.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / (libm::sin(PI * x) * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        libm::sqrt(2.0 * PI) * libm::pow(t, x + 0.5) * libm::exp(-t) * acc
    }
}

// B_{2j} / (2j)! for j = 1..=7
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// Euler–Maclaurin correction `-Σ_j B_{2j}/(2j)! · g^{(2j-1)}(b)` where the
/// caller supplies odd derivatives `g^{(m)}(b)` for `m = 1, 3, …, 13`.
pub(crate) fn euler_maclaurin_correction(odd_derivative: impl Fn(u32) -> f64) -> f64 {
    BERNOULLI_OVER_FACTORIAL
        .iter()
        .enumerate()
        .map(|(j, b)| -b * odd_derivative(2 * j as u32 + 1))
        .sum()
}

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (a + k)^{-s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    let mut head = 0.0;
    let mut b = a;
    while b < 16.0 {
        head += libm::pow(b, -s);
        b += 1.0;
    }
    // derivatives of g(n) = n^{-s}: g^{(m)}(b) = (-1)^m s(s+1)…(s+m-1) b^{-s-m}
    let deriv = |m: u32| {
        let mut rising = 1.0;
        for i in 0..m {
            rising *= s + i as f64;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sign * rising * libm::pow(b, -s - m as f64)
    };
    head + libm::pow(b, 1.0 - s) / (s - 1.0)
        + 0.5 * libm::pow(b, -s)
        + euler_maclaurin_correction(deriv)
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Upper incomplete gamma `Γ(a, x)` for `a > 0`, `x ≥ 0`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return gamma(a);
    }
    if x < a + 1.0 {
        // lower series
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..1000 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if libm::fabs(term) < libm::fabs(sum) * 1e-17 {
                break;
            }
        }
        let lower = sum * libm::exp(-x + a * libm::log(x));
        gamma(a) - lower
    } else {
        // modified Lentz continued fraction
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if libm::fabs(d) < TINY {
                d = TINY;
            }
            c = b + an / c;
            if libm::fabs(c) < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if libm::fabs(delta - 1.0) < 1e-16 {
                break;
            }
        }
        libm::exp(-x + a * libm::log(x)) * h
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Halley step against `erfc`.
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;
    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * libm::sqrt(2.0 * PI) * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        libm::fabs(a - b) / libm::fabs(b)
    }

    // reference values computed with mpmath at 30 digits
    #[test]
    fn gamma_reference_values() {
        assert!(rel(gamma(0.5), libm::sqrt(PI)) < 1e-14);
        assert!(rel(gamma(1.0), 1.0) < 1e-14);
        assert!(rel(gamma(0.1), 9.513_507_698_668_731_3) < 1e-13);
        assert!(rel(gamma(0.25), 3.625_609_908_221_908_3) < 1e-13);
        assert!(rel(gamma(0.05), 19.470_085_311_255_512) < 1e-13);
        assert!(rel(gamma(5.0), 24.0) < 1e-14);
    }

    #[test]
    fn zeta_reference_values() {
        assert!(rel(zeta(1.5), 2.612_375_348_685_488_3) < 1e-13);
        assert!(rel(zeta(1.05), 20.580_844_302_036_985) < 1e-13);
        assert!(rel(zeta(1.95), 1.694_429_662_231_051_0) < 1e-13);
        assert!(rel(zeta(2.0), PI * PI / 6.0) < 1e-14);
    }

    #[test]
    fn hurwitz_matches_shifted_zeta() {
        let direct: f64 = (1..10).map(|n| libm::pow(n as f64, -1.5)).sum();
        assert!(rel(hurwitz_zeta(1.5, 10.0), zeta(1.5) - direct) < 1e-13);
    }

    #[test]
    fn incomplete_gamma_limits() {
        assert!(rel(upper_incomplete_gamma(0.5, 1e-300), libm::sqrt(PI)) < 1e-14);
        // Γ(1/2, x) = √π erfc(√x)
        for x in [0.01, 0.7, 1.5, 3.0, 20.0] {
            let expect = libm::sqrt(PI) * libm::erfc(libm::sqrt(x));
            assert!(rel(upper_incomplete_gamma(0.5, x), expect) < 1e-12, "x = {x}");
        }
        // Γ(1, x) = e^{-x}
        for x in [0.2, 2.5, 40.0] {
            assert!(rel(upper_incomplete_gamma(1.0, x), libm::exp(-x)) < 1e-13);
        }
    }

    #[test]
    fn normal_quantile_roundtrip() {
        assert!(libm::fabs(normal_quantile(0.995) - 2.575_829_303_548_900_4) < 1e-12);
        assert!(libm::fabs(normal_quantile(0.5)) < 1e-15);
        for p in [1e-10, 0.01, 0.3, 0.9, 0.999_999] {
            assert!(rel(normal_cdf(normal_quantile(p)), p) < 1e-12);
        }
    }
}
