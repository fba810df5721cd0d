//! Standard-normal density, distribution function and quantile function.
//!
//! The quantile function is Acklam's rational approximation polished with one
//! Halley step against [`cdf`], which brings the error to a few ulp. Keeping
//! these routines local makes codebooks bit-reproducible across platforms.

use std::f64::consts::{PI, SQRT_2};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard-normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard-normal distribution function.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

// Acklam's coefficients for the central region |p - 1/2| <= 0.47575.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
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
// Tail region coefficients.
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

const P_LOW: f64 = 0.02425;

fn acklam(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

/// Standard-normal quantile function for p in (0, 1).
///
/// Panics outside the open unit interval; callers quantize probabilities
/// k/2^R with 0 < k < 2^R, which stay well inside it.
pub fn inv_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument {p} outside (0, 1)");
    if p == 0.5 {
        return 0.0;
    }
    let x = acklam(p);
    // One Halley step: u = (cdf(x) - p) / pdf(x), then a curvature correction.
    let e = cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Natural log of 2*pi*e, used by differential-entropy identities.
pub fn ln_2pi_e() -> f64 {
    (2.0 * PI).ln() + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_is_odd_and_hits_known_points() {
        assert_eq!(inv_cdf(0.5), 0.0);
        // Phi^-1(0.75) from high-precision tables.
        let q75 = 0.674_489_750_196_081_7;
        assert!((inv_cdf(0.75) - q75).abs() < 1e-12);
        assert!((inv_cdf(0.25) + q75).abs() < 1e-12);
        // Phi^-1(0.975), the 1.96 of confidence intervals.
        assert!((inv_cdf(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf_across_the_working_range() {
        // 2^-16 .. 1 - 2^-16 is the range exercised by 16-bit codebooks.
        let lo = 2f64.powi(-16);
        for i in 0..=4096 {
            let p = lo + (1.0 - 2.0 * lo) * (i as f64) / 4096.0;
            let x = inv_cdf(p);
            assert!(
                (cdf(x) - p).abs() < 1e-13,
                "round trip failed at p={p}: cdf({x})={}",
                cdf(x)
            );
        }
    }

    #[test]
    fn cdf_matches_erf_symmetry() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        for i in 0..100 {
            let x = -8.0 + 16.0 * (i as f64) / 99.0;
            assert!((cdf(x) + cdf(-x) - 1.0).abs() < 1e-14);
        }
    }
}
