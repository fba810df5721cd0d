//! Rate-distortion lower bound for inner-product coding and the Gaussian
//! test channel that attains it.
//!
//! Distortion is the quadratic form (1/n) sum_i (x_i - xhat_i)^T Q_y
//! (x_i - xhat_i); its rate-distortion function is governed by the spectrum
//! of Q_x Q_y and solved by water-filling over a threshold theta with
//! q_i = min(theta, lambda_i).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::normal::ln_2pi_e;
use crate::numerics::{psd_factor, product_spectrum, SpdMatrix, EIGEN_CLAMP_LOOSE_REL};

const BISECT_ITERS: usize = 200;

/// Water-filling split of a distortion budget across the shared spectrum.
#[derive(Debug, Clone)]
pub struct WaterFillSolution {
    /// Water level theta; q_i = min(theta, lambda_i).
    pub threshold: f64,
    /// Per-dimension distortions q_i, in spectrum order.
    pub per_dim_distortion: Vec<f64>,
    /// Sum of per-dimension distortions; equals the target up to tolerance.
    pub total_distortion: f64,
    /// (1/2) sum log2(lambda_i / q_i), the bound for a Gaussian source.
    pub rate_bits: f64,
}

/// Splits `target` distortion across `eigenvalues` (the spectrum of Q_x Q_y)
/// by bisecting on the water level.
pub fn water_fill(eigenvalues: &[f64], target: f64) -> Result<WaterFillSolution> {
    let total: f64 = eigenvalues.iter().sum();
    if !(target > 0.0) || target > total {
        return Err(Error::DistortionOutOfRange {
            distortion: target,
            max: total,
        });
    }
    let lambda_max = eigenvalues.iter().cloned().fold(0.0, f64::max);
    let filled = |theta: f64| -> f64 { eigenvalues.iter().map(|&l| theta.min(l)).sum() };

    // Bisection to interval collapse: 200 halvings put theta within one
    // double of the exact water level.
    let mut lo = 0.0;
    let mut hi = lambda_max;
    let mut theta = 0.5 * lambda_max;
    for _ in 0..BISECT_ITERS {
        theta = 0.5 * (lo + hi);
        if filled(theta) < target {
            lo = theta;
        } else {
            hi = theta;
        }
    }
    if target >= total {
        theta = lambda_max;
    }

    let per_dim: Vec<f64> = eigenvalues.iter().map(|&l| theta.min(l)).collect();
    let total_distortion: f64 = per_dim.iter().sum();
    let rate_bits: f64 = eigenvalues
        .iter()
        .zip(&per_dim)
        .filter(|(&l, &q)| l > 0.0 && q < l)
        .map(|(&l, &q)| 0.5 * (l / q).log2())
        .sum();
    Ok(WaterFillSolution {
        threshold: theta,
        per_dim_distortion: per_dim,
        total_distortion,
        rate_bits,
    })
}

/// Least number of bits per sample that any code needs to reach `target`
/// distortion. `source_entropy_bits` supplies the differential entropy (in
/// bits) of a non-Gaussian source; `None` assumes the Gaussian case, where
/// the bound reduces to the water-filling rate.
pub fn rate_lower_bound(
    qx: &SpdMatrix,
    qy: &SpdMatrix,
    target: f64,
    source_entropy_bits: Option<f64>,
) -> Result<f64> {
    let spectrum = product_spectrum(qx, qy)?;
    let wf = water_fill(spectrum.eigenvalues(), target)?;
    let rate = match source_entropy_bits {
        None => wf.rate_bits,
        Some(h_bits) => {
            // h(x) - (d/2) log2(2 pi e) + (1/2) log2 det(Q_y) - (1/2) sum log2 q_i,
            // with zero-variance dimensions carrying no rate.
            let d_live = spectrum.eigenvalues().iter().filter(|&&l| l > 0.0).count();
            let log2_det_qy: f64 = {
                let (vals, _) = crate::numerics::symmetric_eigen_sorted(qy.as_matrix());
                vals.iter().map(|&v| v.log2()).sum()
            };
            let sum_log_q: f64 = wf
                .per_dim_distortion
                .iter()
                .filter(|&&q| q > 0.0)
                .map(|&q| q.log2())
                .sum();
            h_bits - 0.5 * (d_live as f64) * ln_2pi_e() / std::f64::consts::LN_2
                + 0.5 * log2_det_qy
                - 0.5 * sum_log_q
        }
    };
    Ok(rate.max(0.0))
}

/// Forward test channel x = xhat + z that meets the bound with equality for
/// Gaussian sources: xhat ~ N(0, Q_x - Q), z ~ N(0, Q) with
/// Q = Q_y^{-1/2} U diag(q) U^T Q_y^{-1/2}.
#[derive(Debug, Clone)]
pub struct TestChannel {
    pub reproduction_cov: SpdMatrix,
    pub noise_cov: SpdMatrix,
}

impl TestChannel {
    pub fn new(qx: &SpdMatrix, qy: &SpdMatrix, target: f64) -> Result<Self> {
        let spectrum = product_spectrum(qx, qy)?;
        let wf = water_fill(spectrum.eigenvalues(), target)?;
        let qtilde = DMatrix::from_diagonal(&DVector::from_vec(wf.per_dim_distortion.clone()));
        let inv = spectrum.inverse_transform();
        let noise = inv * qtilde * inv.transpose();
        let repro = qx.as_matrix() - &noise;
        // Subtractive cancellation can leave tiny negative ripples in either
        // factor; the loose clamp validates and the factorization zeroes them.
        psd_factor(&repro, EIGEN_CLAMP_LOOSE_REL)?;
        Ok(TestChannel {
            reproduction_cov: SpdMatrix::from_symmetric_unchecked(repro),
            noise_cov: SpdMatrix::from_symmetric_unchecked(noise),
        })
    }
}

/// Draws `n_samples` pairs (xhat, z) from the test channel at distortion
/// `target` and returns the empirical quadratic-form distortion of x = xhat + z
/// against xhat under the metric Q_y.
pub fn simulate_test_channel(
    qx: &SpdMatrix,
    qy: &SpdMatrix,
    target: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let channel = TestChannel::new(qx, qy, target)?;
    let d = qx.dim();
    let f_repro = psd_factor(channel.reproduction_cov.as_matrix(), EIGEN_CLAMP_LOOSE_REL)?;
    let f_noise = psd_factor(channel.noise_cov.as_matrix(), EIGEN_CLAMP_LOOSE_REL)?;
    let metric = qy.as_matrix();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DVector::zeros(d);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        for v in g.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let xhat = &f_repro * &g;
        for v in g.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let z = &f_noise * &g;
        let x = &xhat + &z;
        let diff = &x - &xhat;
        acc += (metric * &diff).dot(&diff);
    }
    Ok(acc / n_samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_spectrum_splits_evenly() {
        let wf = water_fill(&[1.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(wf.threshold, 0.5, epsilon = 1e-9);
        assert_relative_eq!(wf.per_dim_distortion[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(wf.per_dim_distortion[1], 0.5, epsilon = 1e-9);
        assert_relative_eq!(wf.rate_bits, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn saturated_dimension_stops_at_its_eigenvalue() {
        let wf = water_fill(&[4.0, 1.0], 2.0).unwrap();
        assert_relative_eq!(wf.threshold, 1.0, epsilon = 1e-9);
        assert_relative_eq!(wf.per_dim_distortion[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(wf.per_dim_distortion[1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(wf.rate_bits, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn budget_of_full_variance_costs_no_bits() {
        let wf = water_fill(&[3.0, 2.0, 1.0], 6.0).unwrap();
        assert_relative_eq!(wf.rate_bits, 0.0, epsilon = 1e-12);
        assert_relative_eq!(wf.total_distortion, 6.0, epsilon = 1e-9);
    }

    #[test]
    fn out_of_range_targets_are_rejected() {
        assert!(matches!(
            water_fill(&[1.0, 1.0], 0.0),
            Err(Error::DistortionOutOfRange { .. })
        ));
        assert!(matches!(
            water_fill(&[1.0, 1.0], 2.1),
            Err(Error::DistortionOutOfRange { .. })
        ));
    }

    #[test]
    fn isotropic_bound_has_closed_form() {
        let d = 6;
        let id = SpdMatrix::identity(d);
        for &target in &[0.5, 1.0, 3.0, 6.0] {
            let rate = rate_lower_bound(&id, &id, target, None).unwrap();
            let expect = 0.5 * (d as f64) * ((d as f64) / target).log2();
            assert_relative_eq!(rate, expect.max(0.0), epsilon = 1e-9);
        }
    }

    #[test]
    fn gaussian_entropy_argument_reproduces_gaussian_bound() {
        // Supplying the Gaussian differential entropy explicitly must agree
        // with the default Gaussian route.
        let qx = SpdMatrix::from_diagonal(&[2.0, 0.5]).unwrap();
        let qy = SpdMatrix::from_diagonal(&[1.0, 3.0]).unwrap();
        let target = 0.7;
        let gauss = rate_lower_bound(&qx, &qy, target, None).unwrap();
        let log2_det_qx = (2.0f64 * 0.5).log2();
        let h_bits = 0.5 * (2.0 * ln_2pi_e() / std::f64::consts::LN_2 + log2_det_qx);
        let via_entropy = rate_lower_bound(&qx, &qy, target, Some(h_bits)).unwrap();
        assert_relative_eq!(gauss, via_entropy, epsilon = 1e-9);
    }

    #[test]
    fn full_budget_makes_reproduction_deterministic() {
        let qx = SpdMatrix::from_diagonal(&[2.0, 1.0]).unwrap();
        let qy = SpdMatrix::identity(2);
        let channel = TestChannel::new(&qx, &qy, 3.0).unwrap();
        assert!(channel.reproduction_cov.as_matrix().amax() < 1e-8);
        let measured = simulate_test_channel(&qx, &qy, 3.0, 20_000, 7).unwrap();
        // x = z alone; empirical distortion concentrates on sum of eigenvalues.
        assert!((measured - 3.0).abs() < 0.15);
    }

    #[test]
    fn isotropic_channel_measures_its_budget() {
        let id = SpdMatrix::identity(2);
        let measured = simulate_test_channel(&id, &id, 1.0, 1_000_000, 42).unwrap();
        assert!(
            measured > 0.99 && measured < 1.01,
            "measured {measured} outside [0.99, 1.01]"
        );
    }

    #[test]
    fn noise_covariance_carries_the_budget() {
        let qx = SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0])).unwrap();
        let qy = SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0])).unwrap();
        let target = 0.8;
        let channel = TestChannel::new(&qx, &qy, target).unwrap();
        let budget = (channel.noise_cov.as_matrix() * qy.as_matrix()).trace();
        assert_relative_eq!(budget, target, epsilon = 1e-6);
    }
}
