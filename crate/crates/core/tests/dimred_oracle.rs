//! Validates the metric-aware dimension reduction against the closed-form
//! expected distortion of an arbitrary linear reconstruction and against
//! plain PCA.

use commgp::{DimRedModel, SpdMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SpdMatrix {
    let b = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0f64));
    let m = &b * b.transpose();
    let ridge = 0.05 * m.trace().max(1e-6) / d as f64;
    SpdMatrix::new(m + DMatrix::identity(d, d) * ridge).unwrap()
}

/// SPD matrix with prescribed well-separated eigenvalues under a random
/// rotation, so eigenvector spans are unambiguous.
fn spd_with_spectrum(rng: &mut ChaCha8Rng, eigs: &[f64]) -> SpdMatrix {
    let d = eigs.len();
    let b = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0f64));
    let qr = b.qr();
    let q = qr.q();
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigs));
    SpdMatrix::new(&q * lam * q.transpose()).unwrap()
}

/// Expected metric distortion of the linear reconstruction x -> T x for
/// x ~ N(0, sx): tr((I - T)^T sy (I - T) sx). The oracle both models are
/// judged by.
fn expected_distortion(t: &DMatrix<f64>, sx: &SpdMatrix, sy: &SpdMatrix) -> f64 {
    let d = sx.dim();
    let residual = DMatrix::identity(d, d) - t;
    (residual.transpose() * sy.as_matrix() * &residual * sx.as_matrix()).trace()
}

fn reconstruction_map(model: &DimRedModel) -> DMatrix<f64> {
    model.basis() * model.coeff_map()
}

#[test]
fn full_rank_reduction_reconstructs_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let d = 5;
    let sx = random_spd(&mut rng, d);
    let sy = random_spd(&mut rng, d);
    let model = DimRedModel::fit(&sx, &sy, d).unwrap();
    let x = DMatrix::from_fn(40, d, |_, _| StandardNormal.sample(&mut rng));
    let back = model.decode(&model.encode(&x).unwrap()).unwrap();
    let err = (&back - &x).norm() / x.norm();
    assert!(err < 1e-10, "round-trip error {err}");
    assert!(model.predicted_distortion() < 1e-9);
}

#[test]
fn predicted_distortion_matches_the_trace_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    for trial in 0..20 {
        let d = 3 + trial % 4;
        let m = 1 + trial % (d - 1);
        let sx = random_spd(&mut rng, d);
        let sy = random_spd(&mut rng, d);
        let model = DimRedModel::fit(&sx, &sy, m).unwrap();
        let direct = expected_distortion(&reconstruction_map(&model), &sx, &sy);
        let predicted = model.predicted_distortion();
        assert!(
            (direct - predicted).abs() <= 1e-9 * predicted.max(1e-9),
            "trial {trial}: trace formula {direct} vs predicted {predicted}"
        );
    }
}

#[test]
fn measured_distortion_agrees_with_the_prediction() {
    let mut rng = ChaCha8Rng::seed_from_u64(205);
    let d = 4;
    let sx = random_spd(&mut rng, d);
    let sy = random_spd(&mut rng, d);
    let model = DimRedModel::fit(&sx, &sy, 2).unwrap();

    // Draw with covariance sx and quantize nothing: the only loss is the
    // dropped subspace.
    let n = 100_000;
    let l = sx.sqrt().unwrap();
    let g = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let x = g * l.as_matrix();
    let back = model.decode(&model.encode(&x).unwrap()).unwrap();
    let measured = commgp::persym::measure_distortion(&x, &back, &sy).unwrap();
    let predicted = model.predicted_distortion();
    assert!(
        (measured - predicted).abs() < 0.03 * predicted,
        "measured {measured} vs predicted {predicted}"
    );
}

/// Under the target metric, the metric-aware reduction can never lose to
/// PCA on expected distortion.
#[test]
fn metric_aware_reduction_dominates_pca() {
    let mut rng = ChaCha8Rng::seed_from_u64(207);
    let mut strictly_better = 0;
    for trial in 0..50 {
        let d = 4 + trial % 3;
        let m = 1 + trial % 3;
        let sx = random_spd(&mut rng, d);
        let sy = random_spd(&mut rng, d);
        let aware = DimRedModel::fit(&sx, &sy, m).unwrap();
        let pca = DimRedModel::fit_pca(&sx, m).unwrap();
        let aware_d = expected_distortion(&reconstruction_map(&aware), &sx, &sy);
        let pca_d = expected_distortion(&reconstruction_map(&pca), &sx, &sy);
        assert!(
            aware_d <= pca_d * (1.0 + 1e-9),
            "trial {trial}: aware {aware_d} vs pca {pca_d}"
        );
        if aware_d < pca_d * 0.99 {
            strictly_better += 1;
        }
    }
    // Generic anisotropic metrics should show a real gap most of the time.
    assert!(strictly_better > 25, "only {strictly_better} strict wins");
}

/// With identical source and metric covariances the two reductions keep the
/// same subspace, so their distortions coincide.
#[test]
fn identical_covariances_collapse_to_pca() {
    let mut rng = ChaCha8Rng::seed_from_u64(209);
    for trial in 0..10 {
        let eigs = [9.0, 5.0, 2.5, 1.0, 0.3];
        let s = spd_with_spectrum(&mut rng, &eigs);
        let m = 1 + trial % 4;
        let aware = DimRedModel::fit(&s, &s, m).unwrap();
        let pca = DimRedModel::fit_pca(&s, m).unwrap();
        let aware_d = expected_distortion(&reconstruction_map(&aware), &s, &s);
        let pca_d = expected_distortion(&reconstruction_map(&pca), &s, &s);
        assert!(
            (aware_d - pca_d).abs() <= 0.02 * pca_d.max(1e-12),
            "trial {trial}: aware {aware_d} vs pca {pca_d}"
        );
    }
}
