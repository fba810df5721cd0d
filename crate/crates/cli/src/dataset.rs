//! Synthetic data generation and CSV loading for the experiments.

use commgp::{gram_matrix, KernelSpec, SpdMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::CliError;

/// A symmetric positive definite matrix with eigenvalues `decay^i`, rescaled
/// so the trace equals `dim`, under a seeded random rotation.
pub fn decaying_covariance(rng: &mut ChaCha8Rng, dim: usize, decay: f64) -> SpdMatrix {
    let eigs: Vec<f64> = (0..dim).map(|i| decay.powi(i as i32)).collect();
    let total: f64 = eigs.iter().sum();
    let scale = dim as f64 / total;
    let basis = random_orthogonal(rng, dim);
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        eigs.iter().map(|&e| e * scale),
    ));
    SpdMatrix::new(&basis * lambda * basis.transpose())
        .expect("constructed covariance is positive definite")
}

/// A random symmetric positive definite matrix `B Bᵀ + 0.1·(tr/d)·I`.
pub fn random_covariance(rng: &mut ChaCha8Rng, dim: usize) -> SpdMatrix {
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut g = &b * b.transpose();
    let ridge = 0.1 * g.trace() / dim as f64;
    for i in 0..dim {
        g[(i, i)] += ridge;
    }
    SpdMatrix::new(g).expect("ridged Gram matrix is positive definite")
}

fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    qr.q()
}

/// Draws `n` rows from a zero-mean Gaussian with the given covariance.
pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, cov: &SpdMatrix) -> DMatrix<f64> {
    let root = cov.sqrt().expect("valid covariance has a square root");
    let white = DMatrix::from_fn(n, cov.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    white * root.as_matrix()
}

/// One-call seeded synthetic source: a random covariance (as in
/// [`random_covariance`]) and `n` Gaussian rows drawn from it.
pub fn gen_gaussian(seed: u64, n: usize, d: usize) -> (SpdMatrix, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cov = random_covariance(&mut rng, d);
    let samples = gaussian_rows(&mut rng, n, &cov);
    (cov, samples)
}

/// Latent function values plus observation noise, drawn jointly from a GP
/// prior over the given inputs.
pub struct GpDraw {
    pub latent: DVector<f64>,
    pub targets: DVector<f64>,
}

pub fn draw_from_gp_prior(
    rng: &mut ChaCha8Rng,
    inputs: &DMatrix<f64>,
    kernel: &KernelSpec,
    noise_variance: f64,
) -> Result<GpDraw, CliError> {
    let n = inputs.nrows();
    let mut gram = gram_matrix(kernel, inputs, inputs)?;
    let jitter = 1e-10 * gram.trace().max(1.0) / n as f64;
    for i in 0..n {
        gram[(i, i)] += jitter;
    }
    let chol = gram
        .cholesky()
        .ok_or(commgp::Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let white = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let latent = chol.l() * white;
    let sigma = noise_variance.sqrt();
    let targets =
        DVector::from_fn(n, |i, _| latent[i] + sigma * rng.sample::<f64, _>(StandardNormal));
    Ok(GpDraw { latent, targets })
}

/// Evenly spaced column vector covering `[-halfwidth, halfwidth]`.
pub fn line_grid(points: usize, halfwidth: f64) -> DMatrix<f64> {
    let step = 2.0 * halfwidth / (points - 1) as f64;
    DMatrix::from_fn(points, 1, |i, _| -halfwidth + step * i as f64)
}

/// A train/test regression set with train-statistic normalization applied to
/// both halves: inputs are centered and scaled by per-column train std, and
/// targets are centered by the train mean.
pub struct DatasetBundle {
    pub train_inputs: DMatrix<f64>,
    pub train_targets: DVector<f64>,
    pub test_inputs: DMatrix<f64>,
    pub test_targets: DVector<f64>,
    pub input_mean: DVector<f64>,
    pub input_scale: DVector<f64>,
    pub target_mean: f64,
}

impl DatasetBundle {
    /// Splits rows into train and test with a seeded shuffle, then
    /// normalizes by the train statistics.
    pub fn split(
        inputs: &DMatrix<f64>,
        targets: &DVector<f64>,
        test_fraction: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<DatasetBundle, CliError> {
        let n = inputs.nrows();
        if targets.len() != n {
            return Err(CliError::Config(format!(
                "targets has {} rows but inputs has {n}",
                targets.len()
            )));
        }
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(CliError::Config(format!(
                "test_fraction must lie in [0, 1), got {test_fraction}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let n_test = (n as f64 * test_fraction).round() as usize;
        let n_train = n - n_test;
        if n_train == 0 {
            return Err(CliError::Config(
                "test_fraction leaves no training rows".into(),
            ));
        }
        let pick = |rows: &[usize]| -> (DMatrix<f64>, DVector<f64>) {
            let x = DMatrix::from_fn(rows.len(), inputs.ncols(), |i, j| inputs[(rows[i], j)]);
            let y = DVector::from_fn(rows.len(), |i, _| targets[rows[i]]);
            (x, y)
        };
        let (train_x, train_y) = pick(&order[..n_train]);
        let (test_x, test_y) = pick(&order[n_train..]);
        Self::normalize(train_x, train_y, test_x, test_y)
    }

    fn normalize(
        mut train_x: DMatrix<f64>,
        mut train_y: DVector<f64>,
        mut test_x: DMatrix<f64>,
        mut test_y: DVector<f64>,
    ) -> Result<DatasetBundle, CliError> {
        let n = train_x.nrows() as f64;
        let d = train_x.ncols();
        let mean = DVector::from_fn(d, |j, _| train_x.column(j).sum() / n);
        let scale = DVector::from_fn(d, |j, _| {
            let var = train_x
                .column(j)
                .iter()
                .map(|v| (v - mean[j]).powi(2))
                .sum::<f64>()
                / n;
            let std = var.sqrt();
            if std > 0.0 {
                std
            } else {
                1.0
            }
        });
        for x in [&mut train_x, &mut test_x] {
            for i in 0..x.nrows() {
                for j in 0..d {
                    x[(i, j)] = (x[(i, j)] - mean[j]) / scale[j];
                }
            }
        }
        let target_mean = train_y.sum() / n;
        train_y.add_scalar_mut(-target_mean);
        test_y.add_scalar_mut(-target_mean);
        Ok(DatasetBundle {
            train_inputs: train_x,
            train_targets: train_y,
            test_inputs: test_x,
            test_targets: test_y,
            input_mean: mean,
            input_scale: scale,
            target_mean,
        })
    }
}

/// Reads a numeric CSV with a header row into an input matrix and a target
/// column. Every non-target column becomes an input feature, in file order.
pub fn load_csv(path: &std::path::Path, target_column: &str) -> Result<(DMatrix<f64>, DVector<f64>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .clone();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| {
            CliError::Config(format!(
                "{}: missing column {target_column:?} (found: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })?;
    let d = headers.len() - 1;
    if d == 0 {
        return Err(CliError::Config(format!(
            "{}: no feature columns besides {target_column:?}",
            path.display()
        )));
    }
    let mut features: Vec<f64> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if record.len() != headers.len() {
            return Err(CliError::Config(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                row_idx + 2,
                record.len(),
                headers.len()
            )));
        }
        for (col_idx, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{}: row {}, column {:?}: cannot parse {field:?} as a number",
                    path.display(),
                    row_idx + 2,
                    &headers[col_idx]
                ))
            })?;
            if col_idx == target_idx {
                targets.push(value);
            } else {
                features.push(value);
            }
        }
    }
    if targets.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let n = targets.len();
    let inputs = DMatrix::from_row_slice(n, d, &features);
    Ok((inputs, DVector::from_vec(targets)))
}
