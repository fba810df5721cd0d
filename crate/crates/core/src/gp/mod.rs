//! Gaussian-process regression with linear and squared-exponential kernels.
//!
//! Hyperparameters live in log space and are fitted by gradient ascent on
//! the log marginal likelihood with analytic gradients.

pub mod optimize;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use optimize::{ascend, AscentOptions, AscentOutcome};

/// Kernel families. The squared-exponential value at zero distance is
/// `amplitude` itself, and the exponent divides by length_scale^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    /// k(x, x') = scale * <x, x'> + bias
    Linear { scale: f64, bias: f64 },
    /// k(x, x') = amplitude * exp(-|x - x'|^2 / length_scale^2)
    SquaredExponential { amplitude: f64, length_scale: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64| Error::InvalidHyperparameter { name, value };
        match *self {
            KernelSpec::Linear { scale, bias } => {
                if !(scale > 0.0) || !scale.is_finite() {
                    return Err(bad("scale", scale));
                }
                if !(bias >= 0.0) || !bias.is_finite() {
                    return Err(bad("bias", bias));
                }
            }
            KernelSpec::SquaredExponential {
                amplitude,
                length_scale,
            } => {
                if !(amplitude > 0.0) || !amplitude.is_finite() {
                    return Err(bad("amplitude", amplitude));
                }
                if !(length_scale > 0.0) || !length_scale.is_finite() {
                    return Err(bad("length_scale", length_scale));
                }
            }
        }
        Ok(())
    }

    /// Log-space coordinates of the kernel parameters, the space the
    /// optimizer works in. Zero parameters are floored to keep logs finite.
    pub(crate) fn log_params(&self) -> Vec<f64> {
        const FLOOR: f64 = 1e-12;
        match *self {
            KernelSpec::Linear { scale, bias } => {
                vec![scale.max(FLOOR).ln(), bias.max(FLOOR).ln()]
            }
            KernelSpec::SquaredExponential {
                amplitude,
                length_scale,
            } => vec![amplitude.max(FLOOR).ln(), length_scale.max(FLOOR).ln()],
        }
    }

    pub(crate) fn from_log_params(&self, p: &[f64]) -> KernelSpec {
        match *self {
            KernelSpec::Linear { .. } => KernelSpec::Linear {
                scale: p[0].exp(),
                bias: p[1].exp(),
            },
            KernelSpec::SquaredExponential { .. } => KernelSpec::SquaredExponential {
                amplitude: p[0].exp(),
                length_scale: p[1].exp(),
            },
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            KernelSpec::Linear { .. } => &["scale", "bias"],
            KernelSpec::SquaredExponential { .. } => &["amplitude", "length_scale"],
        }
    }
}

/// Cross-gram of row sets `a` (n rows) and `b` (p rows): entry (i, j) is
/// k(a_i, b_j).
pub fn gram_matrix(kernel: &KernelSpec, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            got: b.ncols(),
        });
    }
    kernel.validate()?;
    Ok(match *kernel {
        KernelSpec::Linear { scale, bias } => {
            let mut g = a * b.transpose();
            g.apply(|v| *v = scale * *v + bias);
            g
        }
        KernelSpec::SquaredExponential {
            amplitude,
            length_scale,
        } => {
            let inv_l2 = 1.0 / (length_scale * length_scale);
            let sq = squared_distances(a, b);
            sq.map(|s| amplitude * (-s * inv_l2).exp())
        }
    })
}

/// Pairwise squared Euclidean distances between row sets.
pub(crate) fn squared_distances(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let an: Vec<f64> = a.row_iter().map(|r| r.norm_squared()).collect();
    let bn: Vec<f64> = b.row_iter().map(|r| r.norm_squared()).collect();
    let mut g = a * b.transpose();
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            g[(i, j)] = (an[i] + bn[j] - 2.0 * g[(i, j)]).max(0.0);
        }
    }
    g
}

/// Posterior at a single query point.
#[derive(Debug, Clone, Copy)]
pub struct Posterior {
    pub mean: f64,
    /// Latent function variance, clamped at zero.
    pub variance: f64,
    /// Latent variance plus observation noise.
    pub predictive_variance: f64,
}

/// A trained GP regression model. Immutable; the noisy-gram factorization is
/// computed once at assembly.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelSpec,
    noise_variance: f64,
    train_inputs: DMatrix<f64>,
    train_targets: DVector<f64>,
    gram: DMatrix<f64>,
    chol: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    alpha: DVector<f64>,
    log_marginal: f64,
}

/// Cholesky of k + noise * I with two escalating jitter retries.
fn noisy_cholesky(
    gram: &DMatrix<f64>,
    noise_variance: f64,
) -> Result<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>> {
    let n = gram.nrows();
    let mut k = gram.clone();
    for i in 0..n {
        k[(i, i)] += noise_variance;
    }
    let scale = k.trace().max(1e-300) / n as f64;
    for jitter in [0.0, 1e-10 * scale, 1e-6 * scale] {
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = nalgebra::linalg::Cholesky::new(kj) {
            return Ok(c);
        }
    }
    Err(Error::SingularSystem)
}

fn log_marginal_from(
    chol: &nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    targets: &DVector<f64>,
    alpha: &DVector<f64>,
) -> f64 {
    let n = targets.len() as f64;
    let log_det_half: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum();
    -0.5 * targets.dot(alpha) - log_det_half - 0.5 * n * std::f64::consts::TAU.ln()
}

impl GpModel {
    /// Assembles a model, building the gram from the kernel and inputs.
    pub fn from_inputs(
        kernel: KernelSpec,
        noise_variance: f64,
        inputs: DMatrix<f64>,
        targets: DVector<f64>,
    ) -> Result<Self> {
        let gram = gram_matrix(&kernel, &inputs, &inputs)?;
        Self::with_gram(kernel, noise_variance, inputs, targets, gram)
    }

    /// Assembles a model around an externally supplied gram (completed or
    /// otherwise approximated). Predictions still evaluate the kernel
    /// against `inputs`.
    pub fn with_gram(
        kernel: KernelSpec,
        noise_variance: f64,
        inputs: DMatrix<f64>,
        targets: DVector<f64>,
        gram: DMatrix<f64>,
    ) -> Result<Self> {
        kernel.validate()?;
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidHyperparameter {
                name: "noise_variance",
                value: noise_variance,
            });
        }
        if targets.len() != inputs.nrows() {
            return Err(Error::DimensionMismatch {
                expected: inputs.nrows(),
                got: targets.len(),
            });
        }
        if gram.nrows() != inputs.nrows() || gram.ncols() != inputs.nrows() {
            return Err(Error::DimensionMismatch {
                expected: inputs.nrows(),
                got: gram.nrows(),
            });
        }
        let chol = noisy_cholesky(&gram, noise_variance)?;
        let alpha = chol.solve(&targets);
        let log_marginal = log_marginal_from(&chol, &targets, &alpha);
        Ok(GpModel {
            kernel,
            noise_variance,
            train_inputs: inputs,
            train_targets: targets,
            gram,
            chol,
            alpha,
            log_marginal,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn train_inputs(&self) -> &DMatrix<f64> {
        &self.train_inputs
    }

    pub fn train_targets(&self) -> &DVector<f64> {
        &self.train_targets
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Log marginal likelihood of the training targets under this model.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal
    }

    pub fn predict(&self, x: &DVector<f64>) -> Result<Posterior> {
        let xm = DMatrix::from_row_slice(1, x.len(), x.as_slice());
        Ok(self.predict_many(&xm)?[0])
    }

    /// Prior predictive variance at a query point: k(x, x) plus noise. Used
    /// by committee combinations that discount the shared prior.
    pub fn prior_predictive_variance(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.train_inputs.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.train_inputs.ncols(),
                got: x.len(),
            });
        }
        let prior = match self.kernel {
            KernelSpec::Linear { scale, bias } => scale * x.norm_squared() + bias,
            KernelSpec::SquaredExponential { amplitude, .. } => amplitude,
        };
        Ok(prior + self.noise_variance)
    }

    /// Posterior mean and variance at each query row.
    pub fn predict_many(&self, xs: &DMatrix<f64>) -> Result<Vec<Posterior>> {
        let cross = gram_matrix(&self.kernel, xs, &self.train_inputs)?;
        let means = &cross * &self.alpha;
        let solved = self.chol.solve(&cross.transpose());
        let prior_diag: Vec<f64> = match self.kernel {
            KernelSpec::Linear { scale, bias } => xs
                .row_iter()
                .map(|r| scale * r.norm_squared() + bias)
                .collect(),
            KernelSpec::SquaredExponential { amplitude, .. } => vec![amplitude; xs.nrows()],
        };
        Ok((0..xs.nrows())
            .map(|i| {
                let explained = cross.row(i).tr_dot(&solved.column(i));
                let variance = (prior_diag[i] - explained).max(0.0);
                Posterior {
                    mean: means[i],
                    variance,
                    predictive_variance: variance + self.noise_variance,
                }
            })
            .collect())
    }

    /// Maximizes the log marginal likelihood over kernel parameters and the
    /// noise variance, all in log space, starting from this model's values.
    pub fn fit_hyperparameters(&self, opts: &AscentOptions) -> Result<(GpModel, AscentOutcome)> {
        let stat = match self.kernel {
            KernelSpec::Linear { .. } => &self.train_inputs * self.train_inputs.transpose(),
            KernelSpec::SquaredExponential { .. } => {
                squared_distances(&self.train_inputs, &self.train_inputs)
            }
        };
        let template = self.kernel;
        let y = self.train_targets.clone();
        let eval = |p: &[f64]| dense_marginal(&template, &stat, &y, p);

        let mut init = self.kernel.log_params();
        init.push(self.noise_variance.max(1e-12).ln());
        let outcome = ascend(eval, init, opts)?;

        let kernel = template.from_log_params(&outcome.params);
        let noise = outcome.params[outcome.params.len() - 1].exp();
        let fitted = GpModel::from_inputs(
            kernel,
            noise,
            self.train_inputs.clone(),
            self.train_targets.clone(),
        )?;
        Ok((fitted, outcome))
    }
}

/// Log marginal likelihood of `targets` under the dense model, together with
/// its gradient in log-parameter space (kernel parameters first, then the
/// noise variance). This is the objective [`GpModel::fit_hyperparameters`]
/// ascends; it is public so the gradients can be verified independently.
pub fn marginal_and_gradient(
    kernel: &KernelSpec,
    noise_variance: f64,
    inputs: &DMatrix<f64>,
    targets: &DVector<f64>,
) -> Result<(f64, Vec<f64>)> {
    kernel.validate()?;
    if !(noise_variance > 0.0) || !noise_variance.is_finite() {
        return Err(Error::InvalidHyperparameter {
            name: "noise_variance",
            value: noise_variance,
        });
    }
    if targets.len() != inputs.nrows() {
        return Err(Error::DimensionMismatch {
            expected: inputs.nrows(),
            got: targets.len(),
        });
    }
    let stat = match kernel {
        KernelSpec::Linear { .. } => inputs * inputs.transpose(),
        KernelSpec::SquaredExponential { .. } => squared_distances(inputs, inputs),
    };
    let mut p = kernel.log_params();
    p.push(noise_variance.ln());
    dense_marginal(kernel, &stat, targets, &p)
}

/// Log marginal likelihood and its gradient in log-parameter space for a
/// dense gram built from cached pairwise statistics (inner products for the
/// linear kernel, squared distances for the squared exponential).
fn dense_marginal(
    template: &KernelSpec,
    stat: &DMatrix<f64>,
    y: &DVector<f64>,
    log_params: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let n = y.len();
    let kernel = template.from_log_params(log_params);
    let noise = log_params[log_params.len() - 1].exp();

    // Gram and its derivatives w.r.t. each log parameter.
    let (gram, dks): (DMatrix<f64>, Vec<DMatrix<f64>>) = match kernel {
        KernelSpec::Linear { scale, bias } => {
            let g = stat.map(|v| scale * v + bias);
            let d_scale = stat.map(|v| scale * v);
            let d_bias = DMatrix::from_element(n, n, bias);
            (g, vec![d_scale, d_bias])
        }
        KernelSpec::SquaredExponential {
            amplitude,
            length_scale,
        } => {
            let inv_l2 = 1.0 / (length_scale * length_scale);
            let g = stat.map(|s| amplitude * (-s * inv_l2).exp());
            let d_len = g.zip_map(stat, |gv, s| gv * 2.0 * s * inv_l2);
            let d_amp = g.clone();
            (g, vec![d_amp, d_len])
        }
    };

    let chol = noisy_cholesky(&gram, noise)?;
    let alpha = chol.solve(y);
    let value = log_marginal_from(&chol, y, &alpha);
    let kinv = chol.inverse();

    let mut grad = Vec::with_capacity(dks.len() + 1);
    for dk in &dks {
        let quad = (dk * &alpha).dot(&alpha);
        let trace = kinv.component_mul(dk).sum();
        grad.push(0.5 * (quad - trace));
    }
    // Noise enters as noise * I.
    let quad = noise * alpha.norm_squared();
    let trace = noise * kinv.trace();
    grad.push(0.5 * (quad - trace));
    Ok((value, grad))
}

/// Standardized mean squared error: mean squared residual over the
/// population variance of the targets. A mean predictor scores exactly 1.
pub fn smse(targets: &[f64], predictions: &[f64]) -> Result<f64> {
    if targets.len() != predictions.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    if targets.len() < 2 {
        return Err(Error::DegenerateTargets);
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::DegenerateTargets);
    }
    let mse = targets
        .iter()
        .zip(predictions)
        .map(|(t, p)| (t - p) * (t - p))
        .sum::<f64>()
        / n;
    Ok(mse / var)
}
