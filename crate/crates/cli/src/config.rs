//! Experiment configuration: JSON files with a schema gate, strict field
//! checking, and per-experiment defaults.

use std::path::Path;

use commgp::KernelSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_default() -> u32 {
    SCHEMA_VERSION
}

fn check_schema(schema: u32) -> Result<(), String> {
    if schema != SCHEMA_VERSION {
        return Err(format!(
            "unsupported schema {schema}; this build reads schema {SCHEMA_VERSION}"
        ));
    }
    Ok(())
}

fn check_rates(rates: &[u32]) -> Result<(), String> {
    if rates.is_empty() {
        return Err("rates must not be empty".into());
    }
    if !rates.windows(2).all(|w| w[0] < w[1]) {
        return Err(format!("rates must be strictly increasing, got {rates:?}"));
    }
    Ok(())
}

/// Initial model settings shared by the GP experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kernel: KernelSpec,
    pub noise_variance: f64,
    /// Gradient-ascent iteration cap for hyperparameter fits.
    pub max_iters: usize,
    /// Gradient infinity-norm convergence threshold.
    pub tol: f64,
    pub fit_hyperparameters: bool,
}

impl ModelConfig {
    fn validate(&self) -> Result<(), String> {
        self.kernel.validate().map_err(|e| format!("kernel: {e}"))?;
        if !(self.noise_variance > 0.0) {
            return Err(format!(
                "noise_variance must be positive, got {}",
                self.noise_variance
            ));
        }
        if self.max_iters == 0 {
            return Err("max_iters must be at least 1".into());
        }
        if !(self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        Ok(())
    }
}

/// How the distributed experiments assemble a model from the fleet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Everything shipped losslessly to the center; the reference model.
    Full,
    SingleCenter,
    Broadcast,
    Poe,
    Bcm,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Full => "full",
            Protocol::SingleCenter => "single_center",
            Protocol::Broadcast => "broadcast",
            Protocol::Poe => "poe",
            Protocol::Bcm => "bcm",
        }
    }
}

/// Distortion-rate curves for both codecs against the information bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdCurveConfig {
    #[serde(default = "schema_default")]
    pub schema: u32,
    pub seed: u64,
    pub dim: usize,
    pub samples: usize,
    /// Per-sample bit budgets to sweep.
    pub rates: Vec<u32>,
    /// Ratio between consecutive source eigenvalues, in (0, 1].
    pub spectrum_decay: f64,
}

impl Default for RdCurveConfig {
    fn default() -> Self {
        RdCurveConfig {
            schema: SCHEMA_VERSION,
            seed: 7,
            dim: 20,
            samples: 20_000,
            rates: vec![4, 8, 16, 24, 32, 48, 64, 80, 100, 128, 160],
            spectrum_decay: 0.75,
        }
    }
}

impl RdCurveConfig {
    pub fn validate(&self) -> Result<(), String> {
        check_schema(self.schema)?;
        if self.dim == 0 {
            return Err("dim must be at least 1".into());
        }
        if self.samples < 100 {
            return Err(format!("samples must be at least 100, got {}", self.samples));
        }
        check_rates(&self.rates)?;
        if !(self.spectrum_decay > 0.0 && self.spectrum_decay <= 1.0) {
            return Err(format!(
                "spectrum_decay must lie in (0, 1], got {}",
                self.spectrum_decay
            ));
        }
        Ok(())
    }
}

/// Metric-aware reduction versus plain principal components.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimredCompareConfig {
    #[serde(default = "schema_default")]
    pub schema: u32,
    pub seed: u64,
    pub dim: usize,
    /// Independent covariance draws averaged per target dimension.
    pub instances: usize,
    /// Use the source covariance itself as the metric, the regime where
    /// both methods should coincide.
    pub identical_covariances: bool,
}

impl Default for DimredCompareConfig {
    fn default() -> Self {
        DimredCompareConfig {
            schema: SCHEMA_VERSION,
            seed: 11,
            dim: 8,
            instances: 50,
            identical_covariances: false,
        }
    }
}

impl DimredCompareConfig {
    pub fn validate(&self) -> Result<(), String> {
        check_schema(self.schema)?;
        if self.dim < 2 {
            return Err(format!("dim must be at least 2, got {}", self.dim));
        }
        if self.instances == 0 {
            return Err("instances must be at least 1".into());
        }
        Ok(())
    }
}

/// One-dimensional GP regression on per-symbol quantized inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gp1dConfig {
    #[serde(default = "schema_default")]
    pub schema: u32,
    pub seed: u64,
    pub train_points: usize,
    /// Evaluation grid resolution over the input interval.
    pub grid_points: usize,
    /// Half-width of the input interval, centered at zero.
    pub input_halfwidth: f64,
    /// Per-input bit budgets to sweep.
    pub rates: Vec<u32>,
    /// Kernel the latent function is drawn from.
    pub data_kernel: KernelSpec,
    pub data_noise_variance: f64,
    pub model: ModelConfig,
}

impl Default for Gp1dConfig {
    fn default() -> Self {
        Gp1dConfig {
            schema: SCHEMA_VERSION,
            seed: 4,
            train_points: 200,
            grid_points: 201,
            input_halfwidth: 10.0,
            rates: vec![1, 2, 3, 4, 6, 8, 10],
            data_kernel: KernelSpec::SquaredExponential {
                amplitude: 1.0,
                length_scale: 4.0,
            },
            data_noise_variance: 0.01,
            model: ModelConfig {
                kernel: KernelSpec::SquaredExponential {
                    amplitude: 0.5,
                    length_scale: 4.0,
                },
                noise_variance: 0.1,
                max_iters: 80,
                tol: 3e-5,
                fit_hyperparameters: true,
            },
        }
    }
}

impl Gp1dConfig {
    pub fn validate(&self) -> Result<(), String> {
        check_schema(self.schema)?;
        if self.train_points < 10 {
            return Err(format!(
                "train_points must be at least 10, got {}",
                self.train_points
            ));
        }
        if self.grid_points < 2 {
            return Err("grid_points must be at least 2".into());
        }
        if !(self.input_halfwidth > 0.0) {
            return Err("input_halfwidth must be positive".into());
        }
        check_rates(&self.rates)?;
        if let Some(&max) = self.rates.last() {
            if max > commgp::MAX_RATE_BITS {
                return Err(format!(
                    "rates cap at {} bits for a scalar input, got {max}",
                    commgp::MAX_RATE_BITS
                ));
            }
        }
        self.data_kernel
            .validate()
            .map_err(|e| format!("data_kernel: {e}"))?;
        if !(self.data_noise_variance > 0.0) {
            return Err("data_noise_variance must be positive".into());
        }
        self.model.validate().map_err(|e| format!("model: {e}"))
    }
}

/// Distributed protocols across a rate grid: regression quality against
/// total transmitted bits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSweepConfig {
    #[serde(default = "schema_default")]
    pub schema: u32,
    pub seed: u64,
    pub machines: usize,
    pub dim: usize,
    pub train_per_machine: usize,
    pub test_points: usize,
    /// Per-sample bit budgets for the lossy codecs.
    pub rates: Vec<u32>,
    pub protocols: Vec<Protocol>,
    pub codec: commgp::Codec,
    /// Ratio between consecutive input-covariance eigenvalues.
    pub input_decay: f64,
    /// Kernel the latent function is drawn from.
    pub data_kernel: KernelSpec,
    pub data_noise_variance: f64,
    pub model: ModelConfig,
}

impl Default for RateSweepConfig {
    fn default() -> Self {
        RateSweepConfig {
            schema: SCHEMA_VERSION,
            seed: 5,
            machines: 10,
            dim: 8,
            train_per_machine: 100,
            test_points: 200,
            rates: vec![0, 8, 16, 32, 64, 128],
            protocols: vec![
                Protocol::Full,
                Protocol::SingleCenter,
                Protocol::Broadcast,
                Protocol::Poe,
                Protocol::Bcm,
            ],
            codec: commgp::Codec::PerSymbol,
            input_decay: 0.6,
            data_kernel: KernelSpec::SquaredExponential {
                amplitude: 1.0,
                length_scale: 6.0,
            },
            data_noise_variance: 0.05,
            model: ModelConfig {
                kernel: KernelSpec::SquaredExponential {
                    amplitude: 0.5,
                    length_scale: 6.0,
                },
                noise_variance: 0.2,
                max_iters: 40,
                tol: 1e-4,
                fit_hyperparameters: true,
            },
        }
    }
}

impl RateSweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        check_schema(self.schema)?;
        if self.machines == 0 {
            return Err("machines must be at least 1".into());
        }
        if self.dim == 0 {
            return Err("dim must be at least 1".into());
        }
        if self.train_per_machine < self.dim {
            return Err(format!(
                "train_per_machine ({}) must be at least dim ({}) so local covariances are nonsingular",
                self.train_per_machine, self.dim
            ));
        }
        if self.test_points < 2 {
            return Err("test_points must be at least 2".into());
        }
        check_rates(&self.rates)?;
        if self.protocols.is_empty() {
            return Err("protocols must not be empty".into());
        }
        if !(self.input_decay > 0.0 && self.input_decay <= 1.0) {
            return Err(format!(
                "input_decay must lie in (0, 1], got {}",
                self.input_decay
            ));
        }
        self.data_kernel
            .validate()
            .map_err(|e| format!("data_kernel: {e}"))?;
        if !(self.data_noise_variance > 0.0) {
            return Err("data_noise_variance must be positive".into());
        }
        self.model.validate().map_err(|e| format!("model: {e}"))
    }
}

/// Loads a config from JSON, or falls back to defaults when no path is
/// given. `--seed` overrides whatever the file says.
pub fn load_or_default<T>(
    path: Option<&Path>,
    seed_override: Option<u64>,
    apply_seed: impl FnOnce(&mut T, u64),
    validate: impl FnOnce(&T) -> Result<(), String>,
) -> Result<T, CliError>
where
    T: Default + serde::de::DeserializeOwned,
{
    let mut config = match path {
        None => T::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    if let Some(seed) = seed_override {
        apply_seed(&mut config, seed);
    }
    validate(&config).map_err(CliError::Config)?;
    Ok(config)
}
