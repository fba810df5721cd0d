//! The experiment drivers behind the CLI subcommands. Each driver takes a
//! validated config, runs deterministically from its seed, and returns a
//! serializable output that the report layer writes as CSV and JSON.

use std::path::Path;
use std::time::Instant;

use commgp::{
    decode, encode, fuse_predictions, measure_distortion, predict_bcm, predict_poe,
    product_spectrum, rate_lower_bound, run_broadcast, run_single_center, smse,
    train_local_models, AscentOptions, BitLedger, Codec, DimRedModel, GpModel, KernelSpec,
    LedgerEntry, Machine, PayloadKind, PredictiveDist, ProtocolOptions, Recipient, SpdMatrix,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{
    DimredCompareConfig, Gp1dConfig, ModelConfig, Protocol, RateSweepConfig, RdCurveConfig,
};
use crate::dataset::{
    decaying_covariance, draw_from_gp_prior, gaussian_rows, line_grid, random_covariance,
};
use crate::report::write_matrix_bin;
use crate::CliError;

impl ModelConfig {
    fn protocol_options(&self) -> ProtocolOptions {
        ProtocolOptions {
            kernel: self.kernel,
            noise_variance: self.noise_variance,
            fit: AscentOptions {
                max_iters: self.max_iters,
                tol: self.tol,
            },
            fit_hyperparameters: self.fit_hyperparameters,
        }
    }
}

/// A data-scale starting point: amplitude and noise from the target
/// variance, length scale from the median pairwise input distance.
fn heuristic_start(
    template: &KernelSpec,
    inputs: &DMatrix<f64>,
    targets: &DVector<f64>,
) -> (KernelSpec, f64) {
    let n = targets.len();
    let mean = targets.sum() / n as f64;
    let var = (targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64).max(1e-8);
    let mut dists: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = inputs.row(i) - inputs.row(j);
            dists.push(diff.norm());
        }
    }
    dists.sort_by(|a, b| a.total_cmp(b));
    let median = dists
        .get(dists.len() / 2)
        .copied()
        .filter(|&m| m > 0.0)
        .unwrap_or(1.0);
    let kernel = match template {
        KernelSpec::Linear { .. } => KernelSpec::Linear {
            scale: var,
            bias: 0.1 * var,
        },
        KernelSpec::SquaredExponential { .. } => KernelSpec::SquaredExponential {
            amplitude: var,
            length_scale: median,
        },
    };
    (kernel, 0.1 * var)
}

/// Ascends from every start and keeps the model with the highest marginal
/// likelihood. Heavily quantized inputs leave a degenerate optimum where the
/// length scale collapses onto the duplicated input values; a multi-start
/// fit picks the smooth basin whenever it explains the data better.
fn fit_model_multi(
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    starts: &[(KernelSpec, f64)],
    model_cfg: &ModelConfig,
) -> Result<GpModel, CliError> {
    if !model_cfg.fit_hyperparameters {
        return Ok(GpModel::from_inputs(
            starts[0].0,
            starts[0].1,
            inputs,
            targets,
        )?);
    }
    let opts = AscentOptions {
        max_iters: model_cfg.max_iters,
        tol: model_cfg.tol,
    };
    let mut best: Option<GpModel> = None;
    let mut last_err = None;
    for &(kernel, noise) in starts {
        let fitted = GpModel::from_inputs(kernel, noise, inputs.clone(), targets.clone())
            .and_then(|m| Ok(m.fit_hyperparameters(&opts)?.0));
        match fitted {
            Ok(m) => {
                if best
                    .as_ref()
                    .map_or(true, |b| m.log_marginal_likelihood() > b.log_marginal_likelihood())
                {
                    best = Some(m);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(m) => Ok(m),
        None => Err(last_err.expect("at least one start").into()),
    }
}

fn fit_model(
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    model_cfg: &ModelConfig,
) -> Result<GpModel, CliError> {
    let heuristic = heuristic_start(&model_cfg.kernel, &inputs, &targets);
    let starts = [(model_cfg.kernel, model_cfg.noise_variance), heuristic];
    fit_model_multi(inputs, targets, &starts, model_cfg)
}

// ---------------------------------------------------------------------------
// Distortion-rate curves

#[derive(Debug, Clone, Serialize)]
pub struct RdCurveRow {
    pub bits_per_sample: u32,
    /// Information-theoretic distortion floor at this rate.
    pub lower_bound_distortion: f64,
    /// Measured distortion of the per-symbol codec.
    pub persym_distortion: f64,
    /// Measured distortion of the reduction codec at 16 bits/coefficient.
    pub dimred_distortion: f64,
    pub persym_predicted_distortion: f64,
    pub dimred_predicted_distortion: f64,
    pub dimred_dims: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RdCurveOutput {
    /// Distortion of sending nothing; every curve starts here at rate zero.
    pub total_variance: f64,
    pub rows: Vec<RdCurveRow>,
}

/// Distortion at which the rate bound equals `rate_bits`, found by bisecting
/// the strictly decreasing rate-of-distortion map.
fn distortion_at_rate(
    qx: &SpdMatrix,
    qy: &SpdMatrix,
    total: f64,
    rate_bits: u32,
) -> Result<f64, CliError> {
    if rate_bits == 0 {
        return Ok(total);
    }
    let mut lo = total * (2f64).powi(-(2 * rate_bits as i32) - 60);
    let mut hi = total;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let rate = rate_lower_bound(qx, qy, mid, None)?;
        if rate > rate_bits as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn rd_curve(cfg: &RdCurveConfig) -> Result<RdCurveOutput, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.dim;
    let source = decaying_covariance(&mut rng, d, cfg.spectrum_decay);
    let metric = random_covariance(&mut rng, d);
    let samples = gaussian_rows(&mut rng, cfg.samples, &source);

    // Everything downstream sees the empirical covariance, exactly as a
    // machine that estimated it from the batch would.
    let cov = SpdMatrix::new(samples.transpose() * &samples / cfg.samples as f64)?;
    let spectrum = product_spectrum(&cov, &metric)?;
    let total = spectrum.total_variance();

    let mut rows = Vec::with_capacity(cfg.rates.len());
    for &rate in &cfg.rates {
        let bound = distortion_at_rate(&cov, &metric, total, rate)?;

        let enc = encode(&samples, &cov, &metric, rate)?;
        let xhat = decode(&enc)?;
        let persym_predicted = enc.allocation().predicted_distortion;
        let persym_measured = measure_distortion(&samples, &xhat, &metric)?;

        let dimred_dims = (rate as usize / 16).min(d);
        let (dimred_predicted, dimred_measured) = if dimred_dims == 0 {
            let zeros = DMatrix::zeros(cfg.samples, d);
            (total, measure_distortion(&samples, &zeros, &metric)?)
        } else {
            let model = DimRedModel::fit(&cov, &metric, dimred_dims)?;
            let coeffs = model.encode(&samples)?;
            let rec = model.decode(&coeffs)?;
            (
                model.predicted_distortion(),
                measure_distortion(&samples, &rec, &metric)?,
            )
        };

        rows.push(RdCurveRow {
            bits_per_sample: rate,
            lower_bound_distortion: bound,
            persym_distortion: persym_measured,
            dimred_distortion: dimred_measured,
            persym_predicted_distortion: persym_predicted,
            dimred_predicted_distortion: dimred_predicted,
            dimred_dims,
        });
    }
    Ok(RdCurveOutput {
        total_variance: total,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Metric-aware reduction vs principal components

#[derive(Debug, Clone, Serialize)]
pub struct DimredCompareRow {
    /// Retained dimensions.
    pub m: usize,
    /// Expected metric distortion of the metric-aware map, averaged over
    /// instances.
    pub proposed_distortion: f64,
    pub pca_distortion: f64,
    /// Instances where the metric-aware map was strictly better.
    pub proposed_wins: usize,
    pub instances: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimredCompareOutput {
    pub identical_covariances: bool,
    pub rows: Vec<DimredCompareRow>,
}

/// Expected metric distortion of the linear reconstruction x -> T x for
/// x ~ N(0, sx): tr((I - T)^T sy (I - T) sx).
fn map_distortion(t: &DMatrix<f64>, sx: &SpdMatrix, sy: &SpdMatrix) -> f64 {
    let d = sx.dim();
    let residual = DMatrix::identity(d, d) - t;
    (residual.transpose() * sy.as_matrix() * &residual * sx.as_matrix()).trace()
}

pub fn dimred_compare(cfg: &DimredCompareConfig) -> Result<DimredCompareOutput, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.dim;
    // One covariance pair per instance, shared across target dims so the
    // curves are comparable.
    let pairs: Vec<(SpdMatrix, SpdMatrix)> = (0..cfg.instances)
        .map(|_| {
            let sx = random_covariance(&mut rng, d);
            let sy = if cfg.identical_covariances {
                sx.clone()
            } else {
                random_covariance(&mut rng, d)
            };
            (sx, sy)
        })
        .collect();

    let mut rows = Vec::new();
    for m in 1..d {
        let mut proposed_sum = 0.0;
        let mut pca_sum = 0.0;
        let mut wins = 0;
        for (sx, sy) in &pairs {
            let proposed = DimRedModel::fit(sx, sy, m)?;
            let pca = DimRedModel::fit_pca(sx, m)?;
            let proposed_d = map_distortion(&(proposed.basis() * proposed.coeff_map()), sx, sy);
            let pca_d = map_distortion(&(pca.basis() * pca.coeff_map()), sx, sy);
            proposed_sum += proposed_d;
            pca_sum += pca_d;
            if proposed_d < pca_d {
                wins += 1;
            }
        }
        rows.push(DimredCompareRow {
            m,
            proposed_distortion: proposed_sum / cfg.instances as f64,
            pca_distortion: pca_sum / cfg.instances as f64,
            proposed_wins: wins,
            instances: cfg.instances,
        });
    }
    Ok(DimredCompareOutput {
        identical_covariances: cfg.identical_covariances,
        rows,
    })
}

// ---------------------------------------------------------------------------
// One-dimensional GP regression on quantized inputs

/// One evaluation-grid point at one rate: the reference model against the
/// model refit on quantized inputs.
#[derive(Debug, Clone, Serialize)]
pub struct Gp1dPoint {
    pub rate: u32,
    pub x: f64,
    pub true_mean: f64,
    pub true_std: f64,
    pub quantized_mean: f64,
    pub quantized_std: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gp1dRateSummary {
    pub rate: u32,
    /// Mean squared reconstruction error of the quantized inputs.
    pub input_mse: f64,
    /// Standardized MSE of the grid means against the true latent function.
    pub smse_latent: f64,
    pub kernel: KernelSpec,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gp1dOutput {
    pub points: Vec<Gp1dPoint>,
    pub summaries: Vec<Gp1dRateSummary>,
    pub full_kernel: KernelSpec,
    pub full_noise_variance: f64,
    pub full_smse_latent: f64,
    /// Population std of the reference model's grid means: the output scale
    /// mean deviations are judged against.
    pub mean_std_reference: f64,
}

pub fn gp1d(cfg: &Gp1dConfig) -> Result<Gp1dOutput, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.train_points;
    let hw = cfg.input_halfwidth;

    let train_x = DMatrix::from_fn(n, 1, |_, _| rng.gen_range(-hw..hw));
    let grid = line_grid(cfg.grid_points, hw);
    let mut stacked = DMatrix::zeros(n + cfg.grid_points, 1);
    stacked.view_mut((0, 0), (n, 1)).copy_from(&train_x);
    stacked
        .view_mut((n, 0), (cfg.grid_points, 1))
        .copy_from(&grid);

    // One joint draw: noisy targets on the training half, clean latent values
    // on the grid half as ground truth.
    let draw = draw_from_gp_prior(&mut rng, &stacked, &cfg.data_kernel, cfg.data_noise_variance)?;
    let targets = DVector::from_fn(n, |i, _| draw.targets[i]);
    let latent_grid: Vec<f64> = (0..cfg.grid_points).map(|i| draw.latent[n + i]).collect();

    let full = fit_model(train_x.clone(), targets.clone(), &cfg.model)?;
    let full_post = full.predict_many(&grid)?;
    let full_means: Vec<f64> = full_post.iter().map(|p| p.mean).collect();
    let mean_avg = full_means.iter().sum::<f64>() / full_means.len() as f64;
    let mean_std_reference = (full_means
        .iter()
        .map(|m| (m - mean_avg).powi(2))
        .sum::<f64>()
        / full_means.len() as f64)
        .sqrt();

    let variance = SpdMatrix::new(train_x.transpose() * &train_x / n as f64)?;
    let identity = SpdMatrix::identity(1);

    let mut points = Vec::with_capacity(cfg.rates.len() * cfg.grid_points);
    let mut summaries = Vec::with_capacity(cfg.rates.len());
    for &rate in &cfg.rates {
        let enc = encode(&train_x, &variance, &variance, rate)?;
        let xhat = decode(&enc)?;
        let input_mse = measure_distortion(&train_x, &xhat, &identity)?;

        // Three starts: the configured one, the unquantized model's solution
        // (warm start), and the data-scale heuristic.
        let starts = [
            (cfg.model.kernel, cfg.model.noise_variance),
            (*full.kernel(), full.noise_variance()),
            heuristic_start(&cfg.model.kernel, &xhat, &targets),
        ];
        let model = fit_model_multi(xhat, targets.clone(), &starts, &cfg.model)?;
        let post = model.predict_many(&grid)?;
        let means: Vec<f64> = post.iter().map(|p| p.mean).collect();
        for i in 0..cfg.grid_points {
            points.push(Gp1dPoint {
                rate,
                x: grid[(i, 0)],
                true_mean: full_post[i].mean,
                true_std: full_post[i].predictive_variance.sqrt(),
                quantized_mean: post[i].mean,
                quantized_std: post[i].predictive_variance.sqrt(),
            });
        }
        summaries.push(Gp1dRateSummary {
            rate,
            input_mse,
            smse_latent: smse(&latent_grid, &means)?,
            kernel: *model.kernel(),
            noise_variance: model.noise_variance(),
        });
    }

    Ok(Gp1dOutput {
        points,
        summaries,
        full_kernel: *full.kernel(),
        full_noise_variance: full.noise_variance(),
        full_smse_latent: smse(&latent_grid, &full_means)?,
        mean_std_reference,
    })
}

// ---------------------------------------------------------------------------
// Distributed protocols across a rate grid

#[derive(Debug, Clone, Serialize)]
pub struct MachineFit {
    pub machine: usize,
    pub kernel: KernelSpec,
    pub noise_variance: f64,
    pub log_marginal_likelihood: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    /// Per-sample budget of the lossy codec; rate-independent protocols
    /// repeat their result at every grid rate.
    pub rate: u32,
    pub protocol: String,
    pub smse: f64,
    pub total_bits: u64,
    /// Test points where the committee correction was degenerate and the
    /// prediction fell back to the plain product of experts.
    pub bcm_fallbacks: usize,
    pub wall_time_ms: u64,
    pub per_machine: Vec<MachineFit>,
    pub ledger: Vec<LedgerEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSweepOutput {
    pub test_points: usize,
    pub runs: Vec<SweepRun>,
}

/// Bits for one machine shipping a mean and a variance per test point.
fn predictive_bits(test_points: usize) -> u64 {
    2 * 64 * test_points as u64
}

fn machine_fit(machine: usize, model: &GpModel) -> MachineFit {
    MachineFit {
        machine,
        kernel: *model.kernel(),
        noise_variance: model.noise_variance(),
        log_marginal_likelihood: model.log_marginal_likelihood(),
    }
}

fn grid_means(model: &GpModel, xs: &DMatrix<f64>) -> Result<Vec<f64>, CliError> {
    Ok(model.predict_many(xs)?.iter().map(|p| p.mean).collect())
}

/// The cached, rate-independent pieces of a sweep row.
struct CachedRun {
    smse: f64,
    total_bits: u64,
    bcm_fallbacks: usize,
    wall_time_ms: u64,
    per_machine: Vec<MachineFit>,
    ledger: Vec<LedgerEntry>,
}

impl CachedRun {
    fn row(&self, rate: u32, protocol: Protocol) -> SweepRun {
        SweepRun {
            rate,
            protocol: protocol.name().to_string(),
            smse: self.smse,
            total_bits: self.total_bits,
            bcm_fallbacks: self.bcm_fallbacks,
            wall_time_ms: self.wall_time_ms,
            per_machine: self.per_machine.clone(),
            ledger: self.ledger.clone(),
        }
    }
}

pub fn rate_sweep(
    cfg: &RateSweepConfig,
    dump_grams: Option<&Path>,
) -> Result<RateSweepOutput, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.dim;
    let n_train = cfg.machines * cfg.train_per_machine;
    let n_total = n_train + cfg.test_points;

    let input_cov = decaying_covariance(&mut rng, d, cfg.input_decay);
    let inputs = gaussian_rows(&mut rng, n_total, &input_cov);
    let draw = draw_from_gp_prior(&mut rng, &inputs, &cfg.data_kernel, cfg.data_noise_variance)?;

    let machines: Vec<Machine> = (0..cfg.machines)
        .map(|id| {
            let first = id * cfg.train_per_machine;
            let x = inputs
                .view((first, 0), (cfg.train_per_machine, d))
                .clone_owned();
            let y = DVector::from_fn(cfg.train_per_machine, |i, _| draw.targets[first + i]);
            Machine::new(id, x, y)
        })
        .collect::<Result<_, _>>()?;
    let test_x = inputs.view((n_train, 0), (cfg.test_points, d)).clone_owned();
    let test_y: Vec<f64> = (0..cfg.test_points)
        .map(|i| draw.targets[n_train + i])
        .collect();

    let opts = cfg.model.protocol_options();
    let wants = |p: Protocol| cfg.protocols.contains(&p);
    let dump = |name: String, gram: &DMatrix<f64>| -> Result<(), CliError> {
        if let Some(dir) = dump_grams {
            write_matrix_bin(&dir.join(name), gram)?;
        }
        Ok(())
    };

    // The reference: every batch shipped losslessly to the center.
    let full = if wants(Protocol::Full) {
        let clock = Instant::now();
        let run = run_single_center(&machines, Codec::Lossless, 0, &opts)?;
        let cached = CachedRun {
            smse: smse(&test_y, &grid_means(&run.model, &test_x)?)?,
            total_bits: run.ledger.total_bits(),
            bcm_fallbacks: 0,
            wall_time_ms: clock.elapsed().as_millis() as u64,
            per_machine: vec![machine_fit(0, &run.model)],
            ledger: run.ledger.entries().to_vec(),
        };
        dump("gram_full.bin".to_string(), run.model.gram())?;
        Some(cached)
    } else {
        None
    };

    // Zero-communication committee baselines share one set of local models.
    let (poe, bcm) = if wants(Protocol::Poe) || wants(Protocol::Bcm) {
        let clock = Instant::now();
        let locals = train_local_models(&machines, &opts)?;
        let local_fit_ms = clock.elapsed().as_millis() as u64;
        let fits: Vec<MachineFit> = locals
            .iter()
            .enumerate()
            .map(|(i, m)| machine_fit(i, m))
            .collect();
        let mut exchange = BitLedger::new();
        for m in &machines[1..] {
            exchange.record(
                m.id,
                Recipient::Machine(0),
                PayloadKind::Predictive,
                predictive_bits(cfg.test_points),
            );
        }

        let committee = |which: Protocol| -> Result<CachedRun, CliError> {
            let clock = Instant::now();
            let mut means = Vec::with_capacity(cfg.test_points);
            let mut fallbacks = 0;
            for i in 0..cfg.test_points {
                let x = test_x.row(i).transpose();
                let mean = if which == Protocol::Poe {
                    predict_poe(&locals, &x)?.mean[0]
                } else {
                    let p = predict_bcm(&locals, &x)?;
                    if p.fell_back_to_poe {
                        fallbacks += 1;
                    }
                    p.dist.mean[0]
                };
                means.push(mean);
            }
            Ok(CachedRun {
                smse: smse(&test_y, &means)?,
                total_bits: exchange.total_bits(),
                bcm_fallbacks: fallbacks,
                wall_time_ms: local_fit_ms + clock.elapsed().as_millis() as u64,
                per_machine: fits.clone(),
                ledger: exchange.entries().to_vec(),
            })
        };
        let poe = if wants(Protocol::Poe) {
            Some(committee(Protocol::Poe)?)
        } else {
            None
        };
        let bcm = if wants(Protocol::Bcm) {
            Some(committee(Protocol::Bcm)?)
        } else {
            None
        };
        (poe, bcm)
    } else {
        (None, None)
    };

    let mut runs = Vec::with_capacity(cfg.rates.len() * cfg.protocols.len());
    for &rate in &cfg.rates {
        for &protocol in &cfg.protocols {
            let run = match protocol {
                Protocol::Full => full.as_ref().expect("cached").row(rate, protocol),
                Protocol::Poe => poe.as_ref().expect("cached").row(rate, protocol),
                Protocol::Bcm => bcm.as_ref().expect("cached").row(rate, protocol),
                Protocol::SingleCenter => {
                    let clock = Instant::now();
                    let run = run_single_center(&machines, cfg.codec, rate, &opts)?;
                    dump(format!("gram_single_center_r{rate}.bin"), run.model.gram())?;
                    SweepRun {
                        rate,
                        protocol: protocol.name().to_string(),
                        smse: smse(&test_y, &grid_means(&run.model, &test_x)?)?,
                        total_bits: run.ledger.total_bits(),
                        bcm_fallbacks: 0,
                        wall_time_ms: clock.elapsed().as_millis() as u64,
                        per_machine: vec![machine_fit(0, &run.model)],
                        ledger: run.ledger.entries().to_vec(),
                    }
                }
                Protocol::Broadcast => {
                    let clock = Instant::now();
                    let mut run = run_broadcast(&machines, cfg.codec, rate, &opts)?;
                    // Each machine predicts everywhere; machine 0 gathers the
                    // predictive moments and fuses them.
                    let mut per_model_post = Vec::with_capacity(run.models.len());
                    for (i, model) in run.models.iter().enumerate() {
                        per_model_post.push(model.predict_many(&test_x)?);
                        if i != 0 {
                            run.ledger.record(
                                machines[i].id,
                                Recipient::Machine(0),
                                PayloadKind::Predictive,
                                predictive_bits(cfg.test_points),
                            );
                        }
                    }
                    let mut means = Vec::with_capacity(cfg.test_points);
                    for i in 0..cfg.test_points {
                        let dists: Vec<PredictiveDist> = per_model_post
                            .iter()
                            .map(|posts| {
                                PredictiveDist::scalar(
                                    posts[i].mean,
                                    posts[i].predictive_variance,
                                )
                            })
                            .collect();
                        means.push(fuse_predictions(&dists)?.mean[0]);
                    }
                    dump(
                        format!("gram_broadcast_r{rate}.bin"),
                        run.models[0].gram(),
                    )?;
                    SweepRun {
                        rate,
                        protocol: protocol.name().to_string(),
                        smse: smse(&test_y, &means)?,
                        total_bits: run.ledger.total_bits(),
                        bcm_fallbacks: 0,
                        wall_time_ms: clock.elapsed().as_millis() as u64,
                        per_machine: run
                            .models
                            .iter()
                            .enumerate()
                            .map(|(i, m)| machine_fit(i, m))
                            .collect(),
                        ledger: run.ledger.entries().to_vec(),
                    }
                }
            };
            runs.push(run);
        }
    }

    Ok(RateSweepOutput {
        test_points: cfg.test_points,
        runs,
    })
}
