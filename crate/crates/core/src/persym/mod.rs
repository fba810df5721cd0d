//! Per-symbol coding of sample batches against an inner-product metric.
//!
//! Samples are rotated into the coding coordinates of the product spectrum,
//! each coordinate is scalar-quantized with a greedily allocated bit budget,
//! and reconstructions are rotated back. The expected quadratic-form
//! distortion is the eigenvalue-weighted sum of unit quantizer distortions.

mod quantizer;
pub mod wire;

pub use quantizer::{cached_quantizer, per_dim_distortion, ScalarQuantizer, MAX_RATE_BITS};

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{product_spectrum, ProductSpectrum, SpdMatrix};

/// Integer bit split across spectrum dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BitAllocation {
    /// Bits per spectrum dimension; sums to the requested budget.
    pub per_dim_bits: Vec<u32>,
    /// Expected distortion sum lambda_i * e(1, R_i) under the allocation.
    pub predicted_distortion: f64,
    /// Total bits per sample.
    pub total_bits: u32,
}

/// Greedy bit allocation: every bit goes to the dimension with the largest
/// remaining drop in expected distortion. The drops shrink with rate, which
/// makes the greedy split optimal among integer allocations.
pub fn allocate_bits(eigenvalues: &[f64], total_bits: u32) -> BitAllocation {
    let d = eigenvalues.len();
    let table = quantizer::unit_distortion_table();
    let cap = MAX_RATE_BITS;
    let gain = |lambda: f64, rate: u32| -> f64 {
        if rate >= cap {
            0.0
        } else {
            lambda * (table[rate as usize] - table[rate as usize + 1])
        }
    };

    let mut rates = vec![0u32; d];
    for _ in 0..total_bits {
        let mut best: Option<(usize, f64)> = None;
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let g = gain(lambda, rates[j]);
            if g > 0.0 && best.map_or(true, |(_, bg)| g > bg) {
                best = Some((j, g));
            }
        }
        let j = match best {
            Some((j, _)) => j,
            // All live dimensions are at the cap (or the spectrum is zero):
            // the budget still has to land somewhere, so spread it over the
            // least-loaded live dimension.
            None => (0..d)
                .filter(|&j| eigenvalues[j] > 0.0)
                .min_by_key(|&j| rates[j])
                .unwrap_or(0),
        };
        rates[j] += 1;
    }

    let predicted_distortion = eigenvalues
        .iter()
        .zip(&rates)
        .map(|(&lambda, &r)| lambda * table[(r.min(cap)) as usize])
        .sum();
    BitAllocation {
        per_dim_bits: rates,
        predicted_distortion,
        total_bits,
    }
}

/// A batch quantized against a product spectrum, ready for transmission.
#[derive(Debug, Clone)]
pub struct EncodedBatch {
    spectrum: Arc<ProductSpectrum>,
    allocation: BitAllocation,
    n: usize,
    /// Row-major cell indices, one per (sample, dimension).
    indices: Vec<u16>,
}

impl EncodedBatch {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn allocation(&self) -> &BitAllocation {
        &self.allocation
    }

    pub fn spectrum(&self) -> &Arc<ProductSpectrum> {
        &self.spectrum
    }

    /// Header size in bits of the serialized form.
    pub fn header_bits(&self) -> u64 {
        wire::header_bits(self.dim())
    }

    /// Index payload size in bits: n times the per-sample budget.
    pub fn payload_bits(&self) -> u64 {
        self.n as u64 * self.allocation.total_bits as u64
    }

    /// Exact serialized size in bits, header plus payload.
    pub fn ledger_bits(&self) -> u64 {
        self.header_bits() + self.payload_bits()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.dim();
        let mut out = Vec::with_capacity((self.ledger_bits() as usize).div_ceil(8));
        wire::write_header(&mut out, &self.allocation.per_dim_bits, self.n as u64);
        let mut bits = wire::BitWriter::new();
        for row in 0..self.n {
            for j in 0..d {
                let r = self.allocation.per_dim_bits[j];
                if r > 0 {
                    bits.put(self.indices[row * d + j] as u32, r);
                }
            }
        }
        out.extend_from_slice(&bits.finish());
        out
    }

    /// Parses a serialized batch. The decoder must reconstruct the same
    /// spectrum the encoder used (both sides derive it from the exchanged
    /// covariance pair).
    pub fn from_bytes(bytes: &[u8], spectrum: Arc<ProductSpectrum>) -> Result<Self> {
        let header = wire::read_header(bytes)?;
        let d = header.per_dim_bits.len();
        if d != spectrum.dim() {
            return Err(Error::DimensionMismatch {
                expected: spectrum.dim(),
                got: d,
            });
        }
        let per_sample: u64 = header.per_dim_bits.iter().map(|&b| b as u64).sum();
        for &r in &header.per_dim_bits {
            if r > MAX_RATE_BITS {
                return Err(Error::RateTooLarge {
                    rate: r,
                    max: MAX_RATE_BITS,
                });
            }
        }
        let n = header.n as usize;
        let expected_len = header.body_offset + ((per_sample * n as u64) as usize).div_ceil(8);
        if bytes.len() != expected_len {
            return Err(Error::TruncatedPayload {
                expected: expected_len,
                got: bytes.len(),
            });
        }

        let mut reader = wire::BitReader::new(&bytes[header.body_offset..]);
        let mut indices = vec![0u16; n * d];
        for row in 0..n {
            for j in 0..d {
                let r = header.per_dim_bits[j];
                if r > 0 {
                    let idx = reader.get(r)?;
                    if idx >= (1u32 << r) {
                        return Err(Error::CorruptIndex {
                            dim: j,
                            index: idx,
                            limit: 1u32 << r,
                        });
                    }
                    indices[row * d + j] = idx as u16;
                }
            }
        }

        let allocation = BitAllocation {
            predicted_distortion: predicted_from(spectrum.eigenvalues(), &header.per_dim_bits),
            total_bits: per_sample as u32,
            per_dim_bits: header.per_dim_bits,
        };
        Ok(EncodedBatch {
            spectrum,
            allocation,
            n,
            indices,
        })
    }
}

fn predicted_from(eigenvalues: &[f64], rates: &[u32]) -> f64 {
    let table = quantizer::unit_distortion_table();
    eigenvalues
        .iter()
        .zip(rates)
        .map(|(&l, &r)| l * table[r.min(MAX_RATE_BITS) as usize])
        .sum()
}

/// Quantizes zero-mean `samples` (one row each) drawn with covariance `qx`
/// against the inner-product metric `qy`, spending `total_bits` per sample.
pub fn encode(
    samples: &DMatrix<f64>,
    qx: &SpdMatrix,
    qy: &SpdMatrix,
    total_bits: u32,
) -> Result<EncodedBatch> {
    let spectrum = Arc::new(product_spectrum(qx, qy)?);
    encode_with_spectrum(samples, spectrum, total_bits)
}

/// As [`encode`], reusing an already computed spectrum.
pub fn encode_with_spectrum(
    samples: &DMatrix<f64>,
    spectrum: Arc<ProductSpectrum>,
    total_bits: u32,
) -> Result<EncodedBatch> {
    let d = spectrum.dim();
    if samples.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: samples.ncols(),
        });
    }
    let allocation = allocate_bits(spectrum.eigenvalues(), total_bits);
    if let Some(&r) = allocation.per_dim_bits.iter().find(|&&r| r > MAX_RATE_BITS) {
        return Err(Error::RateTooLarge {
            rate: r,
            max: MAX_RATE_BITS,
        });
    }

    let n = samples.nrows();
    let transformed = samples * spectrum.forward_transform().transpose();
    let mut indices = vec![0u16; n * d];
    for j in 0..d {
        let r = allocation.per_dim_bits[j];
        if r == 0 {
            continue;
        }
        let sigma = spectrum.eigenvalues()[j].sqrt();
        let q = cached_quantizer(r)?;
        for row in 0..n {
            indices[row * d + j] = q.index_of(transformed[(row, j)] / sigma) as u16;
        }
    }
    Ok(EncodedBatch {
        spectrum,
        allocation,
        n,
        indices,
    })
}

/// Reconstructs the batch: centroids in coding coordinates, rotated back.
pub fn decode(batch: &EncodedBatch) -> Result<DMatrix<f64>> {
    let d = batch.dim();
    let n = batch.n;
    let mut coded = DMatrix::zeros(n, d);
    for j in 0..d {
        let r = batch.allocation.per_dim_bits[j];
        if r == 0 {
            continue;
        }
        let sigma = batch.spectrum.eigenvalues()[j].sqrt();
        let q = cached_quantizer(r)?;
        for row in 0..n {
            let idx = batch.indices[row * d + j] as usize;
            if idx >= q.cells() {
                return Err(Error::CorruptIndex {
                    dim: j,
                    index: idx as u32,
                    limit: q.cells() as u32,
                });
            }
            coded[(row, j)] = sigma * q.centroid(idx);
        }
    }
    Ok(coded * batch.spectrum.inverse_transform().transpose())
}

/// Empirical quadratic-form distortion (1/n) sum_i d_i^T M d_i with
/// d_i = x_i - xhat_i.
pub fn measure_distortion(
    original: &DMatrix<f64>,
    reconstructed: &DMatrix<f64>,
    metric: &SpdMatrix,
) -> Result<f64> {
    if original.shape() != reconstructed.shape() {
        return Err(Error::DimensionMismatch {
            expected: original.nrows(),
            got: reconstructed.nrows(),
        });
    }
    if original.ncols() != metric.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            got: original.ncols(),
        });
    }
    let diff = original - reconstructed;
    let weighted = &diff * metric.as_matrix();
    Ok(weighted.component_mul(&diff).sum() / original.nrows() as f64)
}
