//! Equiprobable-bin scalar quantizer for Gaussian coordinates.
//!
//! An R-bit quantizer splits the standard normal into 2^R cells of equal
//! probability; each cell reproduces at its conditional mean
//! c_k = (2^R / sqrt(2 pi)) (exp(-a_k^2/2) - exp(-a_{k+1}^2/2)).
//! Quantizing N(0, s^2) with the s-scaled codebook leaves distortion
//! s^2 (1 - sigma_c^2), so a single unit table serves every variance.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::normal;

/// Largest supported per-dimension rate. Codebooks grow as 2^R; 16 bits is
/// already indistinguishable from lossless for 64-bit samples.
pub const MAX_RATE_BITS: u32 = 16;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

#[derive(Debug, Clone)]
pub struct ScalarQuantizer {
    rate_bits: u32,
    /// 2^R + 1 boundaries; the first and last are infinite.
    boundaries: Vec<f64>,
    /// 2^R conditional means, odd-symmetric.
    centroids: Vec<f64>,
    /// Variance of the centroid random variable; 1 minus the unit distortion.
    centroid_variance: f64,
}

impl ScalarQuantizer {
    /// Builds the unit-variance codebook for `rate_bits` in [0, 16].
    pub fn new(rate_bits: u32) -> Result<Self> {
        if rate_bits > MAX_RATE_BITS {
            return Err(Error::RateTooLarge {
                rate: rate_bits,
                max: MAX_RATE_BITS,
            });
        }
        let cells = 1usize << rate_bits;
        let mut boundaries = vec![0.0; cells + 1];
        boundaries[0] = f64::NEG_INFINITY;
        boundaries[cells] = f64::INFINITY;
        // Fill the lower half and mirror so symmetry is exact in floats.
        for k in 1..=cells / 2 {
            let p = k as f64 / cells as f64;
            let b = if 2 * k == cells {
                0.0
            } else {
                normal::inv_cdf(p)
            };
            boundaries[k] = b;
            boundaries[cells - k] = -b;
        }

        let scale = cells as f64 / SQRT_2PI;
        let tail = |b: f64| -> f64 {
            if b.is_infinite() {
                0.0
            } else {
                (-0.5 * b * b).exp()
            }
        };
        let mut centroids = vec![0.0; cells];
        for k in 0..cells.div_ceil(2) {
            let c = scale * (tail(boundaries[k]) - tail(boundaries[k + 1]));
            centroids[k] = c;
            centroids[cells - 1 - k] = -c;
        }
        if cells == 1 {
            centroids[0] = 0.0;
        }

        let centroid_variance =
            centroids.iter().map(|c| c * c).sum::<f64>() / cells as f64;
        Ok(ScalarQuantizer {
            rate_bits,
            boundaries,
            centroids,
            centroid_variance,
        })
    }

    pub fn rate_bits(&self) -> u32 {
        self.rate_bits
    }

    pub fn cells(&self) -> usize {
        self.centroids.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    pub fn centroid_variance(&self) -> f64 {
        self.centroid_variance
    }

    /// Mean-square error of quantizing a unit-variance Gaussian.
    pub fn unit_distortion(&self) -> f64 {
        1.0 - self.centroid_variance
    }

    /// Cell index of a coordinate in standard units; cells are [a_k, a_{k+1}).
    pub fn index_of(&self, u: f64) -> usize {
        let inner = &self.boundaries[1..self.cells()];
        inner.partition_point(|&b| b <= u)
    }

    pub fn centroid(&self, index: usize) -> f64 {
        self.centroids[index]
    }
}

/// Expected distortion of quantizing N(0, `variance`) with the `quantizer`
/// scaled by the standard deviation.
pub fn per_dim_distortion(variance: f64, quantizer: &ScalarQuantizer) -> f64 {
    debug_assert!(variance >= 0.0);
    variance * quantizer.unit_distortion()
}

fn cache() -> &'static Vec<Arc<ScalarQuantizer>> {
    static CACHE: OnceLock<Vec<Arc<ScalarQuantizer>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (0..=MAX_RATE_BITS)
            .map(|r| Arc::new(ScalarQuantizer::new(r).expect("rate within cap")))
            .collect()
    })
}

/// Shared codebook for `rate_bits`, built once per process.
pub fn cached_quantizer(rate_bits: u32) -> Result<Arc<ScalarQuantizer>> {
    if rate_bits > MAX_RATE_BITS {
        return Err(Error::RateTooLarge {
            rate: rate_bits,
            max: MAX_RATE_BITS,
        });
    }
    Ok(Arc::clone(&cache()[rate_bits as usize]))
}

/// Unit distortions e(1, r) for r = 0..=16.
pub(crate) fn unit_distortion_table() -> [f64; (MAX_RATE_BITS + 1) as usize] {
    let mut t = [0.0; (MAX_RATE_BITS + 1) as usize];
    for (r, slot) in t.iter_mut().enumerate() {
        *slot = cache()[r].unit_distortion();
    }
    t
}
