//! Symmetric positive-definite matrices and the product spectrum shared by
//! the bound, the per-symbol codec and the dimension-reduction codec.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues in [-REL * lambda_max, 0) are treated as exact zeros;
/// anything further below fails validation.
pub const EIGEN_CLAMP_REL: f64 = 1e-10;

/// Looser clamp for matrices assembled by subtraction, where cancellation
/// noise exceeds the validation window.
pub const EIGEN_CLAMP_LOOSE_REL: f64 = 1e-8;

/// Symmetric eigendecomposition with eigenvalues sorted descending.
/// Ties keep the original column order so downstream bases are deterministic.
pub(crate) fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let d = m.nrows();
    let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .total_cmp(&eig.eigenvalues[i])
            .then(i.cmp(&j))
    });
    let values = DVector::from_fn(d, |k, _| eig.eigenvalues[order[k]]);
    let mut vectors = DMatrix::zeros(d, d);
    for (k, &src) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Spectral factor F with F F^T equal to the PSD part of `m`. Eigenvalues in
/// [-rel_tol * lambda_max, 0) are clamped to zero; anything lower is an error.
pub(crate) fn psd_factor(m: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let (values, vectors) = symmetric_eigen_sorted(m);
    let lambda_max = values[0].max(0.0);
    let floor = -rel_tol * lambda_max;
    let d = m.nrows();
    let mut f = vectors;
    for k in 0..d {
        let lam = values[k];
        if lam < floor {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: lam,
            });
        }
        let s = lam.max(0.0).sqrt();
        f.column_mut(k).scale_mut(s);
    }
    Ok(f)
}

fn check_square_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = m.amax().max(1e-300);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NotPositiveDefinite {
                    min_eigenvalue: f64::NAN,
                });
            }
        }
    }
    Ok(())
}

/// A validated symmetric positive-semidefinite matrix.
///
/// Construction symmetrizes the entries and rejects matrices whose smallest
/// eigenvalue falls below the clamp window. Instances are immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_symmetric(&m)?;
        let sym = Self::symmetrize(m);
        // psd_factor performs the eigenvalue validation.
        psd_factor(&sym, EIGEN_CLAMP_REL)?;
        Ok(SpdMatrix { m: sym })
    }

    /// Wraps a matrix already known to be symmetric PSD (sums and congruence
    /// transforms of validated matrices). Entries are still symmetrized.
    pub(crate) fn from_symmetric_unchecked(m: DMatrix<f64>) -> Self {
        SpdMatrix {
            m: Self::symmetrize(m),
        }
    }

    fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
        let t = m.transpose();
        (m + t) * 0.5
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if let Some(&bad) = diag.iter().find(|&&v| v < 0.0) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: bad,
            });
        }
        Ok(SpdMatrix {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        })
    }

    pub fn identity(d: usize) -> Self {
        SpdMatrix {
            m: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// Symmetric square root via eigendecomposition.
    pub fn sqrt(&self) -> Result<SpdMatrix> {
        let (values, vectors) = symmetric_eigen_sorted(&self.m);
        let lambda_max = values[0].max(0.0);
        let floor = -EIGEN_CLAMP_LOOSE_REL * lambda_max;
        let d = self.dim();
        let mut scaled = vectors.clone();
        for k in 0..d {
            let lam = values[k];
            if lam < floor {
                return Err(Error::NotPositiveDefinite {
                    min_eigenvalue: lam,
                });
            }
            scaled.column_mut(k).scale_mut(lam.max(0.0).sqrt());
        }
        Ok(SpdMatrix::from_symmetric_unchecked(
            &scaled * vectors.transpose(),
        ))
    }

    /// Inverse symmetric square root; requires a strictly positive spectrum.
    pub fn inv_sqrt(&self) -> Result<SpdMatrix> {
        let (values, vectors) = symmetric_eigen_sorted(&self.m);
        let lambda_max = values[0].max(0.0);
        let d = self.dim();
        let cutoff = 1e-12 * lambda_max;
        let mut scaled = vectors.clone();
        for k in 0..d {
            let lam = values[k];
            if lam <= cutoff {
                return Err(Error::NotPositiveDefinite {
                    min_eigenvalue: lam,
                });
            }
            scaled.column_mut(k).scale_mut(1.0 / lam.sqrt());
        }
        Ok(SpdMatrix::from_symmetric_unchecked(
            &scaled * vectors.transpose(),
        ))
    }
}

/// Eigenstructure of Q_y^{1/2} Q_x Q_y^{1/2}, whose spectrum equals that of
/// Q_x Q_y. All factors are computed eagerly; the type is immutable.
#[derive(Debug, Clone)]
pub struct ProductSpectrum {
    eigenvalues: DVector<f64>,
    basis: DMatrix<f64>,
    y_sqrt: SpdMatrix,
    y_inv_sqrt: SpdMatrix,
    forward: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

/// Decomposes the pair (Q_x, Q_y) into the shared coding spectrum.
/// Q_y must be strictly positive definite.
pub fn product_spectrum(qx: &SpdMatrix, qy: &SpdMatrix) -> Result<ProductSpectrum> {
    if qx.dim() != qy.dim() {
        return Err(Error::DimensionMismatch {
            expected: qx.dim(),
            got: qy.dim(),
        });
    }
    let y_sqrt = qy.sqrt()?;
    let y_inv_sqrt = qy.inv_sqrt()?;
    let core = y_sqrt.as_matrix() * qx.as_matrix() * y_sqrt.as_matrix();
    let core = SpdMatrix::from_symmetric_unchecked(core);
    let (mut values, basis) = symmetric_eigen_sorted(core.as_matrix());
    let lambda_max = values[0].max(0.0);
    let floor = -EIGEN_CLAMP_LOOSE_REL * lambda_max;
    for v in values.iter_mut() {
        if *v < floor {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: *v });
        }
        *v = v.max(0.0);
    }
    let forward = basis.transpose() * y_sqrt.as_matrix();
    let inverse = y_inv_sqrt.as_matrix() * &basis;
    Ok(ProductSpectrum {
        eigenvalues: values,
        basis,
        y_sqrt,
        y_inv_sqrt,
        forward,
        inverse,
    })
}

impl ProductSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Shared eigenvalues of Q_x Q_y, descending, nonnegative.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    /// Orthonormal eigenvectors of Q_y^{1/2} Q_x Q_y^{1/2}, one per column.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn y_sqrt(&self) -> &SpdMatrix {
        &self.y_sqrt
    }

    pub fn y_inv_sqrt(&self) -> &SpdMatrix {
        &self.y_inv_sqrt
    }

    /// U^T Q_y^{1/2}: maps a sample into independent coding coordinates.
    pub fn forward_transform(&self) -> &DMatrix<f64> {
        &self.forward
    }

    /// Q_y^{-1/2} U: maps coded coordinates back to the sample space.
    pub fn inverse_transform(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// Sum of the shared eigenvalues; the distortion of coding at zero rate.
    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.sum()
    }
}
