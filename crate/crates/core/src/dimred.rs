//! Inner-product-optimal dimension reduction.
//!
//! The best m-dimensional reconstruction subspace under the metric S_y spans
//! the top right eigenvectors of S_x S_y. Those eigenvectors are recovered
//! through the symmetric product spectrum, mapped back by S_y^{-1/2}, and
//! re-orthonormalized; the span, which alone determines the distortion, is
//! preserved. Coefficients solve the metric-weighted least squares
//! z = (U^T S_y U)^{-1} U^T S_y x.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{product_spectrum, symmetric_eigen_sorted, SpdMatrix};

#[derive(Debug, Clone)]
pub struct DimRedModel {
    /// d x m orthonormal basis of the reconstruction subspace.
    basis: DMatrix<f64>,
    /// m x d map from a sample to its optimal coefficients.
    coeff_map: DMatrix<f64>,
    /// Expected in-sample distortion: the sum of the dropped eigenvalues.
    predicted_distortion: f64,
}

impl DimRedModel {
    /// Fits the metric-aware reducer for covariance `sx` against metric `sy`.
    pub fn fit(sx: &SpdMatrix, sy: &SpdMatrix, target_dim: usize) -> Result<Self> {
        let d = sx.dim();
        check_target(target_dim, d)?;
        let spectrum = product_spectrum(sx, sy)?;
        // Columns of Q_y^{-1/2} U are right eigenvectors of S_x S_y.
        let raw = spectrum.inverse_transform().columns(0, target_dim).into_owned();
        let qr = nalgebra::linalg::QR::new(raw);
        let basis = qr.q().columns(0, target_dim).into_owned();

        let coeff_map = weighted_coeff_map(&basis, sy)?;
        let predicted_distortion = spectrum.eigenvalues()[target_dim..].iter().sum();
        Ok(DimRedModel {
            basis,
            coeff_map,
            predicted_distortion,
        })
    }

    /// Plain principal-component baseline: top eigenvectors of `sx`, with the
    /// Euclidean coefficient map and Euclidean distortion prediction.
    pub fn fit_pca(sx: &SpdMatrix, target_dim: usize) -> Result<Self> {
        let d = sx.dim();
        check_target(target_dim, d)?;
        let (values, vectors) = symmetric_eigen_sorted(sx.as_matrix());
        let basis = vectors.columns(0, target_dim).into_owned();
        let coeff_map = basis.transpose();
        let predicted_distortion = values.as_slice()[target_dim..].iter().sum();
        Ok(DimRedModel {
            basis,
            coeff_map,
            predicted_distortion,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn coeff_map(&self) -> &DMatrix<f64> {
        &self.coeff_map
    }

    pub fn predicted_distortion(&self) -> f64 {
        self.predicted_distortion
    }

    /// Projects samples (rows) to coefficient rows.
    pub fn encode(&self, samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if samples.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: samples.ncols(),
            });
        }
        Ok(samples * self.coeff_map.transpose())
    }

    /// Reconstructs coefficient rows back into sample space.
    pub fn decode(&self, coeffs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if coeffs.ncols() != self.target_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.target_dim(),
                got: coeffs.ncols(),
            });
        }
        Ok(coeffs * self.basis.transpose())
    }
}

fn check_target(target_dim: usize, d: usize) -> Result<()> {
    if target_dim == 0 || target_dim > d {
        return Err(Error::BadTargetDim {
            requested: target_dim,
            dim: d,
        });
    }
    Ok(())
}

fn weighted_coeff_map(basis: &DMatrix<f64>, sy: &SpdMatrix) -> Result<DMatrix<f64>> {
    let uty = basis.transpose() * sy.as_matrix();
    let gram = &uty * basis;
    let chol = nalgebra::linalg::Cholesky::new(gram).ok_or(Error::SingularSystem)?;
    Ok(chol.solve(&uty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn principal_angle_cos(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        // Smallest singular value of A^T B for orthonormal A, B.
        let m = a.transpose() * b;
        let svd = nalgebra::linalg::SVD::new(m, false, false);
        svd.singular_values.min()
    }

    #[test]
    fn diagonal_example_keeps_the_metric_heavy_axis() {
        let sx = SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let sy = SpdMatrix::from_diagonal(&[1.0, 9.0]).unwrap();
        let model = DimRedModel::fit(&sx, &sy, 1).unwrap();
        // Top eigenvalue of S_x S_y is 9 on the second axis.
        assert_relative_eq!(model.basis()[(0, 0)].abs(), 0.0, epsilon = 1e-10);
        assert_relative_eq!(model.basis()[(1, 0)].abs(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(model.predicted_distortion(), 4.0, epsilon = 1e-10);

        let x = DMatrix::from_row_slice(1, 2, &[3.0, 5.0]);
        let z = model.encode(&x).unwrap();
        let xhat = model.decode(&z).unwrap();
        assert_relative_eq!(xhat[(0, 0)], 0.0, epsilon = 1e-10);
        assert_relative_eq!(xhat[(0, 1)], 5.0, epsilon = 1e-10);
    }

    #[test]
    fn euclidean_metric_reduces_to_pca() {
        let sx = SpdMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[3.0, 0.4, 0.1, 0.4, 2.0, 0.3, 0.1, 0.3, 1.0],
        ))
        .unwrap();
        let sy = SpdMatrix::identity(3);
        let ours = DimRedModel::fit(&sx, &sy, 2).unwrap();
        let pca = DimRedModel::fit_pca(&sx, 2).unwrap();
        assert!(principal_angle_cos(ours.basis(), pca.basis()) > 1.0 - 1e-10);
        assert_relative_eq!(
            ours.predicted_distortion(),
            pca.predicted_distortion(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn identical_covariances_recover_the_pca_subspace() {
        let s = SpdMatrix::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, 0.8, 0.2, 0.0, 0.8, 3.0, 0.5, 0.1, 0.2, 0.5, 2.0, 0.3, 0.0, 0.1, 0.3, 1.0,
            ],
        ))
        .unwrap();
        let ours = DimRedModel::fit(&s, &s, 2).unwrap();
        let pca = DimRedModel::fit_pca(&s, 2).unwrap();
        let cos = principal_angle_cos(ours.basis(), pca.basis());
        assert!(cos > 1.0 - 1e-6, "principal angle too large: cos = {cos}");
    }

    #[test]
    fn basis_spans_an_invariant_subspace_with_the_top_eigenvalues() {
        let sx = SpdMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[2.5, 0.6, 0.2, 0.6, 1.8, 0.4, 0.2, 0.4, 1.2],
        ))
        .unwrap();
        let sy = SpdMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[1.5, 0.3, 0.0, 0.3, 2.2, 0.5, 0.0, 0.5, 0.9],
        ))
        .unwrap();
        let m = 2;
        let model = DimRedModel::fit(&sx, &sy, m).unwrap();
        let u = model.basis();
        let product = sx.as_matrix() * sy.as_matrix();
        let pu = &product * u;
        let b = u.transpose() * &pu;
        let residual = (&pu - u * &b).norm() / pu.norm();
        assert!(residual < 1e-8, "subspace residual {residual}");

        // Eigenvalues of the restriction agree with the top product spectrum.
        let spectrum = product_spectrum(&sx, &sy).unwrap();
        let mut restricted: Vec<f64> = b
            .complex_eigenvalues()
            .iter()
            .map(|c| {
                assert!(c.im.abs() < 1e-9);
                c.re
            })
            .collect();
        restricted.sort_by(|a, b| b.total_cmp(a));
        for k in 0..m {
            assert_relative_eq!(
                restricted[k],
                spectrum.eigenvalues()[k],
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn orthonormal_basis_and_unbiased_projection() {
        let sx = SpdMatrix::from_diagonal(&[5.0, 2.0, 1.0]).unwrap();
        let sy = SpdMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 3.0],
        ))
        .unwrap();
        let model = DimRedModel::fit(&sx, &sy, 2).unwrap();
        let utu = model.basis().transpose() * model.basis();
        assert_relative_eq!(&utu, &DMatrix::identity(2, 2), epsilon = 1e-10);
        // Projecting a vector already in the subspace is the identity.
        let v = model.basis() * DVector::from_column_slice(&[0.7, -0.3]);
        let z = model.coeff_map() * &v;
        let back = model.basis() * z;
        assert_relative_eq!(&back, &v, epsilon = 1e-10);
    }

    #[test]
    fn bad_target_dimensions_are_rejected() {
        let s = SpdMatrix::identity(3);
        assert!(matches!(
            DimRedModel::fit(&s, &s, 0),
            Err(Error::BadTargetDim { .. })
        ));
        assert!(matches!(
            DimRedModel::fit_pca(&s, 4),
            Err(Error::BadTargetDim { .. })
        ));
    }
}
