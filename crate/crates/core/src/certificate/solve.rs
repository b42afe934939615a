//! Certificates and the pseudoinverse solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use super::assemble::KernelMatrix;
use super::grid::{weighted_norm, DiscretizedManifold};
use crate::error::{Error, Result};

/// The measure a certificate is expressed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// the data probability measure mu
    Data,
    /// arc length on both curves
    ArcLength,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub values: Vec<f64>,
    pub norm: f64,
    /// operator applied to the certificate, minus the target
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub method: String,
    pub rank: Option<usize>,
    pub tolerance: f64,
    pub measure: Measure,
}

impl Certificate {
    /// The same certificate against the data measure: g_mu = g / rho.
    pub fn to_data_measure(&self, grid: &DiscretizedManifold) -> Certificate {
        if self.measure == Measure::Data {
            return self.clone();
        }
        let values: Vec<f64> = self.values.iter().zip(&grid.density).map(|(g, r)| g / r).collect();
        Certificate {
            norm: weighted_norm(&values, grid),
            residual_norm: weighted_norm(&self.residual, grid),
            values,
            residual: self.residual.clone(),
            method: self.method.clone(),
            rank: self.rank,
            tolerance: self.tolerance,
            measure: Measure::Data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Least-squares certificate g = pinv(K diag(mu)) zeta.
///
/// Singular values below `rank_tol * sigma_max` are dropped; the default
/// tolerance is machine epsilon times the matrix dimension.
pub fn solve_certificate_pinv(
    kernel: &KernelMatrix,
    grid: &DiscretizedManifold,
    zeta: &[f64],
    rank_tol: Option<f64>,
) -> Result<Certificate> {
    let n = grid.len();
    if zeta.len() != n || kernel.matrix.nrows() != n {
        return Err(Error::domain("target, kernel and grid sizes differ"));
    }
    let mu = grid.mu_weights();
    let tol = rank_tol.unwrap_or(f64::EPSILON * n as f64);
    let mut kw = kernel.matrix.clone();
    for (j, mut col) in kw.column_iter_mut().enumerate() {
        col *= mu[j];
    }
    let z = DVector::from_column_slice(zeta);
    let uniform = mu.iter().all(|w| (w - mu[0]).abs() <= 1e-15 * mu[0]);
    let (g, rank) = if uniform {
        pinv_symmetric(&kw, &z, tol)?
    } else {
        pinv_general(kw.clone(), &z, tol)?
    };
    let residual: Vec<f64> = (&kw * &g - &z).as_slice().to_vec();
    let values = g.as_slice().to_vec();
    Ok(Certificate {
        norm: weighted_norm(&values, grid),
        residual_norm: weighted_norm(&residual, grid),
        values,
        residual,
        method: "pseudoinverse".into(),
        rank: Some(rank),
        tolerance: tol,
        measure: Measure::Data,
    })
}

fn pinv_symmetric(a: &DMatrix<f64>, z: &DVector<f64>, tol: f64) -> Result<(DVector<f64>, usize)> {
    let eig = SymmetricEigen::new(a.clone());
    let smax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if smax == 0.0 {
        return Err(Error::Degenerate("kernel matrix is zero".into()));
    }
    let cut = tol * smax;
    let coeffs = eig.eigenvectors.transpose() * z;
    let mut scaled = DVector::zeros(coeffs.len());
    let mut rank = 0;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > cut {
            scaled[k] = coeffs[k] / lam;
            rank += 1;
        }
    }
    Ok((&eig.eigenvectors * scaled, rank))
}

fn pinv_general(a: DMatrix<f64>, z: &DVector<f64>, tol: f64) -> Result<(DVector<f64>, usize)> {
    let svd = SVD::new(a, true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Err(Error::Degenerate("kernel matrix is zero".into()));
    }
    let cut = tol * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let g = svd
        .solve(z, cut)
        .map_err(|e| Error::Numeric(format!("pseudoinverse failed: {e}")))?;
    Ok((g, rank))
}
