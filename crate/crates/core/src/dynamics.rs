//! Nominal kernel gradient descent on a grid and classifier separation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::certificate::{weighted_norm, DiscretizedManifold, KernelMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMethod {
    /// exact powers through the eigendecomposition of D^1/2 K D^1/2
    Eigen,
    /// repeated application of Id - tau K D
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRecord {
    pub iter: usize,
    pub error_norm: f64,
    pub margin: f64,
    pub separated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<DynamicsRecord>,
    pub final_error: Vec<f64>,
    pub lambda_max: f64,
    pub tau: f64,
}

impl Trajectory {
    /// First iteration at which every node is classified correctly.
    pub fn first_separated(&self) -> Option<usize> {
        self.records.iter().find(|r| r.separated).map(|r| r.iter)
    }

    pub fn error_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error_norm).collect()
    }
}

/// Spectral data of the weighted operator K D.
pub struct WeightedSpectrum {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    sqrt_w: DVector<f64>,
}

impl WeightedSpectrum {
    pub fn new(kernel: &KernelMatrix, grid: &DiscretizedManifold) -> Result<Self> {
        let n = grid.len();
        if kernel.matrix.nrows() != n {
            return Err(Error::domain("kernel and grid sizes differ"));
        }
        let sqrt_w = DVector::from_iterator(n, grid.mu_weights().into_iter().map(f64::sqrt));
        let mut s: DMatrix<f64> = kernel.matrix.clone();
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] *= sqrt_w[i] * sqrt_w[j];
            }
        }
        let s = 0.5 * (&s + s.transpose());
        Ok(WeightedSpectrum { eig: SymmetricEigen::new(s), sqrt_w })
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig.eigenvalues.max()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eig.eigenvalues
    }

    /// zeta_k = (Id - tau K D)^k zeta_0 in one step.
    pub fn evolve(&self, zeta0: &[f64], tau: f64, k: u64) -> Vec<f64> {
        let v = &self.eig.eigenvectors;
        let scaled = DVector::from_iterator(zeta0.len(), zeta0.iter().zip(self.sqrt_w.iter()).map(|(a, s)| a * s));
        let mut c = v.transpose() * scaled;
        for (ci, l) in c.iter_mut().zip(self.eig.eigenvalues.iter()) {
            *ci *= (1.0 - tau * l).powf(k as f64);
        }
        let y = v * c;
        y.iter().zip(self.sqrt_w.iter()).map(|(a, s)| a / s).collect()
    }

    /// Eigenvector of K D for the i-th eigenvalue (in the order of `eigenvalues`).
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eig.eigenvectors.column(i).iter().zip(self.sqrt_w.iter()).map(|(v, s)| v / s).collect()
    }
}

/// Largest eigenvalue of the weighted operator.
pub fn lambda_max(kernel: &KernelMatrix, grid: &DiscretizedManifold) -> Result<f64> {
    Ok(WeightedSpectrum::new(kernel, grid)?.lambda_max())
}

/// Options for `nominal_evolve`.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<'a> {
    pub method: EvolveMethod,
    /// reject steps with tau >= 2 / lambda_max
    pub monotone: bool,
    /// target f*; margins use f_k = f* + zeta_k
    pub target: Option<&'a [f64]>,
}

impl Default for EvolveOptions<'_> {
    fn default() -> Self {
        EvolveOptions { method: EvolveMethod::Eigen, monotone: true, target: None }
    }
}

/// zeta_{k+1} = zeta_k - tau K D zeta_k for `iterations` steps.
pub fn nominal_evolve(
    grid: &DiscretizedManifold,
    kernel: &KernelMatrix,
    zeta0: &[f64],
    tau: f64,
    iterations: usize,
    options: EvolveOptions,
) -> Result<Trajectory> {
    let n = grid.len();
    if zeta0.len() != n {
        return Err(Error::domain("initial error length does not match the grid"));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("step size {tau} must be nonnegative")));
    }
    let spectrum = WeightedSpectrum::new(kernel, grid)?;
    let lmax = spectrum.lambda_max();
    if options.monotone && tau * lmax >= 2.0 {
        return Err(Error::Configuration(format!(
            "step size {tau} is not below 2 / lambda_max = {}",
            2.0 / lmax
        )));
    }
    let labels = options.target;
    let record = |iter: usize, z: &[f64]| {
        let (separated, margin) = match labels {
            Some(fstar) => {
                let f: Vec<f64> = fstar.iter().zip(z).map(|(a, b)| a + b).collect();
                separation_check(&f, &grid.labels)
            }
            None => (false, f64::NAN),
        };
        DynamicsRecord { iter, error_norm: weighted_norm(z, grid), margin, separated }
    };
    let mut records = Vec::with_capacity(iterations + 1);
    records.push(record(0, zeta0));
    let final_error = match options.method {
        EvolveMethod::Explicit => {
            let mu = grid.mu_weights();
            let mut z = DVector::from_column_slice(zeta0);
            for k in 1..=iterations {
                let wz = DVector::from_iterator(n, z.iter().zip(&mu).map(|(a, w)| a * w));
                z -= tau * (&kernel.matrix * wz);
                records.push(record(k, z.as_slice()));
            }
            z.as_slice().to_vec()
        }
        EvolveMethod::Eigen => {
            let v = &spectrum.eig.eigenvectors;
            let scaled = DVector::from_iterator(n, zeta0.iter().zip(spectrum.sqrt_w.iter()).map(|(a, s)| a * s));
            let c0 = v.transpose() * scaled;
            let factors: Vec<f64> = spectrum.eig.eigenvalues.iter().map(|l| 1.0 - tau * l).collect();
            let mut ck = c0.clone();
            let mut z = zeta0.to_vec();
            for k in 1..=iterations {
                for (i, c) in ck.iter_mut().enumerate() {
                    *c = c0[i] * factors[i].powi(k as i32);
                }
                let y = v * &ck;
                z = y.iter().zip(spectrum.sqrt_w.iter()).map(|(a, s)| a / s).collect();
                records.push(record(k, &z));
            }
            z
        }
    };
    Ok(Trajectory { records, final_error, lambda_max: lmax, tau })
}

/// (sign(f_i) = label_i everywhere, min_i label_i f_i).
pub fn separation_check(f: &[f64], labels: &[f64]) -> (bool, f64) {
    assert_eq!(f.len(), labels.len(), "length mismatch");
    let margin = f.iter().zip(labels).map(|(a, l)| a * l).fold(f64::INFINITY, f64::min);
    let separated = f.iter().zip(labels).all(|(a, l)| a.signum() == l.signum() && *a != 0.0);
    (separated, margin)
}

/// floor(L^(39/44) / (n tau)).
pub fn theorem_schedule(depth: f64, width: f64, tau: f64) -> Result<u64> {
    if !(depth > 0.0 && width > 0.0 && tau > 0.0) {
        return Err(Error::domain("depth, width and step size must be positive"));
    }
    let x = (39.0 / 44.0 * depth.ln()).exp() / (width * tau);
    let nearest = x.round();
    // snap values within rounding of an integer (exact powers)
    if (x - nearest).abs() <= 4.0 * f64::EPSILON * x.max(1.0) {
        return Ok(nearest as u64);
    }
    Ok(x.floor() as u64)
}
