//! Low-frequency Fourier subspace and the invariant operator.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::assemble::SkeletonEval;
use super::grid::DiscretizedManifold;
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::quadrature::integrate;

/// Scale-dependent parameters of the subspace S_eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpec {
    pub eps: f64,
    /// a_eps = (1 - eps)^3 (1 - eps / 12)
    pub a: f64,
    /// r_eps = 6 pi L^(-a / (a + 1))
    pub r: f64,
    /// highest frequency per curve
    pub k: [usize; 2],
    pub lengths: [f64; 2],
}

pub fn subspace_exponent(eps: f64) -> f64 {
    (1.0 - eps).powi(3) * (1.0 - eps / 12.0)
}

pub fn local_radius(eps: f64, depth: usize) -> f64 {
    let a = subspace_exponent(eps);
    6.0 * PI * (depth as f64).powf(-a / (a + 1.0))
}

/// Smallest depth with r_eps <= pi.
pub fn min_depth_for_scale(eps: f64) -> f64 {
    let a = subspace_exponent(eps);
    6f64.powf((a + 1.0) / a)
}

impl SubspaceSpec {
    pub fn new(eps: f64, params: &KernelParams, lengths: [f64; 2]) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(format!("scale {eps} outside (0, 1)")));
        }
        let a = subspace_exponent(eps);
        let r = local_radius(eps, params.depth());
        if r > PI {
            return Err(Error::Configuration(format!(
                "r_eps = {r:.4} exceeds pi at eps = {eps}, L = {}; this scale needs L >= {:.4e}",
                params.depth(),
                min_depth_for_scale(eps)
            )));
        }
        let k = lengths.map(|len| (eps.sqrt() * len / (TAU * r)).floor() as usize);
        Ok(SubspaceSpec { eps, a, r, k, lengths })
    }

    pub fn dimension(&self) -> usize {
        self.k.iter().map(|k| 2 * k + 1).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Constant,
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierMode {
    pub component: usize,
    pub frequency: usize,
    pub kind: ModeKind,
}

/// Real orthonormal Fourier basis of S_eps sampled on a grid, with the invariant
/// operator eigenvalue of each mode.
#[derive(Debug, Clone)]
pub struct FourierSubspace {
    pub spec: SubspaceSpec,
    pub modes: Vec<FourierMode>,
    /// columns orthonormal in the arc-length weighted inner product
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    weights: DVector<f64>,
}

/// Samples cos/sin modes up to K on each curve and orthonormalizes them against arc length.
pub fn fourier_subspace(grid: &DiscretizedManifold, eps: f64, params: &KernelParams) -> Result<FourierSubspace> {
    let spec = SubspaceSpec::new(eps, params, grid.lengths)?;
    let eigs = [
        invariant_operator_eigs(eps, params, grid.lengths[0])?,
        invariant_operator_eigs(eps, params, grid.lengths[1])?,
    ];
    build_subspace(grid, spec, &eigs)
}

pub(crate) fn build_subspace(
    grid: &DiscretizedManifold,
    spec: SubspaceSpec,
    eigs: &[Vec<f64>; 2],
) -> Result<FourierSubspace> {
    let n = grid.len();
    let mut modes = Vec::new();
    let mut eigenvalues = Vec::new();
    for c in 0..2 {
        modes.push(FourierMode { component: c, frequency: 0, kind: ModeKind::Constant });
        eigenvalues.push(eigs[c][0]);
        for k in 1..=spec.k[c] {
            for kind in [ModeKind::Cos, ModeKind::Sin] {
                modes.push(FourierMode { component: c, frequency: k, kind });
                eigenvalues.push(eigs[c][k]);
            }
        }
    }
    let weights = DVector::from_column_slice(&grid.weights);
    let mut basis = DMatrix::zeros(n, modes.len());
    for (col, mode) in modes.iter().enumerate() {
        let len = grid.lengths[mode.component];
        let amp = if mode.kind == ModeKind::Constant { 1.0 } else { 2f64.sqrt() };
        for i in grid.range(mode.component) {
            let phase = TAU * mode.frequency as f64 * grid.s[i] / len;
            let v = match mode.kind {
                ModeKind::Constant => 1.0,
                ModeKind::Cos => phase.cos(),
                ModeKind::Sin => phase.sin(),
            };
            basis[(i, col)] = amp * v / len.sqrt();
        }
    }
    // two passes of modified Gram-Schmidt in the weighted inner product
    for _ in 0..2 {
        for j in 0..basis.ncols() {
            for p in 0..j {
                let ip = weighted_dot(&basis.column(p), &basis.column(j), &weights);
                let prev = basis.column(p).into_owned();
                basis.column_mut(j).axpy(-ip, &prev, 1.0);
            }
            let nrm = weighted_dot(&basis.column(j), &basis.column(j), &weights).sqrt();
            if nrm < 1e-8 {
                return Err(Error::Resolution(format!(
                    "Fourier mode {:?} is not resolved by the grid",
                    modes[j]
                )));
            }
            basis.column_mut(j).scale_mut(1.0 / nrm);
        }
    }
    Ok(FourierSubspace { spec, modes, basis, eigenvalues, weights })
}

fn weighted_dot(
    a: &nalgebra::DVectorView<f64>,
    b: &nalgebra::DVectorView<f64>,
    w: &DVector<f64>,
) -> f64 {
    a.iter().zip(b.iter()).zip(w.iter()).map(|((x, y), w)| x * y * w).sum()
}

impl FourierSubspace {
    pub fn dimension(&self) -> usize {
        self.modes.len()
    }

    /// Coefficients B^T W v.
    pub fn coefficients(&self, v: &[f64]) -> DVector<f64> {
        let wv = DVector::from_iterator(v.len(), v.iter().zip(self.weights.iter()).map(|(a, w)| a * w));
        self.basis.transpose() * wv
    }

    pub fn synthesize(&self, c: &DVector<f64>) -> Vec<f64> {
        (&self.basis * c).as_slice().to_vec()
    }

    /// Orthogonal projection onto S_eps.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.synthesize(&self.coefficients(v))
    }

    /// Dense projector matrix B B^T W.
    pub fn projector(&self) -> DMatrix<f64> {
        let mut bw = self.basis.transpose();
        for (j, mut col) in bw.column_iter_mut().enumerate() {
            col *= self.weights[j];
        }
        &self.basis * bw
    }

    /// Weighted Gram matrix of the basis (the identity up to rounding).
    pub fn gram(&self) -> DMatrix<f64> {
        let mut wb = self.basis.clone();
        for (i, mut row) in wb.row_iter_mut().enumerate() {
            row *= self.weights[i];
        }
        self.basis.transpose() * wb
    }
}

/// m_k = int_{-r}^{r} psi°(|s|) cos(2 pi k s / len) ds for k = 0..=K_eps.
pub fn invariant_operator_eigs(eps: f64, params: &KernelParams, len: f64) -> Result<Vec<f64>> {
    let spec = SubspaceSpec::new(eps, params, [len, len])?;
    if spec.r > 0.5 * len {
        return Err(Error::Configuration(format!(
            "r_eps = {:.4} exceeds half the curve length {:.4}",
            spec.r,
            0.5 * len
        )));
    }
    let eval = SkeletonEval::for_params(*params)?;
    eigenvalues_with(&eval, spec.r, len, spec.k[0])
}

pub(crate) fn eigenvalues_with(eval: &SkeletonEval, r: f64, len: f64, kmax: usize) -> Result<Vec<f64>> {
    let params = eval.params();
    let depth = params.depth() as f64;
    let tol = 1e-9 * params.width() * depth.ln().max(1.0);
    // breakpoints follow the peak of width ~3 pi / L
    let mut breaks = vec![0.0];
    let mut b = 3.0 * PI / depth;
    while b < r {
        breaks.push(b);
        b *= 4.0;
    }
    breaks.push(r);
    (0..=kmax)
        .map(|k| {
            let w = TAU * k as f64 / len;
            let half = integrate(|s| eval.dc(s) * (w * s).cos(), &breaks, 0.5 * tol)?;
            Ok(2.0 * half)
        })
        .collect()
}
