//! Kernel matrices over a grid.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::grid::DiscretizedManifold;
use crate::error::{Error, Result};
use crate::geometry::chord_angle;
use crate::kernel::{skeleton, skeleton_at_pi, skeleton_dc, KernelParams, SkeletonTable};

/// Depth above which kernel entries come from a table.
pub const TABLE_DEPTH: usize = 1000;

/// Evaluates psi either directly or through a shared table.
#[derive(Debug, Clone)]
pub enum SkeletonEval {
    Direct(KernelParams),
    Table(Arc<SkeletonTable>),
}

impl SkeletonEval {
    pub fn for_params(params: KernelParams) -> Result<Self> {
        if params.depth() > TABLE_DEPTH {
            Ok(SkeletonEval::Table(SkeletonTable::shared(params, SkeletonTable::DEFAULT_GRID)?))
        } else {
            Ok(SkeletonEval::Direct(params))
        }
    }

    pub fn params(&self) -> KernelParams {
        match self {
            SkeletonEval::Direct(p) => *p,
            SkeletonEval::Table(t) => *t.params(),
        }
    }

    pub fn psi_pi(&self) -> f64 {
        match self {
            SkeletonEval::Direct(p) => skeleton_at_pi(p),
            SkeletonEval::Table(t) => t.psi_at_pi(),
        }
    }

    pub fn dc(&self, t: f64) -> f64 {
        match self {
            SkeletonEval::Direct(p) => skeleton_dc(t, p),
            SkeletonEval::Table(tab) => tab.eval(t),
        }
    }

    pub fn full(&self, t: f64) -> f64 {
        match self {
            SkeletonEval::Direct(p) => skeleton(t, p),
            SkeletonEval::Table(tab) => tab.eval_full(t),
        }
    }

    pub fn eval(&self, t: f64, dc: bool) -> f64 {
        if dc {
            self.dc(t)
        } else {
            self.full(t)
        }
    }
}

/// Dense symmetric matrix of psi (or psi°) at the angles between grid nodes.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub matrix: DMatrix<f64>,
    pub params: KernelParams,
    pub dc: bool,
}

fn symmetric_fill<F: Fn(usize, usize) -> f64 + Sync>(n: usize, entry: F) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| entry(i, j)).collect())
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            m[(i, i + off)] = v;
            m[(i + off, i)] = v;
        }
    }
    m
}

/// Entry (i, j) = psi(angle(x_i, x_j)), or psi° when `dc`; M+ block first.
pub fn assemble_kernel(grid: &DiscretizedManifold, params: &KernelParams, dc: bool) -> Result<KernelMatrix> {
    let eval = SkeletonEval::for_params(*params)?;
    Ok(assemble_with(grid, &eval, dc))
}

pub fn assemble_with(grid: &DiscretizedManifold, eval: &SkeletonEval, dc: bool) -> KernelMatrix {
    let matrix = symmetric_fill(grid.len(), |i, j| {
        eval.eval(chord_angle(&grid.points[i], &grid.points[j]), dc)
    });
    KernelMatrix { matrix, params: eval.params(), dc }
}

/// The integral operator of psi° against arc length, as a matrix acting on node values.
///
/// Row i approximates g -> sum_j A_ij g_j = int psi°(angle(x_i, x')) g(x') ds'.
#[derive(Debug, Clone)]
pub struct ArcOperator {
    pub matrix: DMatrix<f64>,
    pub params: KernelParams,
    pub psi_pi: f64,
    /// half-width in cells of the near-diagonal product-integration band; 0 when unused
    pub band: usize,
}

/// Default band for product integration.
pub const DEFAULT_BAND: usize = 32;

/// Builds the psi° operator with weights w_j.
///
/// With `band > 0` (arc-uniform grids only) each same-curve entry within `band` cells
/// adds the exact cell integral of psi°(|s_i - s'|) minus its midpoint value, which
/// resolves the narrow peak of psi° at large depth.
pub fn assemble_dc_operator(
    grid: &DiscretizedManifold,
    params: &KernelParams,
    band: usize,
) -> Result<ArcOperator> {
    if band > 0 && !grid.is_arc_uniform() {
        return Err(Error::Configuration(
            "product integration needs nodes equispaced in arc length".into(),
        ));
    }
    let eval = SkeletonEval::for_params(*params)?;
    let table = if band > 0 {
        Some(match &eval {
            SkeletonEval::Table(t) => t.clone(),
            SkeletonEval::Direct(p) => SkeletonTable::shared(*p, SkeletonTable::DEFAULT_GRID)?,
        })
    } else {
        None
    };
    let n = grid.len();
    let m = grid.per_curve;
    let mut matrix = symmetric_fill(n, |i, j| eval.dc(chord_angle(&grid.points[i], &grid.points[j])));
    for (j, mut col) in matrix.column_iter_mut().enumerate() {
        col *= grid.weights[j];
    }
    if let Some(table) = &table {
        let band = band.min((m - 1) / 2);
        for j in 0..n {
            let c = grid.component[j];
            let len = grid.lengths[c];
            let h = grid.weights[j];
            let kj = j - c * m;
            for off in 0..=2 * band {
                let i = c * m + (kj + m + off - band) % m;
                let mut delta = (grid.s[j] - grid.s[i]).rem_euclid(len);
                if delta > 0.5 * len {
                    delta -= len;
                }
                let cell = table.integral_abs(delta - 0.5 * h, delta + 0.5 * h);
                matrix[(i, j)] += cell - h * table.eval(delta.abs());
            }
        }
    }
    Ok(ArcOperator { matrix, params: *params, psi_pi: eval.psi_pi(), band })
}

impl ArcOperator {
    /// Theta°[g] at the nodes.
    pub fn apply_dc(&self, g: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(g);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// Theta[g] = Theta°[g] + psi(pi) * integral of g.
    pub fn apply_full(&self, g: &[f64], grid: &DiscretizedManifold) -> Vec<f64> {
        let mass: f64 = g.iter().zip(&grid.weights).map(|(a, w)| a * w).sum();
        self.apply_dc(g).into_iter().map(|v| v + self.psi_pi * mass).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::grid::{discretize, Weighting};
    use crate::geometry::{builtin_geometry, BuiltinName, BuiltinOptions};

    fn grid(m: usize, mode: Weighting) -> DiscretizedManifold {
        let inst = builtin_geometry(BuiltinName::TwoCircles, &BuiltinOptions { samples: 64, ..Default::default() })
            .unwrap();
        discretize(&inst, m, mode).unwrap()
    }

    #[test]
    fn diagonal_and_symmetry() {
        let g = grid(20, Weighting::PaperUniformT);
        let p = KernelParams::new(6, 2.0).unwrap();
        let k = assemble_kernel(&g, &p, false).unwrap();
        for i in 0..g.len() {
            assert!((k.matrix[(i, i)] - 6.0).abs() < 1e-12);
            for j in 0..g.len() {
                assert_eq!(k.matrix[(i, j)], k.matrix[(j, i)]);
            }
        }
        let a = chord_angle(&g.points[3], &g.points[27]);
        assert!((k.matrix[(3, 27)] - skeleton(a, &p)).abs() < 1e-12);
        let kd = assemble_kernel(&g, &p, true).unwrap();
        assert!((k.matrix[(3, 27)] - kd.matrix[(3, 27)] - skeleton_at_pi(&p)).abs() < 1e-12);
    }

    #[test]
    fn corrected_operator_keeps_smooth_action() {
        // at small depth the kernel is smooth on the grid scale, so the correction is tiny
        let g = grid(256, Weighting::Riemannian);
        let p = KernelParams::new(8, 2.0).unwrap();
        let plain = assemble_dc_operator(&g, &p, 0).unwrap();
        let fixed = assemble_dc_operator(&g, &p, 8).unwrap();
        let ones = vec![1.0; g.len()];
        let a = plain.apply_dc(&ones);
        let b = fixed.apply_dc(&ones);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-3 * x.abs(), "{x} {y}");
        }
        assert!(assemble_dc_operator(&grid(32, Weighting::PaperUniformT), &p, 4).is_err());
    }
}
