//! Certificates built on the low-frequency subspace: Neumann series and the DC combination.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::assemble::{assemble_dc_operator, ArcOperator};
use super::fourier::{fourier_subspace, FourierSubspace};
use super::grid::{arc_norm, DiscretizedManifold};
use super::solve::{Certificate, Measure};
use crate::error::{Error, Result};
use crate::kernel::KernelParams;

/// Result of the Neumann construction on S_eps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeumannOutcome {
    /// spectral norm of M^-1 (P Theta° P - M) on S_eps
    pub contraction: f64,
    pub diverged: bool,
    pub terms: usize,
    /// present when the series converges
    pub certificate: Option<Certificate>,
    /// (P Theta° P)^-1 zeta by a direct solve on S_eps
    pub direct: Vec<f64>,
    /// |P Theta°[g] - zeta| in arc length
    pub projected_residual: f64,
    pub dimension: usize,
}

/// Result of the DC plus density combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcOutcome {
    pub certificate: Certificate,
    pub alpha: f64,
    /// integral of the constant-target certificate g_1
    pub g1_mass: f64,
    /// |Theta[h] - zeta| after each round, starting with round 0
    pub residual_history: Vec<f64>,
    pub rounds: usize,
}

/// Operators on one arc-uniform grid shared by all constructive solves.
pub struct ConstructiveSolver<'a> {
    grid: &'a DiscretizedManifold,
    params: KernelParams,
    op: ArcOperator,
}

impl<'a> ConstructiveSolver<'a> {
    /// `band` cells of product integration around the diagonal (0 for plain point evaluation).
    pub fn new(grid: &'a DiscretizedManifold, params: KernelParams, band: usize) -> Result<Self> {
        let op = assemble_dc_operator(grid, &params, band)?;
        Ok(ConstructiveSolver { grid, params, op })
    }

    pub fn from_operator(grid: &'a DiscretizedManifold, op: ArcOperator) -> Self {
        ConstructiveSolver { grid, params: op.params, op }
    }

    pub fn operator(&self) -> &ArcOperator {
        &self.op
    }

    /// Replaces psi(pi); zero gives a kernel without a DC component.
    pub fn with_psi_pi(mut self, value: f64) -> Self {
        self.op.psi_pi = value;
        self
    }

    pub fn subspace(&self, eps: f64) -> Result<FourierSubspace> {
        fourier_subspace(self.grid, eps, &self.params)
    }

    /// Neumann series for P Theta°[g] = zeta with zeta in S_eps.
    pub fn neumann(&self, zeta: &[f64], eps: f64, max_terms: usize, tol: f64) -> Result<NeumannOutcome> {
        let sub = self.subspace(eps)?;
        self.neumann_in(&sub, zeta, max_terms, tol)
    }

    /// Restricted operator B^T W Theta° B.
    pub fn restricted(&self, sub: &FourierSubspace) -> DMatrix<f64> {
        let ab = &self.op.matrix * &sub.basis;
        let mut wab = ab;
        for (i, mut row) in wab.row_iter_mut().enumerate() {
            row *= self.grid.weights[i];
        }
        sub.basis.transpose() * wab
    }

    pub fn neumann_in(
        &self,
        sub: &FourierSubspace,
        zeta: &[f64],
        max_terms: usize,
        tol: f64,
    ) -> Result<NeumannOutcome> {
        if zeta.len() != self.grid.len() {
            return Err(Error::domain("target length does not match the grid"));
        }
        let z = sub.coefficients(zeta);
        let zn = arc_norm(zeta, self.grid);
        let outside: Vec<f64> = sub.project(zeta).iter().zip(zeta).map(|(p, v)| v - p).collect();
        if arc_norm(&outside, self.grid) > 1e-8 * zn.max(f64::MIN_POSITIVE) {
            return Err(Error::domain("target does not lie in the low-frequency subspace"));
        }
        let a = self.restricted(sub);
        let d = DVector::from_column_slice(&sub.eigenvalues);
        if d.iter().any(|&m| m <= 0.0) {
            return Err(Error::Numeric("invariant operator has a nonpositive eigenvalue".into()));
        }
        let mut n = a.clone();
        for i in 0..n.nrows() {
            n[(i, i)] -= d[i];
            let inv = 1.0 / d[i];
            n.row_mut(i).scale_mut(inv);
        }
        let contraction = n.clone().svd(false, false).singular_values.max();
        let direct_c = a
            .clone()
            .lu()
            .solve(&z)
            .ok_or_else(|| Error::Numeric("restricted operator is singular".into()))?;
        let direct = sub.synthesize(&direct_c);
        let dim = sub.dimension();
        if contraction >= 1.0 {
            return Ok(NeumannOutcome {
                contraction,
                diverged: true,
                terms: 0,
                certificate: None,
                direct,
                projected_residual: f64::NAN,
                dimension: dim,
            });
        }
        let mut term = z.component_div(&d);
        let mut total = term.clone();
        let zc = z.norm();
        let mut terms = 1;
        while terms < max_terms && term.norm() > tol * zc {
            term = -(&n * &term);
            total += &term;
            terms += 1;
        }
        let g = sub.synthesize(&total);
        let applied = self.op.apply_dc(&g);
        let projected = sub.project(&applied);
        let residual: Vec<f64> = projected.iter().zip(zeta).map(|(a, b)| a - b).collect();
        let projected_residual = arc_norm(&residual, self.grid);
        let certificate = Certificate {
            norm: arc_norm(&g, self.grid),
            residual_norm: projected_residual,
            values: g,
            residual,
            method: "neumann".into(),
            rank: Some(dim),
            tolerance: tol,
            measure: Measure::ArcLength,
        };
        Ok(NeumannOutcome {
            contraction,
            diverged: false,
            terms,
            certificate: Some(certificate),
            direct,
            projected_residual,
            dimension: dim,
        })
    }

    /// h = g + alpha g_1 with iterative refinement of the target on S_eps0.
    #[allow(clippy::too_many_arguments)]
    pub fn dc_density(
        &self,
        zeta: &[f64],
        eps0: f64,
        eps1: f64,
        refine_steps: usize,
        max_terms: usize,
        tol: f64,
    ) -> Result<DcOutcome> {
        let sub0 = self.subspace(eps0)?;
        let sub1 = self.subspace(eps1)?;
        let ones = vec![1.0; self.grid.len()];
        let g1 = self.solve_or_diverge(&sub1, &ones, max_terms, tol, eps1)?;
        let g1_mass = self.mass(&g1);
        let psi_pi = self.op.psi_pi;

        let mut target = sub0.project(zeta);
        let mut h = vec![0.0; zeta.len()];
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut history = Vec::new();
        let mut alpha0 = 0.0;
        for round in 0..=refine_steps {
            let g = self.solve_or_diverge(&sub0, &target, max_terms, tol, eps0)?;
            let alpha = -psi_pi * self.mass(&g) / (psi_pi * g1_mass + 1.0);
            if round == 0 {
                alpha0 = alpha;
            }
            for i in 0..h.len() {
                h[i] += g[i] + alpha * g1[i];
            }
            let applied = self.op.apply_full(&h, self.grid);
            let residual: Vec<f64> = applied.iter().zip(zeta).map(|(a, b)| a - b).collect();
            let rnorm = arc_norm(&residual, self.grid);
            if let Some((_, prev)) = &best {
                if rnorm > *prev {
                    break;
                }
            }
            history.push(rnorm);
            best = Some((h.clone(), rnorm));
            // next target: -P_S(Theta[h_(i)] - zeta_(i)) for this round's increment
            let inc: Vec<f64> = g.iter().zip(&g1).map(|(a, b)| a + alpha * b).collect();
            let applied_inc = self.op.apply_full(&inc, self.grid);
            let diff: Vec<f64> = applied_inc.iter().zip(&target).map(|(a, b)| a - b).collect();
            target = sub0.project(&diff).into_iter().map(|v| -v).collect();
        }
        let (values, _) = best.expect("round 0 always recorded");
        let applied = self.op.apply_full(&values, self.grid);
        let residual: Vec<f64> = applied.iter().zip(zeta).map(|(a, b)| a - b).collect();
        let rounds = history.len() - 1;
        Ok(DcOutcome {
            certificate: Certificate {
                norm: arc_norm(&values, self.grid),
                residual_norm: arc_norm(&residual, self.grid),
                values,
                residual,
                method: "dc_density".into(),
                rank: None,
                tolerance: tol,
                measure: Measure::ArcLength,
            },
            alpha: alpha0,
            g1_mass,
            residual_history: history,
            rounds,
        })
    }

    fn mass(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.grid.weights).map(|(a, w)| a * w).sum()
    }

    fn solve_or_diverge(
        &self,
        sub: &FourierSubspace,
        zeta: &[f64],
        max_terms: usize,
        tol: f64,
        eps: f64,
    ) -> Result<Vec<f64>> {
        let out = self.neumann_in(sub, zeta, max_terms, tol)?;
        match out.certificate {
            Some(c) => Ok(c.values),
            None => Err(Error::Numeric(format!(
                "Neumann series diverges at eps = {eps}: contraction {:.4}",
                out.contraction
            ))),
        }
    }
}
