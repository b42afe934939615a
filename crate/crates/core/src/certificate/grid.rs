//! Quadrature grids on the two curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TwoCurveInstance;

/// How nodes and weights are placed on each curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Nodes uniform in the curve parameter; each carries mass 1/(2M).
    PaperUniformT,
    /// Nodes uniform in arc length with the uniform probability density on each curve.
    Riemannian,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper_uniform_t" => Ok(Weighting::PaperUniformT),
            "riemannian" => Ok(Weighting::Riemannian),
            other => Err(Error::domain(format!(
                "unknown weighting '{other}'; expected paper_uniform_t or riemannian"
            ))),
        }
    }
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::PaperUniformT => "paper_uniform_t",
            Weighting::Riemannian => "riemannian",
        })
    }
}

/// Nodes on M+ followed by nodes on M-.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizedManifold {
    pub mode: Weighting,
    /// nodes per curve
    pub per_curve: usize,
    pub lengths: [f64; 2],
    pub component: Vec<usize>,
    pub labels: Vec<f64>,
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// |x'(t)| for the unit-period parameter
    pub speeds: Vec<f64>,
    /// arc-length quadrature weights
    pub weights: Vec<f64>,
    /// probability density with respect to arc length at each node
    pub density: Vec<f64>,
}

impl DiscretizedManifold {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Probability weights w_i rho_i.
    pub fn mu_weights(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.density).map(|(w, r)| w * r).collect()
    }

    /// Index range of a component.
    pub fn range(&self, c: usize) -> std::ops::Range<usize> {
        c * self.per_curve..(c + 1) * self.per_curve
    }

    /// True when nodes are equispaced in arc length on both curves.
    pub fn is_arc_uniform(&self) -> bool {
        self.mode == Weighting::Riemannian
    }
}

/// Places `m` nodes on each curve.
pub fn discretize(instance: &TwoCurveInstance, m: usize, mode: Weighting) -> Result<DiscretizedManifold> {
    if m < 16 {
        return Err(Error::Resolution(format!("{m} nodes per curve; at least 16 are needed")));
    }
    let mut grid = DiscretizedManifold {
        mode,
        per_curve: m,
        lengths: [instance.plus.length, instance.minus.length],
        component: Vec::with_capacity(2 * m),
        labels: Vec::with_capacity(2 * m),
        t: Vec::with_capacity(2 * m),
        s: Vec::with_capacity(2 * m),
        points: Vec::with_capacity(2 * m),
        speeds: Vec::with_capacity(2 * m),
        weights: Vec::with_capacity(2 * m),
        density: Vec::with_capacity(2 * m),
    };
    for c in 0..2 {
        let curve = instance.source(c);
        let map = instance.arc_length_map(c);
        let len = map.length();
        let nodes: Vec<(f64, f64)> = (0..m)
            .into_par_iter()
            .map(|i| match mode {
                Weighting::PaperUniformT => {
                    let t = i as f64 / m as f64;
                    Ok((t, map.arc_length(t)?))
                }
                Weighting::Riemannian => {
                    let s = len * i as f64 / m as f64;
                    Ok((map.parameter_at(s)?, s))
                }
            })
            .collect::<Result<_>>()?;
        for (t, s) in nodes {
            let speed = curve.speed(t);
            grid.component.push(c);
            grid.labels.push(if c == 0 { 1.0 } else { -1.0 });
            grid.t.push(t);
            grid.s.push(s);
            grid.points.push(curve.position(t));
            grid.speeds.push(speed);
            match mode {
                Weighting::PaperUniformT => {
                    grid.weights.push(speed / m as f64);
                    grid.density.push(0.5 / speed);
                }
                Weighting::Riemannian => {
                    grid.weights.push(len / m as f64);
                    grid.density.push(0.5 / len);
                }
            }
        }
    }
    Ok(grid)
}

/// sqrt(sum_i w_i rho_i v_i^2), the L2 norm of the data measure.
pub fn weighted_norm(values: &[f64], grid: &DiscretizedManifold) -> f64 {
    assert_eq!(values.len(), grid.len(), "length mismatch");
    values
        .iter()
        .zip(grid.weights.iter().zip(&grid.density))
        .map(|(v, (w, r))| w * r * v * v)
        .sum::<f64>()
        .sqrt()
}

/// sqrt(sum_i w_i v_i^2), the L2 norm of arc length.
pub fn arc_norm(values: &[f64], grid: &DiscretizedManifold) -> f64 {
    values
        .iter()
        .zip(&grid.weights)
        .map(|(v, w)| w * v * v)
        .sum::<f64>()
        .sqrt()
}
