//! Arc-length reparameterization with exact derivatives in arc length.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{CurveJet, ParametricCurve};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const PANEL_NODES: usize = 16;
const MIN_SPEED: f64 = 1e-10;

/// Cumulative arc length of a curve on Gauss–Legendre panels.
#[derive(Clone)]
pub struct ArcLengthMap {
    curve: Arc<dyn ParametricCurve>,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    nodes: (Vec<f64>, Vec<f64>),
}

fn panel_edges(breaks: &[f64], panels: usize) -> Vec<f64> {
    let mut cuts = vec![0.0];
    cuts.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0));
    cuts.push(1.0);
    let mut edges = vec![0.0];
    for w in cuts.windows(2) {
        let k = ((w[1] - w[0]) * panels as f64).ceil().max(1.0) as usize;
        for i in 1..=k {
            edges.push(w[0] + (w[1] - w[0]) * i as f64 / k as f64);
        }
    }
    edges
}

impl ArcLengthMap {
    pub fn new(curve: Arc<dyn ParametricCurve>) -> Result<Self> {
        let nodes = gauss_legendre(PANEL_NODES);
        let breaks = curve.breakpoints();
        let mut panels = 64;
        let mut previous: Option<Self> = None;
        loop {
            let edges = panel_edges(&breaks, panels);
            let integrals: Vec<f64> = edges
                .par_windows(2)
                .map(|w| panel_integral(curve.as_ref(), &nodes, w[0], w[1]))
                .collect::<Result<_>>()?;
            let mut cumulative = Vec::with_capacity(edges.len());
            let mut acc = 0.0;
            cumulative.push(0.0);
            for v in integrals {
                acc += v;
                cumulative.push(acc);
            }
            let map = ArcLengthMap { curve: curve.clone(), edges, cumulative, nodes: nodes.clone() };
            if let Some(prev) = previous {
                let change = (prev.length() - map.length()).abs();
                if change <= 1e-13 * map.length() {
                    return Ok(map);
                }
            }
            if panels >= 1 << 16 {
                return Err(Error::Numeric("arc length quadrature did not converge".into()));
            }
            previous = Some(map);
            panels *= 2;
        }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Arc length from 0 to t, for t in [0, 1].
    pub fn arc_length(&self, t: f64) -> Result<f64> {
        let k = self.edges.partition_point(|&e| e <= t).saturating_sub(1);
        let k = k.min(self.edges.len() - 2);
        Ok(self.cumulative[k] + panel_integral(self.curve.as_ref(), &self.nodes, self.edges[k], t)?)
    }

    /// Parameter at which the arc length equals `s`.
    pub fn parameter_at(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        let k = self.cumulative.partition_point(|&c| c <= s).saturating_sub(1);
        let k = k.min(self.edges.len() - 2);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let (ca, cb) = (self.cumulative[k], self.cumulative[k + 1]);
        let mut t = a + (b - a) * (s - ca) / (cb - ca);
        for _ in 0..60 {
            let f = ca + panel_integral(self.curve.as_ref(), &self.nodes, a, t)? - s;
            let step = f / self.curve.speed(t);
            t = (t - step).clamp(a, b);
            if step.abs() <= 1e-15 {
                return Ok(t);
            }
        }
        Ok(t)
    }
}

fn panel_integral(curve: &dyn ParametricCurve, nodes: &(Vec<f64>, Vec<f64>), a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let (xs, ws) = nodes;
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        let v = curve.speed(a + h * (x + 1.0));
        if v < MIN_SPEED {
            return Err(Error::Degenerate(format!("speed {v:e} near t = {a}")));
        }
        acc += w * v;
    }
    Ok(acc * h)
}

/// A closed curve sampled at equispaced arc length, with derivatives of orders 1 to 5.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitSpeedCurve {
    pub length: f64,
    /// arc-length coordinates s_i = i len / M
    pub arc: Vec<f64>,
    /// original parameter t_i in [0, 1)
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// `derivatives[k - 1][i]` is the k-th arc-length derivative at sample i
    pub derivatives: Vec<Vec<Vec<f64>>>,
}

impl UnitSpeedCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn step(&self) -> f64 {
        self.length / self.len() as f64
    }
}

/// Coordinates of x(t(s)) expanded in arc length s around the sample.
pub fn arclength_jet(curve: &dyn ParametricCurve, t: f64) -> Vec<CurveJet> {
    let x = curve.jet(t);
    let mut speed2 = CurveJet::constant(0.0);
    for c in &x {
        let d = c.differentiate();
        speed2 = speed2 + d * d;
    }
    let s_of_h = speed2.sqrt().integrate();
    let h_of_s = s_of_h.revert();
    x.iter().map(|c| h_of_s.compose(&c.c)).collect()
}

/// Resample a closed curve at `m` points equispaced in arc length.
pub fn arclength_reparameterize(curve: Arc<dyn ParametricCurve>, m: usize) -> Result<UnitSpeedCurve> {
    if m < 4 {
        return Err(Error::Resolution(format!("{m} samples per curve")));
    }
    if curve.derivative_order() < 1 {
        return Err(Error::domain("curve provides no derivatives"));
    }
    let map = ArcLengthMap::new(curve.clone())?;
    sample_with_map(&map, m)
}

pub(crate) fn sample_with_map(map: &ArcLengthMap, m: usize) -> Result<UnitSpeedCurve> {
    let length = map.length();
    let arc: Vec<f64> = (0..m).map(|i| length * i as f64 / m as f64).collect();
    let params: Vec<f64> = arc.par_iter().map(|&s| map.parameter_at(s)).collect::<Result<_>>()?;
    let jets: Vec<Vec<CurveJet>> = params
        .par_iter()
        .map(|&t| arclength_jet(map.curve.as_ref(), t))
        .collect();
    let points = jets.iter().map(|j| j.iter().map(|c| c.value()).collect()).collect();
    let derivatives = (1..=5)
        .map(|k| {
            jets.iter()
                .map(|j| j.iter().map(|c| c.derivative(k)).collect())
                .collect()
        })
        .collect();
    Ok(UnitSpeedCurve { length, arc, params, points, derivatives })
}

/// Sup norms M_1..M_5 of the arc-length derivatives and the curvature constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBounds {
    pub m: [f64; 5],
    pub kappa: f64,
    pub kappa_hat: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn derivative_bounds(curve: &UnitSpeedCurve) -> DerivativeBounds {
    let mut m = [0.0f64; 5];
    for (k, samples) in curve.derivatives.iter().enumerate() {
        m[k] = samples.iter().map(|v| norm(v)).fold(0.0, f64::max);
    }
    let kappa = curve.derivatives[1]
        .iter()
        .map(|v| {
            let a2: f64 = v.iter().map(|x| x * x).sum();
            (a2 - 1.0).max(0.0).sqrt()
        })
        .fold(0.0, f64::max);
    DerivativeBounds { m, kappa, kappa_hat: kappa_hat(kappa) }
}

/// max(kappa, 2 / pi).
pub fn kappa_hat(kappa: f64) -> f64 {
    kappa.max(std::f64::consts::FRAC_2_PI)
}
