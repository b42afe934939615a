//! Closed parametric curves on the sphere, evaluated as Taylor jets.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Jets carry derivatives through order five.
pub type CurveJet = Jet<6>;

/// A closed curve `t in [0, 1) -> S^{D-1}`, periodic with period one.
pub trait ParametricCurve: Send + Sync {
    fn dim(&self) -> usize;

    /// Coordinates expanded around `t`.
    fn jet(&self, t: f64) -> Vec<CurveJet>;

    /// Highest derivative order available exactly.
    fn derivative_order(&self) -> usize {
        5
    }

    /// Parameter values in (0, 1) where derivatives of order two or more may jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn position(&self, t: f64) -> Vec<f64> {
        self.jet(t).iter().map(|j| j.value()).collect()
    }

    /// Speed |x'(t)| with respect to the unit-period parameter.
    fn speed(&self, t: f64) -> f64 {
        self.jet(t)
            .iter()
            .map(|j| j.c[1] * j.c[1])
            .sum::<f64>()
            .sqrt()
    }
}

type JetMap = dyn Fn(CurveJet) -> Vec<CurveJet> + Send + Sync;

/// A curve given by a closed-form map of the parameter.
#[derive(Clone)]
pub struct AnalyticCurve {
    dim: usize,
    map: Arc<JetMap>,
    breakpoints: Vec<f64>,
}

impl AnalyticCurve {
    /// `map` receives the jet of `t` reduced to [0, 1).
    pub fn new<F>(dim: usize, map: F) -> Self
    where
        F: Fn(CurveJet) -> Vec<CurveJet> + Send + Sync + 'static,
    {
        AnalyticCurve { dim, map: Arc::new(map), breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        self.breakpoints = points;
        self
    }
}

impl ParametricCurve for AnalyticCurve {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, t: f64) -> Vec<CurveJet> {
        (self.map)(CurveJet::variable(t.rem_euclid(1.0)))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// (u, v, w) -> (u, v, w, sqrt(1 - u^2 - v^2 - w^2)).
pub fn sphere_lift(p: [f64; 3]) -> Result<[f64; 4]> {
    let r2 = p.iter().map(|v| v * v).sum::<f64>();
    if r2 >= 1.0 {
        return Err(Error::domain(format!("point norm {} is not below 1", r2.sqrt())));
    }
    Ok([p[0], p[1], p[2], (1.0 - r2).sqrt()])
}

/// Jet version of `sphere_lift`; the caller keeps the point inside the unit ball.
pub fn sphere_lift_jet(p: [CurveJet; 3]) -> Vec<CurveJet> {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let w = (CurveJet::constant(1.0) - r2).sqrt();
    vec![p[0], p[1], p[2], w]
}

/// x / |x| on jets.
pub fn normalize_jet(x: &[CurveJet]) -> Vec<CurveJet> {
    let mut r2 = CurveJet::constant(0.0);
    for &c in x {
        r2 = r2 + c * c;
    }
    let inv = r2.sqrt().recip();
    x.iter().map(|&c| c * inv).collect()
}

/// Trigonometric interpolant of equispaced samples, renormalized onto the sphere.
///
/// Derivatives come from spectral differentiation of the samples.
#[derive(Clone)]
pub struct SampledCurve {
    dim: usize,
    /// per coordinate, (frequency, coefficient) pairs with |frequency| <= N/2
    coefficients: Vec<Vec<(f64, Complex64)>>,
}

impl SampledCurve {
    /// `samples[j]` is the point at t = j / N.
    pub fn new(samples: &[Vec<f64>]) -> Result<Self> {
        let n = samples.len();
        if n < 8 {
            return Err(Error::Resolution(format!("{n} samples; at least 8 are needed")));
        }
        let dim = samples[0].len();
        if dim < 3 || samples.iter().any(|s| s.len() != dim) {
            return Err(Error::domain("samples must share one dimension of at least 3"));
        }
        for (j, s) in samples.iter().enumerate() {
            let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::domain(format!("sample {j} has norm {norm}")));
            }
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let mut coefficients = Vec::with_capacity(dim);
        for d in 0..dim {
            let mut buf: Vec<Complex64> =
                samples.iter().map(|s| Complex64::new(s[d], 0.0)).collect();
            fft.process(&mut buf);
            let mut coords = Vec::with_capacity(n);
            for (k, c) in buf.into_iter().enumerate() {
                let freq = if 2 * k <= n { k as f64 } else { k as f64 - n as f64 };
                let mut c = c / n as f64;
                if 2 * k == n {
                    // split the Nyquist term evenly so the interpolant stays real
                    c *= 0.5;
                    coords.push((-freq, c));
                }
                coords.push((freq, c));
            }
            coefficients.push(coords);
        }
        Ok(SampledCurve { dim, coefficients })
    }
}

impl ParametricCurve for SampledCurve {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, t: f64) -> Vec<CurveJet> {
        let raw: Vec<CurveJet> = self
            .coefficients
            .iter()
            .map(|coords| {
                let mut c = [0.0; 6];
                for &(freq, coef) in coords {
                    let w = TAU * freq;
                    let mut e = coef * Complex64::from_polar(1.0, w * t);
                    let step = Complex64::new(0.0, w);
                    let mut fact = 1.0;
                    for (k, ck) in c.iter_mut().enumerate() {
                        if k > 0 {
                            e *= step;
                            fact *= k as f64;
                        }
                        *ck += e.re / fact;
                    }
                }
                Jet { c }
            })
            .collect();
        normalize_jet(&raw)
    }
}
