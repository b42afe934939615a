//! Built-in two-curve instances.

use std::f64::consts::{FRAC_PI_8, PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::curve::{sphere_lift_jet, AnalyticCurve, CurveJet, ParametricCurve};
use super::instance::TwoCurveInstance;
use crate::error::{Error, Result};

/// Options shared by the built-in geometries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuiltinOptions {
    /// clover petal separation
    pub delta_sep: f64,
    /// clover rescaling
    pub scale: f64,
    /// angular gap between the two circles
    pub gap: f64,
    /// polar angle of the inner circle
    pub polar: f64,
    /// arc-length samples per curve
    pub samples: usize,
}

impl Default for BuiltinOptions {
    fn default() -> Self {
        BuiltinOptions { delta_sep: 0.05, scale: 0.01, gap: 0.3, polar: 0.4, samples: 2048 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinName {
    TwoCircles,
    Fig1Like,
    Clover(u8),
}

impl std::str::FromStr for BuiltinName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "two_circles" => return Ok(BuiltinName::TwoCircles),
            "fig1_like" => return Ok(BuiltinName::Fig1Like),
            _ => {}
        }
        let k = s
            .strip_prefix("clover(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("clover"));
        if let Some(k) = k.and_then(|k| k.trim().parse::<u8>().ok()) {
            if (1..=4).contains(&k) {
                return Ok(BuiltinName::Clover(k));
            }
        }
        Err(Error::domain(format!(
            "unknown geometry '{s}'; expected two_circles, fig1_like or clover(1..4)"
        )))
    }
}

impl std::fmt::Display for BuiltinName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuiltinName::TwoCircles => write!(f, "two_circles"),
            BuiltinName::Fig1Like => write!(f, "fig1_like"),
            BuiltinName::Clover(k) => write!(f, "clover({k})"),
        }
    }
}

pub fn builtin_geometry(name: BuiltinName, options: &BuiltinOptions) -> Result<TwoCurveInstance> {
    let (plus, minus) = match name {
        BuiltinName::TwoCircles => two_circles(options.polar, options.gap)?,
        BuiltinName::Fig1Like => fig1_like(),
        BuiltinName::Clover(k) => clover(k, options.delta_sep, options.scale)?,
    };
    TwoCurveInstance::from_curves(name.to_string(), plus, minus, options.samples)
}

type CurvePair = (Arc<dyn ParametricCurve>, Arc<dyn ParametricCurve>);

fn latitude_circle(polar: f64) -> AnalyticCurve {
    let (r, z) = polar.sin_cos();
    AnalyticCurve::new(3, move |t| {
        let (s, c) = t.scale(TAU).sin_cos();
        vec![c.scale(r), s.scale(r), CurveJet::constant(z)]
    })
}

/// Two latitude circles around the north pole at polar angles `polar` and `polar + gap`.
pub fn two_circles(polar: f64, gap: f64) -> Result<CurvePair> {
    if !(polar > 0.0 && gap > 0.0 && 2.0 * (polar + gap) <= PI / 2.0 + 1e-12) {
        return Err(Error::domain(format!(
            "two_circles needs positive angles with 2 (polar + gap) <= pi/2, got {polar}, {gap}"
        )));
    }
    Ok((Arc::new(latitude_circle(polar)), Arc::new(latitude_circle(polar + gap))))
}

/// Gnomonic chart around the north pole: (u, v) -> (u, v, 1) / |(u, v, 1)|.
fn gnomonic(u: CurveJet, v: CurveJet) -> Vec<CurveJet> {
    super::curve::normalize_jet(&[u, v, CurveJet::constant(1.0)])
}

/// Two meshing star-shaped curves in a spherical cap.
pub fn fig1_like() -> CurvePair {
    let plus = AnalyticCurve::new(3, |t| {
        let th = t.scale(TAU);
        let r = (th.scale(5.0)).cos().scale(0.16) + 0.42;
        let (s, c) = th.sin_cos();
        gnomonic(r * c, r * s)
    });
    let minus = AnalyticCurve::new(3, |t| {
        let th = t.scale(TAU);
        let r = (th.scale(5.0)).cos().scale(0.16) + 0.62;
        let (s, c) = (th + 0.12).sin_cos();
        let wobble = (th.scale(3.0)).sin().scale(0.04);
        gnomonic(r * c + wobble, r * s)
    });
    (Arc::new(plus), Arc::new(minus))
}

/// Unscaled rosette: (cos 4t, R(pi/8) rho(t) (cos t, sin t)), rho = sin 4t + 1 + delta.
fn rosette(t: CurveJet, delta: f64) -> [CurveJet; 3] {
    let (s4, c4) = t.scale(4.0).sin_cos();
    let rho = s4 + (1.0 + delta);
    let (s, c) = t.sin_cos();
    let (a, b) = (c * rho, s * rho);
    let (sr, cr) = FRAC_PI_8.sin_cos();
    [c4, a.scale(cr) + b.scale(sr), a.scale(-sr) + b.scale(cr)]
}

/// Reflection across the line through q with unit direction d, in the (x2, x3) plane.
#[derive(Debug, Clone, Copy)]
struct Reflection {
    q: [f64; 2],
    d: [f64; 2],
}

impl Reflection {
    fn apply(&self, p: [CurveJet; 3]) -> [CurveJet; 3] {
        let [d0, d1] = self.d;
        let u = p[1] + (-self.q[0]);
        let v = p[2] + (-self.q[1]);
        let proj = u.scale(d0) + v.scale(d1);
        let nu = proj.scale(2.0 * d0) - u;
        let nv = proj.scale(2.0 * d1) - v;
        [p[0], nu + self.q[0], nv + self.q[1]]
    }
}

/// |dx2/dt| - |dx3/dt| written as a difference of squares.
fn speed_balance(t: f64, delta: f64) -> f64 {
    let p = rosette(CurveJet::variable(t), delta);
    p[1].c[1].powi(2) - p[2].c[1].powi(2)
}

fn planar_radius(t: f64, delta: f64) -> f64 {
    let p = rosette(CurveJet::constant(t), delta);
    p[1].value().hypot(p[2].value())
}

/// The eight outer points where |dx2/dt| = |dx3/dt|, sorted in [0, 2 pi).
pub fn unfolding_points(delta: f64) -> Result<Vec<f64>> {
    let n = 8192;
    let mut roots = Vec::new();
    let mut prev = speed_balance(0.0, delta);
    for i in 1..=n {
        let b = TAU * i as f64 / n as f64;
        let fb = speed_balance(b, delta);
        if prev == 0.0 || prev.signum() != fb.signum() {
            let mut lo = TAU * (i - 1) as f64 / n as f64;
            let mut hi = b;
            let flo = speed_balance(lo, delta);
            if flo == 0.0 {
                roots.push(lo);
            } else {
                while hi - lo > 1e-15 {
                    let mid = 0.5 * (lo + hi);
                    let fm = speed_balance(mid, delta);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        prev = fb;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let outer: Vec<f64> = roots
        .into_iter()
        .filter(|&t| t < TAU && planar_radius(t, delta) > 0.5 * (2.0 + delta))
        .collect();
    if outer.len() != 8 {
        return Err(Error::Construction(format!(
            "expected 8 outer unfolding points, bracketed {}: {outer:?}",
            outer.len()
        )));
    }
    Ok(outer)
}

/// Parameter intervals (start, end) in t, end possibly past 2 pi, each enclosing one inner tip.
fn unfolding_pairs(points: &[f64]) -> Vec<(f64, f64)> {
    (0..4)
        .map(|k| {
            let a = points[2 * k + 1];
            let b = points[(2 * k + 2) % 8];
            (a, if b < a { b + TAU } else { b })
        })
        .collect()
}

/// The rosette with `reflections` inner petals flipped outward across their chords.
fn unfolded_rosette(reflections: usize, delta: f64) -> Result<(AnalyticCurve, Vec<(f64, f64)>)> {
    let points = unfolding_points(delta)?;
    let pairs: Vec<(f64, f64)> = unfolding_pairs(&points).into_iter().take(reflections).collect();
    let mirrors: Vec<Reflection> = pairs
        .iter()
        .map(|&(a, b)| {
            let pa = rosette(CurveJet::constant(a), delta);
            let pb = rosette(CurveJet::constant(b), delta);
            let q = [pa[1].value(), pa[2].value()];
            let dx = pb[1].value() - q[0];
            let dy = pb[2].value() - q[1];
            let n = dx.hypot(dy);
            Reflection { q, d: [dx / n, dy / n] }
        })
        .collect();
    let windows = pairs.clone();
    let curve = AnalyticCurve::new(3, move |tau| {
        let t = tau.scale(TAU);
        let mut p = rosette(t, delta);
        let tv = t.value();
        for (&(a, b), m) in windows.iter().zip(&mirrors) {
            let inside = (tv >= a && tv < b) || (b > TAU && tv + TAU < b);
            if inside {
                p = m.apply(p);
            }
        }
        p.to_vec()
    });
    let mut breaks: Vec<f64> = Vec::new();
    for &(a, b) in &pairs {
        breaks.push(a / TAU);
        breaks.push((b / TAU).rem_euclid(1.0));
    }
    Ok((curve.with_breakpoints(breaks), pairs))
}

/// Clover instance with `k` remaining near-crossings, scaled and lifted to S^3.
pub fn clover(k: u8, delta: f64, scale: f64) -> Result<CurvePair> {
    if !(1..=4).contains(&k) {
        return Err(Error::domain(format!("clover index {k} outside 1..=4")));
    }
    if !(scale > 0.0 && scale < 0.2) {
        return Err(Error::domain(format!("clover scale {scale} must lie in (0, 0.2)")));
    }
    let (rose, _) = unfolded_rosette(4 - k as usize, delta)?;
    let breaks = rose.breakpoints();
    let minus = AnalyticCurve::new(4, move |tau| {
        let p = rose.jet(tau.value());
        // re-attach the incoming parameter jet (rose.jet expands in tau itself)
        let p: Vec<CurveJet> = p.iter().map(|c| tau.compose(&c.c)).collect();
        sphere_lift_jet([p[0].scale(scale), p[1].scale(scale), p[2].scale(scale)])
    })
    .with_breakpoints(breaks);
    let plus = AnalyticCurve::new(4, move |tau| {
        let (s, c) = tau.scale(TAU).sin_cos();
        let x = s.scale(4.0 * scale);
        let y = (c + (-1.0)).scale(4.0 * scale);
        sphere_lift_jet([x, y, CurveJet::constant(0.0)])
    });
    Ok((Arc::new(plus), Arc::new(minus)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        assert_eq!("two_circles".parse::<BuiltinName>().unwrap(), BuiltinName::TwoCircles);
        assert_eq!("clover(3)".parse::<BuiltinName>().unwrap(), BuiltinName::Clover(3));
        assert_eq!("clover2".parse::<BuiltinName>().unwrap(), BuiltinName::Clover(2));
        assert!("clover(5)".parse::<BuiltinName>().is_err());
        assert!("torus".parse::<BuiltinName>().is_err());
    }

    #[test]
    fn unfolding_points_match_reference() {
        let pts = unfolding_points(0.05).unwrap();
        let reference = [0.28987, 0.49549, 1.86067, 2.06629, 3.43147, 3.63708, 5.00226, 5.20788];
        for (a, b) in pts.iter().zip(reference) {
            assert!((a - b).abs() < 1e-4, "{pts:?}");
            assert!(speed_balance(*a, 0.05).abs() < 1e-10);
        }
    }

    #[test]
    fn reflected_rosette_is_continuous_at_junctions() {
        let (rose, pairs) = unfolded_rosette(4, 0.05).unwrap();
        for &(a, b) in &pairs {
            for t in [a, b.rem_euclid(TAU)] {
                let tau = t / TAU;
                let left = rose.jet(tau - 1e-9);
                let right = rose.jet(tau + 1e-9);
                for d in 0..3 {
                    assert!((left[d].value() - right[d].value()).abs() < 1e-7);
                    assert!((left[d].c[1] - right[d].c[1]).abs() < 1e-5, "tangent jump at {t}");
                }
            }
        }
    }
}
