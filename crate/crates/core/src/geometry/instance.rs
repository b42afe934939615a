//! Two labeled curves, intrinsic geometry and the epsilon-scale quantities.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::ParametricCurve;
use super::unit_speed::{derivative_bounds, kappa_hat, sample_with_map, ArcLengthMap, UnitSpeedCurve};
use crate::error::{Error, Result};

/// Minimum samples per curve for the grid scans.
pub const MIN_SCAN_SAMPLES: usize = 64;

/// How the data measure is spread over the curves (each curve carries mass 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    /// Uniform with respect to arc length.
    RiemannianUniform,
    /// Uniform in the curve parameter, so the arc-length density is 1 / (2 |x'(t)|).
    ParameterUniform,
}

/// Angle between unit vectors from their chord, accurate near zero.
pub fn chord_angle(x: &[f64], y: &[f64]) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    2.0 * (0.5 * d2.sqrt()).min(1.0).asin()
}

#[derive(Clone)]
struct Source {
    curve: Arc<dyn ParametricCurve>,
    map: ArcLengthMap,
}

/// The two curve problem: M+ (label +1) and M- (label -1), sampled at equal arc length.
#[derive(Clone)]
pub struct TwoCurveInstance {
    pub name: String,
    pub plus: UnitSpeedCurve,
    pub minus: UnitSpeedCurve,
    pub density: DensityMode,
    sources: [Source; 2],
}

impl fmt::Debug for TwoCurveInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoCurveInstance")
            .field("name", &self.name)
            .field("samples", &self.plus.len())
            .field("len_plus", &self.plus.length)
            .field("len_minus", &self.minus.length)
            .field("density", &self.density)
            .finish()
    }
}

impl TwoCurveInstance {
    pub fn from_curves(
        name: impl Into<String>,
        plus: Arc<dyn ParametricCurve>,
        minus: Arc<dyn ParametricCurve>,
        samples: usize,
    ) -> Result<Self> {
        if plus.dim() != minus.dim() {
            return Err(Error::domain("curves live in different dimensions"));
        }
        if plus.dim() < 3 {
            return Err(Error::domain("ambient dimension must be at least 3"));
        }
        let sources = [
            Source { map: ArcLengthMap::new(plus.clone())?, curve: plus },
            Source { map: ArcLengthMap::new(minus.clone())?, curve: minus },
        ];
        let inst = TwoCurveInstance {
            name: name.into(),
            plus: sample_with_map(&sources[0].map, samples)?,
            minus: sample_with_map(&sources[1].map, samples)?,
            density: DensityMode::RiemannianUniform,
            sources,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        for (c, curve) in [&self.plus, &self.minus].into_iter().enumerate() {
            for (i, p) in curve.points.iter().enumerate() {
                let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (n - 1.0).abs() > 1e-9 {
                    return Err(Error::domain(format!("component {c} sample {i} has norm {n}")));
                }
            }
        }
        let (min_cross, max_angle) = self.angle_extremes();
        if min_cross <= 0.0 {
            return Err(Error::domain("the two curves intersect"));
        }
        if max_angle > FRAC_PI_2 + 1e-6 {
            return Err(Error::domain(format!(
                "largest pairwise angle {max_angle} exceeds pi/2"
            )));
        }
        Ok(())
    }

    pub fn with_density(mut self, density: DensityMode) -> Self {
        self.density = density;
        self
    }

    /// The same curves sampled at a different resolution.
    pub fn resample(&self, samples: usize) -> Result<Self> {
        Ok(TwoCurveInstance {
            name: self.name.clone(),
            plus: sample_with_map(&self.sources[0].map, samples)?,
            minus: sample_with_map(&self.sources[1].map, samples)?,
            density: self.density,
            sources: self.sources.clone(),
        })
    }

    /// Component 0 is M+, component 1 is M-.
    pub fn component(&self, c: usize) -> &UnitSpeedCurve {
        if c == 0 {
            &self.plus
        } else {
            &self.minus
        }
    }

    pub fn source(&self, c: usize) -> &Arc<dyn ParametricCurve> {
        &self.sources[c].curve
    }

    pub fn arc_length_map(&self, c: usize) -> &ArcLengthMap {
        &self.sources[c].map
    }

    pub fn dim(&self) -> usize {
        self.plus.dim()
    }

    pub fn total_samples(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    /// (component, index within component) for a global sample index, M+ first.
    pub fn locate(&self, i: usize) -> (usize, usize) {
        if i < self.plus.len() {
            (0, i)
        } else {
            (1, i - self.plus.len())
        }
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let (c, k) = self.locate(i);
        &self.component(c).points[k]
    }

    pub fn total_length(&self) -> f64 {
        self.plus.length + self.minus.length
    }

    /// Extremes of the arc-length density over the samples.
    pub fn density_range(&self) -> (f64, f64) {
        match self.density {
            DensityMode::RiemannianUniform => {
                let a = 0.5 / self.plus.length;
                let b = 0.5 / self.minus.length;
                (a.min(b), a.max(b))
            }
            DensityMode::ParameterUniform => {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for c in 0..2 {
                    for &t in &self.component(c).params {
                        let rho = 0.5 / self.sources[c].curve.speed(t);
                        lo = lo.min(rho);
                        hi = hi.max(rho);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// (min cross-component angle, max angle over all pairs).
    pub fn angle_extremes(&self) -> (f64, f64) {
        let all: Vec<&Vec<f64>> = self.plus.points.iter().chain(&self.minus.points).collect();
        let np = self.plus.len();
        all.par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut cross = f64::INFINITY;
                let mut widest = 0.0f64;
                for (j, y) in all.iter().enumerate().skip(i + 1) {
                    let a = chord_angle(x, y);
                    widest = widest.max(a);
                    if (i < np) != (j < np) {
                        cross = cross.min(a);
                    }
                }
                (cross, widest)
            })
            .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    pub fn kappa(&self) -> f64 {
        derivative_bounds(&self.plus).kappa.max(derivative_bounds(&self.minus).kappa)
    }
}

/// Intrinsic distance between global samples i and j; infinite across components.
pub fn intrinsic_distance(instance: &TwoCurveInstance, i: usize, j: usize) -> f64 {
    let (ci, ki) = instance.locate(i);
    let (cj, kj) = instance.locate(j);
    if ci != cj {
        return f64::INFINITY;
    }
    let curve = instance.component(ci);
    let d = (curve.arc[ki] - curve.arc[kj]).abs();
    d.min(curve.length - d)
}

fn check_resolution(instance: &TwoCurveInstance) -> Result<()> {
    let m = instance.plus.len().min(instance.minus.len());
    if m < MIN_SCAN_SAMPLES {
        return Err(Error::Resolution(format!(
            "{m} samples per curve; at least {MIN_SCAN_SAMPLES} are needed"
        )));
    }
    Ok(())
}

fn check_scale(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("scale {eps} outside (0, 1)")));
    }
    Ok(())
}

/// The intrinsic cap sqrt(eps) / kappa_hat.
pub fn scale_cap(instance: &TwoCurveInstance, eps: f64) -> f64 {
    eps.sqrt() / kappa_hat(instance.kappa())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectivityRadius {
    pub value: f64,
    pub cap: f64,
    pub samples_per_curve: usize,
    /// global sample indices realizing the minimum, if below the cap
    pub witness: Option<(usize, usize)>,
}

/// Delta_eps: the smallest angle between samples at intrinsic distance at least the cap.
pub fn injectivity_radius(instance: &TwoCurveInstance, eps: f64) -> Result<InjectivityRadius> {
    check_scale(eps)?;
    check_resolution(instance)?;
    let cap = scale_cap(instance, eps);
    let n = instance.total_samples();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = instance.point(i);
            let mut best = (f64::INFINITY, i, i);
            for j in i + 1..n {
                if intrinsic_distance(instance, i, j) >= cap {
                    let a = chord_angle(x, instance.point(j));
                    if a < best.0 {
                        best = (a, i, j);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
    let (value, witness) = if best.0 < cap { (best.0, Some((best.1, best.2))) } else { (cap, None) };
    Ok(InjectivityRadius { value, cap, samples_per_curve: instance.plus.len(), witness })
}

/// Where covering balls may be centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverCenters {
    /// anywhere on the component
    #[default]
    Unrestricted,
    /// only at points of the covered set
    InSet,
}

impl std::str::FromStr for CoverCenters {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unrestricted" => Ok(CoverCenters::Unrestricted),
            "in_set" => Ok(CoverCenters::InSet),
            _ => Err(Error::domain(format!("unknown cover centers '{s}'; expected unrestricted or in_set"))),
        }
    }
}

/// Minimal number of arcs of length `2 radius` covering a union of arcs on a circle.
///
/// `arcs` holds (start, end) in arc-length coordinates with start <= end <= start + len;
/// `anchors` are candidate left ends for the first arc (every point of the set that may
/// begin an optimal covering). Centers are unrestricted.
pub fn circle_cover(arcs: &[(f64, f64)], len: f64, radius: f64, anchors: &[f64]) -> usize {
    circle_cover_with(arcs, len, radius, anchors, CoverCenters::Unrestricted)
}

pub fn circle_cover_with(
    arcs: &[(f64, f64)],
    len: f64,
    radius: f64,
    anchors: &[f64],
    centers: CoverCenters,
) -> usize {
    if arcs.is_empty() {
        return 0;
    }
    let width = 2.0 * radius;
    if arcs.iter().any(|&(a, b)| b - a >= len) {
        return (len / width).ceil() as usize;
    }
    let mut best = usize::MAX;
    let mut shifted: Vec<(f64, f64)> = Vec::with_capacity(arcs.len() + 1);
    for &anchor in anchors {
        shifted.clear();
        for &(a, b) in arcs {
            let s = (a - anchor).rem_euclid(len);
            let e = s + (b - a);
            if e > len {
                shifted.push((s, len));
                shifted.push((0.0, e - len));
            } else {
                shifted.push((s, e));
            }
        }
        shifted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let count = match centers {
            CoverCenters::Unrestricted => line_cover(&shifted, width),
            CoverCenters::InSet => line_cover_in_set(&merge(&shifted), radius),
        };
        best = best.min(count);
    }
    best
}

fn line_cover(sorted: &[(f64, f64)], width: f64) -> usize {
    let slack = 1e-12 * width;
    let mut covered = f64::NEG_INFINITY;
    let mut count = 0;
    for &(a, b) in sorted {
        if b <= covered + slack {
            continue;
        }
        let mut cur = a.max(covered);
        loop {
            count += 1;
            covered = cur + width;
            if covered + slack >= b {
                break;
            }
            cur = covered;
        }
    }
    count
}

fn merge(sorted: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for &(a, b) in sorted {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Greedy line covering with centers drawn from the set itself (disjoint sorted arcs).
fn line_cover_in_set(arcs: &[(f64, f64)], radius: f64) -> usize {
    let slack = 1e-12 * radius;
    let mut covered = f64::NEG_INFINITY;
    let mut count = 0;
    let mut i = 0;
    while i < arcs.len() {
        let (a, b) = arcs[i];
        if b <= covered + slack {
            i += 1;
            continue;
        }
        // leftmost uncovered point, then the rightmost set point within reach of it
        let p = if a > covered { a } else { covered };
        let reach = p + radius;
        let mut j = i;
        while j + 1 < arcs.len() && arcs[j + 1].0 <= reach {
            j += 1;
        }
        let center = reach.min(arcs[j].1);
        count += 1;
        covered = center + radius;
        i = j;
    }
    count
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloverNumber {
    pub value: usize,
    /// global sample index attaining the supremum
    pub base: usize,
    pub cap: f64,
    pub threshold: f64,
    pub radius: f64,
    pub samples_per_curve: usize,
}

/// Winding set of a base sample on one component as merged arcs, plus anchor points.
fn winding_arcs(
    instance: &TwoCurveInstance,
    base: usize,
    comp: usize,
    cap: f64,
    threshold: f64,
) -> (Vec<(f64, f64)>, Vec<f64>) {
    let curve = instance.component(comp);
    let offset = if comp == 0 { 0 } else { instance.plus.len() };
    let x = instance.point(base);
    let m = curve.len();
    let flags: Vec<bool> = (0..m)
        .map(|k| {
            intrinsic_distance(instance, base, offset + k) >= cap
                && chord_angle(x, &curve.points[k]) <= threshold
        })
        .collect();
    let h = curve.step();
    if flags.iter().all(|&f| f) {
        return (vec![(0.0, curve.length)], vec![0.0]);
    }
    let Some(first_gap) = flags.iter().position(|&f| !f) else {
        return (Vec::new(), Vec::new());
    };
    let mut arcs = Vec::new();
    let mut anchors = Vec::new();
    let mut run_start: Option<usize> = None;
    for step in 1..=m {
        let k = (first_gap + step) % m;
        if flags[k] {
            if run_start.is_none() {
                run_start = Some(step);
            }
            anchors.push(curve.arc[k] - 0.5 * h);
        } else if let Some(start) = run_start.take() {
            let k0 = (first_gap + start) % m;
            let a = curve.arc[k0] - 0.5 * h;
            arcs.push((a, a + (step - start) as f64 * h));
        }
    }
    let anchors = anchors.into_iter().map(|a| a.rem_euclid(curve.length)).collect();
    let arcs = arcs.into_iter().map(|(a, b)| (a.rem_euclid(curve.length), a.rem_euclid(curve.length) + (b - a))).collect();
    (arcs, anchors)
}

/// The clover number: sup over base samples of the minimal covering of the winding set.
pub fn clover_number(instance: &TwoCurveInstance, eps: f64, delta: f64) -> Result<CloverNumber> {
    clover_number_with(instance, eps, delta, CoverCenters::Unrestricted)
}

pub fn clover_number_with(
    instance: &TwoCurveInstance,
    eps: f64,
    delta: f64,
    centers: CoverCenters,
) -> Result<CloverNumber> {
    check_scale(eps)?;
    if !(delta > 0.0 && delta <= 1.0 - eps + 1e-12) {
        return Err(Error::domain(format!("delta {delta} outside (0, 1 - eps]")));
    }
    check_resolution(instance)?;
    let kappa = instance.kappa();
    let cap = eps.sqrt() / kappa_hat(kappa);
    let threshold = delta * cap;
    let radius = 1.0 / (1.0 + kappa * kappa).sqrt();
    let n = instance.total_samples();
    let (value, base) = (0..n)
        .into_par_iter()
        .map(|i| {
            let total: usize = (0..2)
                .map(|c| {
                    let (arcs, anchors) = winding_arcs(instance, i, c, cap, threshold);
                    circle_cover_with(&arcs, instance.component(c).length, radius, &anchors, centers)
                })
                .sum();
            (total, i)
        })
        .reduce(|| (0, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    Ok(CloverNumber {
        value,
        base: if value == 0 { 0 } else { base },
        cap,
        threshold,
        radius,
        samples_per_curve: instance.plus.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_cover(points: &[f64], len: f64, radius: f64) -> usize {
        // candidate balls start at a set point; some optimal covering has this form
        let n = points.len();
        let covers = |start: f64, p: f64| (p - start).rem_euclid(len) <= 2.0 * radius + 1e-12;
        for size in 0..=n {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                if points.iter().all(|&p| idx.iter().any(|&c| covers(points[c], p))) {
                    return size;
                }
                // next combination
                let mut k = size;
                while k > 0 && idx[k - 1] == n - size + k - 1 {
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
                idx[k - 1] += 1;
                for m in k..size {
                    idx[m] = idx[m - 1] + 1;
                }
            }
        }
        n
    }

    #[test]
    fn cover_matches_exhaustive() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let len = 1.0;
            let count = 1 + (next() * 12.0) as usize;
            let radius = 0.02 + 0.2 * next();
            let pts: Vec<f64> = (0..count).map(|_| next()).collect();
            let arcs: Vec<(f64, f64)> = pts.iter().map(|&p| (p, p)).collect();
            let greedy = circle_cover(&arcs, len, radius, &pts);
            assert_eq!(greedy, brute_cover(&pts, len, radius), "{pts:?} r={radius}");
        }
    }

    fn brute_cover_in_set(points: &[f64], len: f64, radius: f64) -> usize {
        let n = points.len();
        let dist = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(len);
            d.min(len - d)
        };
        let mut best = n;
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size >= best {
                continue;
            }
            let ok = points
                .iter()
                .all(|&p| (0..n).any(|c| mask & (1 << c) != 0 && dist(points[c], p) <= radius + 1e-12));
            if ok {
                best = size;
            }
        }
        best
    }

    #[test]
    fn in_set_cover_matches_exhaustive() {
        let mut seed = 987u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..300 {
            let len = 1.0;
            let count = 1 + (next() * 12.0) as usize;
            let radius = 0.02 + 0.2 * next();
            let pts: Vec<f64> = (0..count).map(|_| next()).collect();
            let arcs: Vec<(f64, f64)> = pts.iter().map(|&p| (p, p)).collect();
            let greedy = circle_cover_with(&arcs, len, radius, &pts, CoverCenters::InSet);
            assert_eq!(greedy, brute_cover_in_set(&pts, len, radius), "{pts:?} r={radius}");
            assert!(greedy >= circle_cover(&arcs, len, radius, &pts));
        }
    }

    #[test]
    fn cover_of_whole_circle_and_empty_set() {
        assert_eq!(circle_cover(&[], 1.0, 0.1, &[]), 0);
        assert_eq!(circle_cover(&[(0.0, 1.0)], 1.0, 0.1, &[0.0]), 5);
        assert_eq!(circle_cover(&[(0.9, 1.05)], 1.0, 0.1, &[0.9]), 1);
    }
}
