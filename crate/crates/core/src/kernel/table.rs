//! Tabulated DC-subtracted skeleton for large depth.
//!
//! Knots are uniform in u = ln(1 + t L / (3 pi)), which resolves the spike of
//! width ~3 pi / L at the origin. Between knots psi° is a cubic Hermite
//! interpolant in u with exact knot slopes, limited to stay monotone.

use std::f64::consts::PI;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::skeleton::{skeleton_at_pi, skeleton_dc, skeleton_with_slope_lanes, KernelParams};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const GL_POINTS: usize = 8;
const LANES: usize = 8;

#[derive(Debug, Clone)]
pub struct SkeletonTable {
    params: KernelParams,
    scale: f64,
    step: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    /// d psi° / du at the knots, after limiting.
    slopes_u: Vec<f64>,
    /// d psi / dt at the knots, exact.
    slopes_t: Vec<f64>,
    cumulative: Vec<f64>,
    psi_pi: f64,
    gl: (Vec<f64>, Vec<f64>),
    refinement_error: f64,
}

impl SkeletonTable {
    pub const DEFAULT_GRID: usize = 4096;

    pub fn new(params: KernelParams, grid_size: usize) -> Result<Self> {
        if grid_size < 64 {
            return Err(Error::domain(format!("grid size {grid_size} below 64")));
        }
        let scale = params.depth() as f64 / (3.0 * PI);
        let u_max = (scale * PI).ln_1p();
        let segments = grid_size - 1;
        let step = u_max / segments as f64;
        let mut grid: Vec<f64> = (0..grid_size)
            .map(|i| ((i as f64 * step).exp_m1() / scale).min(PI))
            .collect();
        grid[0] = 0.0;
        grid[segments] = PI;

        let psi_pi = skeleton_at_pi(&params);
        let pairs: Vec<(f64, f64)> = grid
            .par_chunks(LANES)
            .flat_map_iter(|chunk| {
                let mut ts = [0.0; LANES];
                ts[..chunk.len()].copy_from_slice(chunk);
                skeleton_with_slope_lanes(ts, &params)
                    .into_iter()
                    .take(chunk.len())
            })
            .collect();
        let values: Vec<f64> = pairs.iter().map(|(v, _)| (v - psi_pi).max(0.0)).collect();
        let slopes_t: Vec<f64> = pairs.iter().map(|&(_, d)| d).collect();
        let mut slopes_u: Vec<f64> = grid
            .iter()
            .zip(&slopes_t)
            .map(|(&t, &d)| d * (t + 1.0 / scale))
            .collect();
        let mut values = values;
        values[segments] = 0.0;
        limit_monotone(&values, &mut slopes_u, step);

        let mut table = SkeletonTable {
            params,
            scale,
            step,
            grid,
            values,
            slopes_u,
            slopes_t,
            cumulative: Vec::new(),
            psi_pi,
            gl: gauss_legendre(GL_POINTS),
            refinement_error: 0.0,
        };
        let mut cumulative = Vec::with_capacity(grid_size);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..segments {
            acc += table.segment_integral(k, 1.0);
            cumulative.push(acc);
        }
        table.cumulative = cumulative;

        // refinement check at midpoints of every eighth segment
        let probe: Vec<usize> = (0..segments).step_by(8).collect();
        table.refinement_error = probe
            .par_iter()
            .map(|&k| {
                let u = (k as f64 + 0.5) * step;
                let t = u.exp_m1() / scale;
                (table.eval(t) - skeleton_dc(t, &params)).abs()
            })
            .reduce(|| 0.0, f64::max);
        Ok(table)
    }

    pub fn with_default_grid(params: KernelParams) -> Result<Self> {
        Self::new(params, Self::DEFAULT_GRID)
    }

    /// Process-wide cached table for these parameters.
    pub fn shared(params: KernelParams, grid_size: usize) -> Result<Arc<Self>> {
        type Key = (usize, u64, usize);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<SkeletonTable>>>> = OnceLock::new();
        let key = (params.depth(), params.width().to_bits(), grid_size);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(Self::new(params, grid_size)?);
        cache.lock().unwrap().insert(key, table.clone());
        Ok(table)
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Knot angles, strictly increasing from 0 to pi.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// psi° at the knots.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// psi' at the knots.
    pub fn derivatives(&self) -> &[f64] {
        &self.slopes_t
    }

    pub fn psi_at_pi(&self) -> f64 {
        self.psi_pi
    }

    /// Max deviation from the direct recursion seen at the probe midpoints.
    pub fn refinement_error(&self) -> f64 {
        self.refinement_error
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let u = (self.scale * t).ln_1p();
        let x = u / self.step;
        let last = self.grid.len() - 2;
        let k = (x.floor().max(0.0) as usize).min(last);
        (k, (x - k as f64).clamp(0.0, 1.0))
    }

    fn hermite(&self, k: usize, s: f64) -> f64 {
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes_u[k] * self.step, self.slopes_u[k + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }

    /// Integral of the interpolant over segment k from its left knot to local coordinate `upto`.
    fn segment_integral(&self, k: usize, upto: f64) -> f64 {
        if upto <= 0.0 {
            return 0.0;
        }
        let u0 = k as f64 * self.step;
        let (xs, ws) = &self.gl;
        let mut acc = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            let s = 0.5 * upto * (x + 1.0);
            let dt = (u0 + s * self.step).exp() / self.scale * self.step;
            acc += w * self.hermite(k, s) * dt;
        }
        0.5 * upto * acc
    }

    /// Interpolated psi°(t); t is clamped to [0, pi].
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, PI);
        if t == PI {
            return 0.0;
        }
        let (k, s) = self.locate(t);
        self.hermite(k, s).max(0.0)
    }

    /// Interpolated psi(t).
    pub fn eval_full(&self, t: f64) -> f64 {
        self.eval(t) + self.psi_pi
    }

    /// Integral of psi° from 0 to t.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, PI);
        let (k, s) = self.locate(t);
        self.cumulative[k] + self.segment_integral(k, s)
    }

    /// Integral of psi°(|x|) over [a, b], for a ≤ b inside [-pi, pi].
    pub fn integral_abs(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        let anti = |x: f64| x.signum() * self.antiderivative(x.abs());
        anti(b) - anti(a)
    }
}

fn limit_monotone(values: &[f64], slopes: &mut [f64], step: f64) {
    for k in 0..values.len() - 1 {
        let delta = (values[k + 1] - values[k]) / step;
        if delta == 0.0 {
            slopes[k] = 0.0;
            slopes[k + 1] = 0.0;
            continue;
        }
        let mut a = slopes[k] / delta;
        let mut b = slopes[k + 1] / delta;
        if a < 0.0 {
            slopes[k] = 0.0;
            a = 0.0;
        }
        if b < 0.0 {
            slopes[k + 1] = 0.0;
            b = 0.0;
        }
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            slopes[k] = tau * a * delta;
            slopes[k + 1] = tau * b * delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::skeleton;

    #[test]
    fn small_table_exact_at_knots() {
        let params = KernelParams::new(4, 2.0).unwrap();
        let table = SkeletonTable::new(params, 64).unwrap();
        for (&t, &v) in table.grid().iter().zip(table.values()) {
            assert!((table.eval(t) - v).abs() <= 1e-12 * params.peak());
            assert!((v - skeleton_dc(t, &params)).abs() <= 1e-12 * params.peak());
        }
        assert_eq!(table.eval(PI), 0.0);
        assert!(table.grid().windows(2).all(|w| w[0] < w[1]));
        assert!(table.values().windows(2).all(|w| w[0] >= w[1]));
        assert!(SkeletonTable::new(params, 63).is_err());
    }

    #[test]
    fn moderate_depth_accuracy() {
        let params = KernelParams::new(2000, 2.0).unwrap();
        let table = SkeletonTable::new(params, 1024).unwrap();
        let peak = table.eval(0.0);
        for i in 0..200 {
            let t = PI * ((i as f64 * 0.618_033_988_75) % 1.0);
            let err = (table.eval(t) - skeleton_dc(t, &params)).abs();
            assert!(err <= 1e-8 * peak, "t={t} err={err}");
        }
        assert!(table.refinement_error() <= 1e-8 * peak);
        assert!((table.eval_full(0.3) - skeleton(0.3, &params)).abs() <= 1e-8 * peak);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let params = KernelParams::new(300, 2.0).unwrap();
        let table = SkeletonTable::new(params, 512).unwrap();
        for &t in &[1e-3, 0.05, 0.7, PI] {
            let exact =
                crate::quadrature::integrate(|x| skeleton_dc(x, &params), &[0.0, t.min(0.01), t], 1e-12)
                    .unwrap();
            let got = table.antiderivative(t);
            assert!((got - exact).abs() <= 1e-8 * exact, "t={t} {got} {exact}");
        }
        let sym = table.integral_abs(-0.2, 0.2);
        assert!((sym - 2.0 * table.antiderivative(0.2)).abs() < 1e-12);
    }
}
