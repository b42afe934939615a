//! The deep ReLU skeleton psi, its layer factors xi, derivatives and the fluid surrogate.

use std::f64::consts::{FRAC_1_PI, PI};

use serde::{Deserialize, Serialize};

use super::angle::{hat_iterated_angle, phi, phi_taylor, phi_with_slope};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Depth and width scale of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    depth: usize,
    width: f64,
}

impl KernelParams {
    pub fn new(depth: usize, width: f64) -> Result<Self> {
        if depth < 2 {
            return Err(Error::domain(format!("depth must be at least 2, got {depth}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::domain(format!("width must be positive, got {width}")));
        }
        Ok(KernelParams { depth, width })
    }

    /// Width 2, the setting used for the certificate experiments.
    pub fn with_depth(depth: usize) -> Result<Self> {
        Self::new(depth, 2.0)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// psi(0) = n L / 2.
    pub fn peak(&self) -> f64 {
        0.5 * self.width * self.depth as f64
    }
}

fn clamp_angle(t: f64) -> f64 {
    debug_assert!((-1e-12..=PI + 1e-12).contains(&t), "angle {t}");
    t.clamp(0.0, PI)
}

/// xi_l(t) = prod_{l' = l}^{L-1} (1 - phi^[l'](t) / pi).
pub fn xi(t: f64, level: usize, params: &KernelParams) -> Result<f64> {
    if !(0.0..=PI).contains(&t) {
        return Err(Error::domain(format!("angle {t} outside [0, pi]")));
    }
    if level >= params.depth {
        return Err(Error::domain(format!(
            "layer index {level} outside [0, {}]",
            params.depth - 1
        )));
    }
    let mut a = t;
    let mut prod = 1.0;
    for l in 0..params.depth {
        if l >= level {
            prod *= 1.0 - a / PI;
        }
        a = phi(a);
    }
    Ok(prod)
}

/// Taylor jet of xi_l at t, orders 0..N-1.
pub fn xi_jet<const N: usize>(t: f64, level: usize, params: &KernelParams) -> Result<Jet<N>> {
    xi(t, level, params)?;
    let mut a = Jet::<N>::variable(t);
    let mut prod = Jet::<N>::constant(1.0);
    for l in 0..params.depth {
        if l >= level {
            prod = prod * (Jet::constant(1.0) - a.scale(1.0 / PI));
        }
        a = a.compose(&phi_taylor::<N>(a.value()));
    }
    Ok(prod)
}

/// psi(t) = (n/2) sum_l xi_l(t), O(L).
pub fn skeleton(t: f64, params: &KernelParams) -> f64 {
    let mut a = clamp_angle(t);
    // running[l] = sum_{j <= l} prod_{l'=j}^{l} (1 - phi^[l']/pi)
    let mut running = 0.0;
    for _ in 0..params.depth {
        running = (1.0 - a / PI) * (1.0 + running);
        a = phi(a);
    }
    0.5 * params.width * running
}

/// psi(pi), the DC level of the kernel.
pub fn skeleton_at_pi(params: &KernelParams) -> f64 {
    skeleton(PI, params)
}

/// psi(t) - psi(pi).
pub fn skeleton_dc(t: f64, params: &KernelParams) -> f64 {
    skeleton(t, params) - skeleton_at_pi(params)
}

/// psi and psi' in one pass (used by tabulation).
pub fn skeleton_with_slope(t: f64, params: &KernelParams) -> (f64, f64) {
    let [out] = skeleton_with_slope_lanes([t], params);
    out
}

/// Several independent angles advanced in lockstep, which keeps the FPU busy.
pub(crate) fn skeleton_with_slope_lanes<const W: usize>(
    ts: [f64; W],
    params: &KernelParams,
) -> [(f64, f64); W] {
    let mut a = ts.map(clamp_angle);
    let mut da = [1.0; W];
    let mut run = [0.0; W];
    let mut drun = [0.0; W];
    for _ in 0..params.depth {
        for i in 0..W {
            let f = 1.0 - a[i] * FRAC_1_PI;
            let df = -da[i] * FRAC_1_PI;
            drun[i] = df * (1.0 + run[i]) + f * drun[i];
            run[i] = f * (1.0 + run[i]);
            let (p, s) = phi_with_slope(a[i]);
            a[i] = p;
            da[i] *= s;
        }
    }
    let h = 0.5 * params.width;
    std::array::from_fn(|i| (h * run[i], h * drun[i]))
}

/// Taylor jet of psi at an interior angle, orders 0..N-1.
pub fn skeleton_jet<const N: usize>(t: f64, params: &KernelParams) -> Jet<N> {
    let mut a = Jet::<N>::variable(t);
    let mut run = Jet::<N>::constant(0.0);
    for _ in 0..params.depth {
        let f = Jet::constant(1.0) - a.scale(1.0 / PI);
        run = f * (run + 1.0);
        a = a.compose(&phi_taylor::<N>(a.value()));
    }
    run.scale(0.5 * params.width)
}

/// Whether a derivative came from the generic recursion or from exact endpoint values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMode {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeValue {
    pub value: f64,
    pub mode: EvalMode,
}

/// Derivative of psi of order 1, 2 or 3.
///
/// At t = 0 and t = pi the closed-form endpoint values of the layer factors are
/// used; the third derivative at t = 0 is not available.
pub fn skeleton_derivative(t: f64, order: usize, params: &KernelParams) -> Result<DerivativeValue> {
    if !(1..=3).contains(&order) {
        return Err(Error::domain(format!("derivative order {order} not in 1..=3")));
    }
    if !(0.0..=PI).contains(&t) {
        return Err(Error::domain(format!("angle {t} outside [0, pi]")));
    }
    let half_n = 0.5 * params.width;
    let depth = params.depth as f64;
    if t == 0.0 {
        let value = match order {
            1 => -params.width * depth * (depth + 1.0) / (4.0 * PI),
            2 => {
                let mut s = 0.0;
                for l in 0..params.depth {
                    let l = l as f64;
                    s += (depth - l) * (depth - l - 1.0) / (PI * PI)
                        + (depth * (depth - 1.0) - l * (l - 1.0)) / (3.0 * PI * PI);
                }
                half_n * s
            }
            _ => {
                return Err(Error::domain(
                    "third derivative of the skeleton is only available for t in (0, pi]",
                ))
            }
        };
        return Ok(DerivativeValue { value, mode: EvalMode::Boundary });
    }
    if t == PI {
        let value = match order {
            1 => -half_n * xi(PI, 1.min(params.depth - 1), params)? / PI,
            2 => 0.0,
            _ => skeleton_jet::<4>(PI, params).derivative(3),
        };
        return Ok(DerivativeValue { value, mode: EvalMode::Boundary });
    }
    let jet = skeleton_jet::<4>(t, params);
    Ok(DerivativeValue { value: jet.derivative(order), mode: EvalMode::Interior })
}

/// xi-hat_l(t): the layer factor built from the fluid surrogate angles.
pub fn hat_xi(t: f64, level: usize, params: &KernelParams) -> f64 {
    (level..params.depth)
        .map(|l| 1.0 - hat_iterated_angle(t, l) / PI)
        .product()
}

/// Direct O(L) sum for psi-hat.
pub fn hat_skeleton_sum(t: f64, params: &KernelParams) -> f64 {
    let mut run = 0.0;
    for l in 0..params.depth {
        run = (1.0 - hat_iterated_angle(t, l) / PI) * (1.0 + run);
    }
    0.5 * params.width * run
}

const HAT_THRESHOLD: f64 = 1e-6;

/// psi-hat(t); closed form above a small threshold, direct sum below.
pub fn hat_skeleton(t: f64, params: &KernelParams) -> f64 {
    let t = clamp_angle(t);
    if t < HAT_THRESHOLD {
        return hat_skeleton_sum(t, params);
    }
    hat_skeleton_closed_form(t, params)
}

pub fn hat_skeleton_closed_form(t: f64, params: &KernelParams) -> f64 {
    let n = params.width;
    let l = params.depth as f64;
    let c = 3.0 * PI;
    let (a, b, d) = (l - 3.0, l - 2.0, l - 1.0);
    let den = (c + a * t) * (c + b * t) * (c + d * t);
    // (3 pi den - (3pi-4t)(3pi-3t)(3pi-2t)(3pi-t)) / t, expanded to avoid cancellation
    let poly = c.powi(3) * (a + b + d + 10.0)
        + c * c * (a * b + b * d + a * d - 35.0) * t
        + c * (a * b * d + 50.0) * t * t
        - 24.0 * t.powi(3);
    n * (l - 4.0) / 8.0 + n / 8.0 * poly / den
}
