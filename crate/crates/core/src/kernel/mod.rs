//! Deep ReLU neural tangent kernel: angle evolution, skeleton, tabulation.

mod angle;
mod skeleton;
mod table;

pub use angle::{
    angle_evolution, fluid_lower_bound, hat_iterated_angle, iterated_angle_evolution,
};
pub use skeleton::{
    hat_skeleton, hat_skeleton_closed_form, hat_skeleton_sum, hat_xi, skeleton, skeleton_at_pi,
    skeleton_dc, skeleton_derivative, skeleton_jet, skeleton_with_slope, xi, xi_jet, DerivativeValue,
    EvalMode, KernelParams,
};
pub use table::SkeletonTable;

use crate::error::{Error, Result};

/// Angle between two unit vectors, via a clamped inner product.
pub fn angle_between(x: &[f64], y: &[f64]) -> f64 {
    let ip: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    ip.clamp(-1.0, 1.0).acos()
}

fn check_unit(x: &[f64]) -> Result<()> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("input norm {norm} is not 1")));
    }
    Ok(())
}

/// Theta(x, x') = psi(angle(x, x')), or its DC-subtracted version.
pub fn ntk(x: &[f64], y: &[f64], params: &KernelParams, dc: bool) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain("inputs have different dimensions"));
    }
    check_unit(x)?;
    check_unit(y)?;
    let t = angle_between(x, y);
    Ok(if dc { skeleton_dc(t, params) } else { skeleton(t, params) })
}
