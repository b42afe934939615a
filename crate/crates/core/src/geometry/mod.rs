//! Geometry of pairs of closed curves on the sphere.

mod builtin;
mod curve;
mod instance;
mod io;
mod unit_speed;

use serde::{Deserialize, Serialize};

pub use builtin::{builtin_geometry, clover, fig1_like, two_circles, unfolding_points, BuiltinName, BuiltinOptions};
pub use curve::{normalize_jet, sphere_lift, sphere_lift_jet, AnalyticCurve, CurveJet, ParametricCurve, SampledCurve};
pub use instance::{
    chord_angle, circle_cover, circle_cover_with, clover_number, clover_number_with, injectivity_radius,
    intrinsic_distance, scale_cap, CloverNumber, CoverCenters, DensityMode, InjectivityRadius, TwoCurveInstance, MIN_SCAN_SAMPLES,
};
pub use io::{read_curves_csv, write_curves_csv};
pub use unit_speed::{
    arclength_jet, arclength_reparameterize, derivative_bounds, kappa_hat, ArcLengthMap, DerivativeBounds,
    UnitSpeedCurve,
};

use crate::error::Result;

/// Summary of the geometric quantities of an instance at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub name: String,
    pub samples_per_curve: usize,
    pub length: f64,
    pub length_plus: f64,
    pub length_minus: f64,
    /// sup norms of the arc-length derivatives of orders 1 to 5
    pub m: [f64; 5],
    pub kappa: f64,
    pub kappa_hat: f64,
    pub eps: f64,
    pub delta: f64,
    pub delta_eps: f64,
    pub clover: usize,
    pub cover_centers: CoverCenters,
    pub cross_min_angle: f64,
    pub max_angle: f64,
}

impl GeometryReport {
    pub fn compute(instance: &TwoCurveInstance, eps: f64, delta: f64) -> Result<Self> {
        Self::compute_with(instance, eps, delta, CoverCenters::Unrestricted)
    }

    pub fn compute_with(instance: &TwoCurveInstance, eps: f64, delta: f64, centers: CoverCenters) -> Result<Self> {
        let bp = derivative_bounds(&instance.plus);
        let bm = derivative_bounds(&instance.minus);
        let mut m = [0.0; 5];
        for k in 0..5 {
            m[k] = bp.m[k].max(bm.m[k]);
        }
        let kappa = bp.kappa.max(bm.kappa);
        let (cross_min_angle, max_angle) = instance.angle_extremes();
        Ok(GeometryReport {
            name: instance.name.clone(),
            samples_per_curve: instance.plus.len(),
            length: instance.total_length(),
            length_plus: instance.plus.length,
            length_minus: instance.minus.length,
            m,
            kappa,
            kappa_hat: kappa_hat(kappa),
            eps,
            delta,
            delta_eps: injectivity_radius(instance, eps)?.value,
            clover: clover_number_with(instance, eps, delta, centers)?.value,
            cover_centers: centers,
            cross_min_angle,
            max_angle,
        })
    }
}
