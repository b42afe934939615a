use std::sync::Arc;

use ntk_curves::geometry::{
    builtin_geometry, chord_angle, circle_cover, circle_cover_with, clover_number, injectivity_radius,
    intrinsic_distance, kappa_hat, read_curves_csv, sphere_lift, write_curves_csv, AnalyticCurve, BuiltinName,
    BuiltinOptions, CoverCenters, CurveJet, SampledCurve, TwoCurveInstance,
};
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn builtins() -> Vec<BuiltinName> {
    let mut v = vec![BuiltinName::TwoCircles, BuiltinName::Fig1Like];
    v.extend((1..=4).map(BuiltinName::Clover));
    v
}

#[test]
fn unit_speed_identities() {
    let opts = BuiltinOptions { samples: 512, ..Default::default() };
    for name in builtins() {
        let inst = builtin_geometry(name, &opts).unwrap();
        for curve in [&inst.plus, &inst.minus] {
            for i in 0..curve.len() {
                let x = &curve.points[i];
                let (d1, d2, d3) = (&curve.derivatives[0][i], &curve.derivatives[1][i], &curve.derivatives[2][i]);
                assert!((dot(d1, d1) - 1.0).abs() <= 1e-9, "{name}: speed");
                assert!(dot(x, d1).abs() <= 1e-6, "{name}: <x, x'>");
                assert!((dot(x, d2) + 1.0).abs() <= 1e-5, "{name}: <x, x''>");
                assert!(dot(d1, d2).abs() <= 1e-5 * (1.0 + dot(d2, d2).sqrt()), "{name}: <x', x''>");
                assert!(dot(x, d3).abs() <= 1e-4 * (1.0 + dot(d3, d3).sqrt()), "{name}: <x, x'''>");
            }
        }
    }
}

#[test]
fn near_isometry_and_length_bound() {
    let eps: f64 = 1.0 / 20.0;
    let opts = BuiltinOptions { samples: 384, ..Default::default() };
    for name in builtins() {
        let inst = builtin_geometry(name, &opts).unwrap();
        let cap = eps.sqrt() / kappa_hat(inst.kappa());
        assert!(1.0 / kappa_hat(inst.kappa()) <= inst.plus.length.min(inst.minus.length), "{name}");
        let n = inst.total_samples();
        for i in 0..n {
            for j in 0..n {
                let d = intrinsic_distance(&inst, i, j);
                if d <= cap {
                    let a = chord_angle(inst.point(i), inst.point(j));
                    assert!((1.0 - eps) * d <= a && a <= d + 1e-9, "{name}: d {d} angle {a}");
                }
            }
        }
    }
}

#[test]
fn grid_stability() {
    let eps = 1.0 / 20.0;
    for name in builtins() {
        let coarse = builtin_geometry(name, &BuiltinOptions { samples: 2048, ..Default::default() }).unwrap();
        let fine = builtin_geometry(name, &BuiltinOptions { samples: 4096, ..Default::default() }).unwrap();
        let (c0, c1) = (
            clover_number(&coarse, eps, 19.0 / 20.0).unwrap().value,
            clover_number(&fine, eps, 19.0 / 20.0).unwrap().value,
        );
        assert_eq!(c0, c1, "{name}");
        let (d0, d1) = (injectivity_radius(&coarse, eps).unwrap().value, injectivity_radius(&fine, eps).unwrap().value);
        assert!((d0 - d1).abs() <= 0.01 * d1, "{name}: {d0} vs {d1}");
    }
}

/// Smallest number of candidate balls covering every point, by increasing subset size.
fn exhaustive(points: &[f64], candidates: &[f64], covers: impl Fn(f64, f64) -> bool) -> usize {
    let n = candidates.len();
    for size in 1..=n {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            if points.iter().all(|&p| idx.iter().any(|&c| covers(candidates[c], p))) {
                return size;
            }
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

fn circ(a: f64, b: f64, len: f64) -> f64 {
    let d = (a - b).rem_euclid(len);
    d.min(len - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cover_matches_exhaustive(pts in prop::collection::vec(0.0f64..1.0, 1..=20), radius in 0.03f64..0.3) {
        let len = 1.0;
        let arcs: Vec<(f64, f64)> = pts.iter().map(|&p| (p, p)).collect();
        // some optimal covering has every ball starting at a set point
        let left: Vec<f64> = pts.iter().map(|&p| p + radius).collect();
        let free = exhaustive(&pts, &left, |c, p| circ(c, p, len) <= radius + 1e-12);
        prop_assert_eq!(circle_cover(&arcs, len, radius, &pts), free);
        let in_set = exhaustive(&pts, &pts, |c, p| circ(c, p, len) <= radius + 1e-12);
        prop_assert_eq!(circle_cover_with(&arcs, len, radius, &pts, CoverCenters::InSet), in_set);
    }
}

#[test]
fn curve_csv_round_trip() {
    let inst = builtin_geometry(BuiltinName::Fig1Like, &BuiltinOptions { samples: 1024, ..Default::default() }).unwrap();
    let mut buf = Vec::new();
    write_curves_csv(&inst, &mut buf).unwrap();
    let (plus, minus) = read_curves_csv(buf.as_slice()).unwrap();
    let back = TwoCurveInstance::from_curves("fig1_like (csv)", plus, minus, 1024).unwrap();
    assert!((back.plus.length - inst.plus.length).abs() <= 1e-8 * inst.plus.length);
    assert!((back.minus.length - inst.minus.length).abs() <= 1e-8 * inst.minus.length);
    for i in (0..1024).step_by(37) {
        assert!(chord_angle(&back.plus.points[i], &inst.plus.points[i]) <= 1e-8);
    }
}

#[test]
fn sampled_curve_matches_analytic_circle() {
    // a great-circle tilt of a small circle, given only by samples
    let samples: Vec<Vec<f64>> = (0..256)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / 256.0;
            let p = sphere_lift([0.3 * th.cos(), 0.3 * th.sin(), 0.1]).unwrap();
            p.to_vec()
        })
        .collect();
    let sampled = Arc::new(SampledCurve::new(&samples).unwrap());
    let analytic = Arc::new(AnalyticCurve::new(4, |t: CurveJet| {
        let (s, c) = t.scale(std::f64::consts::TAU).sin_cos();
        ntk_curves::geometry::sphere_lift_jet([c.scale(0.3), s.scale(0.3), CurveJet::constant(0.1)])
    }));
    let other = Arc::new(AnalyticCurve::new(4, |t: CurveJet| {
        let (s, c) = t.scale(std::f64::consts::TAU).sin_cos();
        ntk_curves::geometry::sphere_lift_jet([c.scale(0.3), s.scale(0.3), CurveJet::constant(-0.3)])
    }));
    let a = TwoCurveInstance::from_curves("a", sampled, other.clone(), 256).unwrap();
    let b = TwoCurveInstance::from_curves("b", analytic, other, 256).unwrap();
    assert!((a.plus.length - b.plus.length).abs() <= 1e-10);
    assert!((a.kappa() - b.kappa()).abs() <= 1e-6 * b.kappa());
}
