//! The angle evolution map of a random ReLU layer and its iterates.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Taylor coefficients of the angle evolution map at zero, through t^13.
const SERIES_AT_ZERO: [f64; 14] = [
    0.0,
    1.0,
    -0.106_103_295_394_596_890_51,
    -0.005_628_954_646_796_542_858_0,
    -0.007_670_803_663_958_301_759_8,
    0.001_046_578_103_320_077_590_2,
    -0.000_605_804_937_069_906_260_42,
    0.000_287_456_269_182_757_089_52,
    -0.000_085_338_013_172_040_714_355,
    0.000_048_125_731_078_911_478_878,
    -0.000_017_541_711_371_326_426_127,
    7.976_424_870_415_742_515_9e-6,
    -3.555_865_102_001_172_608_6e-6,
    1.498_129_514_100_429_231_0e-6,
];

/// Below this angle the truncated series is accurate to ~1e-19 relative.
const SERIES_CUTOFF: f64 = 0.1;

fn check_angle(t: f64) -> Result<()> {
    if !(0.0..=PI).contains(&t) {
        return Err(Error::domain(format!("angle {t} outside [0, pi]")));
    }
    Ok(())
}

/// `1 - ((1 - t/pi) cos t + sin t / pi)` without cancellation for small `t`.
fn one_minus_cosine(t: f64) -> f64 {
    let half = (0.5 * t).sin();
    let tail = if t < 0.5 {
        // t cos t - sin t = sum_k (-1)^k 2k t^(2k+1) / (2k+1)!
        let t2 = t * t;
        let mut term = t; // t^(2k+1)/(2k+1)! at k = 0
        let mut sum = 0.0;
        for k in 1..12 {
            term *= t2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            let s = if k % 2 == 1 { -1.0 } else { 1.0 };
            sum += s * (2 * k) as f64 * term;
        }
        sum
    } else {
        t * t.cos() - t.sin()
    };
    2.0 * half * half + tail / PI
}

/// Number of series terms needed for ~1e-18 relative accuracy at `t < SERIES_CUTOFF`.
#[inline]
fn series_terms(t: f64) -> usize {
    if t < 1e-3 {
        6
    } else if t < 1e-2 {
        8
    } else {
        SERIES_AT_ZERO.len()
    }
}

#[inline]
fn series_value(t: f64) -> f64 {
    let mut acc = 0.0;
    for &c in SERIES_AT_ZERO[..series_terms(t)].iter().rev() {
        acc = acc * t + c;
    }
    acc
}

#[inline]
fn series_slope(t: f64) -> f64 {
    let mut acc = 0.0;
    for k in (1..series_terms(t)).rev() {
        acc = acc * t + k as f64 * SERIES_AT_ZERO[k];
    }
    acc
}

/// phi(t) = acos((1 - t/pi) cos t + sin t / pi), evaluated without the
/// precision loss of `acos` near 1. Input is assumed to lie in [0, pi].
#[inline]
pub(crate) fn phi(t: f64) -> f64 {
    if t < SERIES_CUTOFF {
        return series_value(t);
    }
    let omc = one_minus_cosine(t);
    2.0 * (0.5 * omc).sqrt().min(1.0).asin()
}

/// Value and first derivative of phi.
#[inline]
pub(crate) fn phi_with_slope(t: f64) -> (f64, f64) {
    if t < 1e-3 {
        let c = &SERIES_AT_ZERO;
        let v = t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let d = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        return (v, d);
    }
    if t < SERIES_CUTOFF {
        return (series_value(t), series_slope(t));
    }
    let p = phi(t);
    (p, (1.0 - t / PI) * t.sin() / p.sin())
}

/// Taylor coefficients of phi at `u` through order `N - 1`.
pub(crate) fn phi_taylor<const N: usize>(u: f64) -> [f64; N] {
    let mut out = [0.0; N];
    if u < 1e-3 {
        // Re-expand the series at zero around u.
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in (k..SERIES_AT_ZERO.len()).rev() {
                acc = acc * u + SERIES_AT_ZERO[j] * binomial(j, k);
            }
            *o = acc;
        }
        return out;
    }
    // phi' sin(phi) = h with h(t) = (1 - t/pi) sin t; solve order by order.
    let t = Jet::<N>::variable(u);
    let h = (Jet::constant(1.0) - t.scale(1.0 / PI)) * t.sin();
    out[0] = phi(u);
    for k in 0..N - 1 {
        let s = Jet { c: out }.sin();
        let q = h.div(&s);
        out[k + 1] = q.c[k] / (k + 1) as f64;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    // only called for n <= 13
    let mut r = 1.0;
    for i in 0..k {
        r *= (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// One step of the angle evolution.
pub fn angle_evolution(t: f64) -> Result<f64> {
    check_angle(t)?;
    Ok(phi(t))
}

/// `level`-fold composition of the angle evolution; level 0 is the identity.
pub fn iterated_angle_evolution(t: f64, level: usize) -> Result<f64> {
    check_angle(t)?;
    let mut a = t;
    for _ in 0..level {
        a = phi(a);
    }
    Ok(a)
}

/// The fluid surrogate t / (1 + level t / (3 pi)) that upper-bounds the iterates.
pub fn hat_iterated_angle(t: f64, level: usize) -> f64 {
    t / (1.0 + level as f64 * t / (3.0 * PI))
}

/// The matching lower fluid bound t / (1 + level t / pi).
pub fn fluid_lower_bound(t: f64, level: usize) -> f64 {
    t / (1.0 + level as f64 * t / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_values() {
        assert_eq!(angle_evolution(0.0).unwrap(), 0.0);
        assert!((angle_evolution(PI).unwrap() - PI / 2.0).abs() < 1e-15);
        let mid = angle_evolution(PI / 2.0).unwrap();
        assert!((mid - (1.0 / PI).acos()).abs() < 1e-14);
        assert!((mid - 1.246_850_219_862_9).abs() < 1e-12, "{mid}");
    }

    #[test]
    fn matches_naive_formula_away_from_zero() {
        for i in 1..200 {
            let t = PI * i as f64 / 200.0;
            let naive = ((1.0 - t / PI) * t.cos() + t.sin() / PI).acos();
            assert!((phi(t) - naive).abs() < 1e-12 * (1.0 + 1.0 / t), "t={t}");
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_cutoff() {
        let t = SERIES_CUTOFF;
        let omc = one_minus_cosine(t);
        let closed = 2.0 * (0.5 * omc).sqrt().asin();
        assert!((series_value(t) - closed).abs() < 1e-16);
        let slope = (1.0 - t / PI) * t.sin() / closed.sin();
        assert!((series_slope(t) - slope).abs() < 1e-13);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        assert!(angle_evolution(-0.1).is_err());
        assert!(angle_evolution(3.2).is_err());
        assert!(iterated_angle_evolution(4.0, 2).is_err());
    }

    #[test]
    fn iterates_identity_and_pi() {
        assert_eq!(iterated_angle_evolution(0.7, 0).unwrap(), 0.7);
        assert!((iterated_angle_evolution(PI, 1).unwrap() - PI / 2.0).abs() < 1e-15);
        let v = iterated_angle_evolution(1.0, 10).unwrap();
        assert!(v >= 1.0 / (1.0 + 10.0 / PI) && v <= 1.0 / (1.0 + 10.0 / (3.0 * PI)));
    }

    #[test]
    fn taylor_coefficients_match_finite_differences() {
        for &u in &[5e-4, 0.02, 0.3, 1.4, 2.9, PI] {
            let c = phi_taylor::<4>(u);
            assert!((c[0] - phi(u)).abs() < 1e-15);
            let h = 1e-5;
            let lo = (u - h).max(0.0);
            let hi = (u + h).min(PI);
            let d1 = (phi(hi) - phi(lo)) / (hi - lo);
            assert!((c[1] - d1).abs() < 1e-8, "u={u}: {} vs {d1}", c[1]);
        }
        let c0 = phi_taylor::<4>(0.0);
        assert!((c0[2] * 2.0 + 2.0 / (3.0 * PI)).abs() < 1e-15);
    }
}
