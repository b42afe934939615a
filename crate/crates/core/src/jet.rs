//! Truncated Taylor series ("jets") used for exact derivatives.
//!
//! A `Jet<N>` stores the first `N` Taylor coefficients `c_k = f^(k)(t0) / k!` of a
//! function around an expansion point. Arithmetic propagates the coefficients, so
//! evaluating a formula on jets yields its derivatives up to order `N - 1`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet { c }
    }

    /// The identity map expanded at `t0`.
    pub fn variable(t0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = t0;
        if N > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.c {
            *v *= s;
        }
        self
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0).div(self)
    }

    pub fn div(&self, b: &Self) -> Self {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut acc = self.c[k];
            for i in 0..k {
                acc -= q[i] * b.c[k - i];
            }
            q[k] = acc / b.c[0];
        }
        Jet { c: q }
    }

    pub fn sqrt(&self) -> Self {
        let mut r = [0.0; N];
        r[0] = self.c[0].sqrt();
        for k in 1..N {
            let mut acc = self.c[k];
            for i in 1..k {
                acc -= r[i] * r[k - i];
            }
            r[k] = acc / (2.0 * r[0]);
        }
        Jet { c: r }
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..N {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                ds += w * c[k - j];
                dc -= w * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Applies an outer function given by its Taylor coefficients at `self.value()`.
    pub fn compose(&self, outer: &[f64; N]) -> Self {
        let mut d = *self;
        d.c[0] = 0.0;
        let mut acc = Jet::constant(outer[N - 1]);
        for k in (0..N - 1).rev() {
            acc = acc * d;
            acc.c[0] += outer[k];
        }
        acc
    }

    /// Jet of the derivative; the top coefficient becomes unknown and is set to zero.
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N - 1 {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    /// Antiderivative vanishing at the expansion point; the top coefficient is lost.
    pub fn integrate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c }
    }

    /// Series inverse of a map with zero constant term and nonzero slope.
    pub fn revert(&self) -> Self {
        debug_assert!(self.c[0] == 0.0);
        let slope = self.c[1];
        let id = Jet::<N>::variable(0.0);
        let mut t = id.scale(1.0 / slope);
        for _ in 0..N {
            // t <- (id - (s(t) - slope * t)) / slope
            let mut nonlinear = [0.0; N];
            nonlinear[2..].copy_from_slice(&self.c[2..]);
            let st = t.compose(&nonlinear);
            t = (id - st).scale(1.0 / slope);
        }
        t
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Jet { c }
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] += rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_sin_times_sqrt() {
        // f(t) = sin(t) * sqrt(1 + t^2) at t = 0.7, checked against hand derivatives.
        let t = Jet::<4>::variable(0.7);
        let f = t.sin() * (t * t + 1.0).sqrt();
        let (s, c) = (0.7f64.sin(), 0.7f64.cos());
        let r = (1.0f64 + 0.49).sqrt();
        let d1 = c * r + s * 0.7 / r;
        assert!((f.value() - s * r).abs() < 1e-15);
        assert!((f.derivative(1) - d1).abs() < 1e-14);
        let h = 1e-4;
        let fd = |x: f64| x.sin() * (1.0 + x * x).sqrt();
        let d2 = (fd(0.7 + h) - 2.0 * fd(0.7) + fd(0.7 - h)) / (h * h);
        assert!((f.derivative(2) - d2).abs() < 1e-6);
    }

    #[test]
    fn reversion_inverts_series() {
        // s(t) = t + 0.3 t^2 - 0.1 t^3 ; t(s(t)) == t as a series.
        let s = Jet::<6> { c: [0.0, 1.0, 0.3, -0.1, 0.02, 0.0] };
        let t = s.revert();
        let back = s.compose(&t.c);
        // compose(s) gives t(s(.)) expanded at 0
        let id = Jet::<6>::variable(0.0);
        for k in 0..6 {
            assert!((back.c[k] - id.c[k]).abs() < 1e-12, "k={k}: {:?}", back.c);
        }
    }

    #[test]
    fn division_and_recip() {
        let t = Jet::<5>::variable(0.3);
        let f = (t + 2.0).recip();
        for k in 0..5 {
            let expect = (-1.0f64).powi(k as i32) / 2.3f64.powi(k as i32 + 1);
            assert!((f.c[k] - expect).abs() < 1e-14);
        }
    }
}
