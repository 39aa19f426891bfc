//! Gauss–Legendre rules and an adaptive 1-D / nested 2-D integrator.

use std::f64::consts::PI;

use crate::scalar::{lit, Scalar};
use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "rule order must be positive");
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nt: T = lit(n as f64);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z: T = lit((PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos());
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), z);
            for k in 2..=n {
                let kt: T = lit(k as f64);
                let p2 = ((kt + kt - T::one()) * z * p1 - (kt - T::one()) * p0) / kt;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { T::one() } else { p0 };
            dp = nt * (z * pn - pn1) / (z * z - T::one());
            let dz = pn / dp;
            z = z - dz;
            if dz.abs() <= T::epsilon() * lit(4.0) {
                break;
            }
        }
        let wi = T::int(2) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    (x, w)
}

/// Fixed-order rule on [a, b].
pub fn fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    rule.0.iter().zip(&rule.1).map(|(&x, &w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Adaptive bisection comparing 10- and 20-point rules on each piece.
pub struct Adaptive {
    low: (Vec<f64>, Vec<f64>),
    high: (Vec<f64>, Vec<f64>),
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self { low: gauss_legendre(10), high: gauss_legendre(20), abs_tol: 1e-14, rel_tol: 1e-12, max_depth: 40 }
    }
}

impl Adaptive {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        let whole = fixed(&mut f, a, b, &self.high);
        let tol = self.abs_tol.max(self.rel_tol * whole.abs());
        let mut stack = vec![(a, b, 0usize, tol)];
        let mut total = 0.0;
        while let Some((lo, hi, depth, tol)) = stack.pop() {
            let g = fixed(&mut f, lo, hi, &self.low);
            let k = fixed(&mut f, lo, hi, &self.high);
            if !k.is_finite() {
                return Err(Error::Domain(format!("integrand is not finite on [{lo}, {hi}]")));
            }
            if (k - g).abs() <= tol || depth >= self.max_depth {
                if depth >= self.max_depth && (k - g).abs() > tol {
                    return Err(Error::NoConvergence(format!("adaptive quadrature stalled on [{lo}, {hi}]")));
                }
                total += k;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((lo, mid, depth + 1, tol / 2f64.sqrt()));
                stack.push((mid, hi, depth + 1, tol / 2f64.sqrt()));
            }
        }
        Ok(total)
    }

    /// ∫_0^∞ via t = s/(1 − s).
    pub fn integrate_half_line<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        self.integrate(
            |s| {
                if s >= 1.0 {
                    return 0.0;
                }
                let om = 1.0 - s;
                let v = f(s / om) / (om * om);
                if v.is_finite() { v } else { 0.0 }
            },
            0.0,
            1.0,
        )
    }

    /// ∫_0^∞ ∫_0^∞ f(y, z) dz dy by nesting.
    pub fn integrate_quadrant<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut err = None;
        let v = self.integrate_half_line(|y| match self.integrate_half_line(|z| f(y, z)) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }
}
