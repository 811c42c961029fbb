//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson).

use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct MonotoneCubic<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(invalid("interpolation needs equal, non-empty node lists"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("interpolation nodes must be strictly increasing"));
        }
        let n = xs.len();
        if n == 1 {
            return Ok(Self { xs, ys, slopes: vec![T::zero()] });
        }
        let h: Vec<T> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<T> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut m = vec![T::zero(); n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= T::zero() {
                m[i] = T::zero();
            } else {
                // weighted harmonic mean
                let w1 = T::lit(2.0) * h[i] + h[i - 1];
                let w2 = h[i] + T::lit(2.0) * h[i - 1];
                m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        for i in 0..n - 1 {
            if delta[i] == T::zero() {
                m[i] = T::zero();
                m[i + 1] = T::zero();
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > T::lit(9.0) {
                let tau = T::lit(3.0) / s.sqrt();
                m[i] = tau * a * delta[i];
                m[i + 1] = tau * b * delta[i];
            }
        }
        Ok(Self { xs, ys, slopes: m })
    }

    pub fn domain(&self) -> (T, T) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value at `x`, or `None` outside the node range.
    pub fn eval(&self, x: T) -> Option<T> {
        let (lo, hi) = self.domain();
        if x < lo || x > hi || !x.is_finite() {
            return None;
        }
        if self.xs.len() == 1 {
            return Some(self.ys[0]);
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).expect("finite")) {
            Ok(i) => return Some(self.ys[i]),
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        Some(h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1])
    }
}
