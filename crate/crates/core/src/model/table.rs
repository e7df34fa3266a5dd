//! Monotone cubic (Fritsch-Carlson) interpolation for custom-table families.

use crate::error::ModelError;
use crate::scalar::{cast, Scalar};

/// Shape-preserving cubic Hermite interpolant through strictly increasing data.
#[derive(Debug, Clone)]
pub struct MonotoneTable<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
    /// cumulative integral of the interpolant from `xs[0]` to `xs[i]`
    cum: Vec<T>,
}

impl<T: Scalar> MonotoneTable<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self, ModelError> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(ModelError::TableTooShort);
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ModelError::Invalid("table abscissae not increasing".into()));
            }
        }
        for w in ys.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ModelError::NonMonotoneTable);
            }
        }
        let n = xs.len();
        let h: Vec<T> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        let delta: Vec<T> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut slopes = vec![T::zero(); n];
        let three = cast::<T>(3.0);
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= T::zero() {
                slopes[i] = T::zero();
            } else {
                let w1 = cast::<T>(2.0) * h[i] + h[i - 1];
                let w2 = h[i] + cast::<T>(2.0) * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let end_slope = |h0: T, h1: T, d0: T, d1: T| -> T {
            let mut d = ((cast::<T>(2.0) * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if d * d0 <= T::zero() {
                d = T::zero();
            } else if d.abs() > three * d0.abs() {
                d = three * d0;
            }
            d
        };
        slopes[0] = end_slope(h[0], *h.get(1).unwrap_or(&h[0]), delta[0], *delta.get(1).unwrap_or(&delta[0]));
        slopes[n - 1] = end_slope(
            h[n - 2],
            *h.get(n.wrapping_sub(3)).unwrap_or(&h[n - 2]),
            delta[n - 2],
            *delta.get(n.wrapping_sub(3)).unwrap_or(&delta[n - 2]),
        );

        // exact integrals of the cubic segments
        let half = cast::<T>(0.5);
        let twelfth = cast::<T>(1.0 / 12.0);
        let mut cum = vec![T::zero(); n];
        for i in 0..n - 1 {
            let seg = h[i]
                * (half * (ys[i] + ys[i + 1]) + twelfth * h[i] * (slopes[i] - slopes[i + 1]));
            cum[i + 1] = cum[i] + seg;
        }

        Ok(Self { xs, ys, slopes, cum })
    }

    fn segment(&self, s: T) -> usize {
        let n = self.xs.len();
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Interpolated value; linear extension outside the table range.
    pub fn eval(&self, s: T) -> T {
        let n = self.xs.len();
        if s <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (s - self.xs[0]);
        }
        if s >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (s - self.xs[n - 1]);
        }
        let i = self.segment(s);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (s - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = cast::<T>(2.0);
        let three = cast::<T>(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn eval_prime(&self, s: T) -> T {
        let n = self.xs.len();
        if s <= self.xs[0] {
            return self.slopes[0];
        }
        if s >= self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        let i = self.segment(s);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (s - self.xs[i]) / h;
        let t2 = t * t;
        let two = cast::<T>(2.0);
        let three = cast::<T>(3.0);
        let four = cast::<T>(4.0);
        let six = cast::<T>(6.0);
        let dh00 = six * t2 - six * t;
        let dh10 = three * t2 - four * t + T::one();
        let dh01 = -six * t2 + six * t;
        let dh11 = three * t2 - two * t;
        (dh00 * self.ys[i] + dh01 * self.ys[i + 1]) / h + dh10 * self.slopes[i] + dh11 * self.slopes[i + 1]
    }

    /// Integral of the interpolant from `a` to `s`.
    pub fn integral_from(&self, a: T, s: T) -> T {
        self.antiderivative(s) - self.antiderivative(a)
    }

    fn antiderivative(&self, s: T) -> T {
        let n = self.xs.len();
        if s <= self.xs[0] {
            let d = s - self.xs[0];
            return self.ys[0] * d + self.slopes[0] * d * d * cast::<T>(0.5);
        }
        if s >= self.xs[n - 1] {
            let d = s - self.xs[n - 1];
            return self.cum[n - 1] + self.ys[n - 1] * d + self.slopes[n - 1] * d * d * cast::<T>(0.5);
        }
        let i = self.segment(s);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (s - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let half = cast::<T>(0.5);
        let ih00 = half * t4 - t3 + t;
        let ih10 = cast::<T>(0.25) * t4 - cast::<T>(2.0 / 3.0) * t3 + half * t2;
        let ih01 = -half * t4 + t3;
        let ih11 = cast::<T>(0.25) * t4 - cast::<T>(1.0 / 3.0) * t3;
        self.cum[i]
            + h * (ih00 * self.ys[i]
                + ih10 * h * self.slopes[i]
                + ih01 * self.ys[i + 1]
                + ih11 * h * self.slopes[i + 1])
    }
}
