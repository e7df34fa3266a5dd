//! Small dense linear algebra: LU with partial pivoting.
//!
//! Newton systems here are 2N x 2N with N <= a few thousand, so a direct
//! factorization is the right tool; no iterative machinery needed.

use crate::scalar::Scalar;

/// Row-major dense LU factorization with partial pivoting.
pub struct LuFactors<T> {
    n: usize,
    lu: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    /// Factorize a row-major `n x n` matrix. Returns `None` if a pivot is
    /// (numerically) zero.
    pub fn factorize(mut a: Vec<T>, n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for r in (k + 1)..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > T::zero()) || !best.is_finite() {
                return None;
            }
            pivots[k] = p;
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let inv = T::one() / a[k * n + k];
            for r in (k + 1)..n {
                let factor = a[r * n + k] * inv;
                a[r * n + k] = factor;
                if factor != T::zero() {
                    for c in (k + 1)..n {
                        let akc = a[k * n + c];
                        a[r * n + c] -= factor * akc;
                    }
                }
            }
        }
        Some(Self { n, lu: a, pivots })
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        // forward substitution (unit lower)
        for r in 1..n {
            let mut s = b[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * b[c];
            }
            b[r] = s;
        }
        // back substitution
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in (r + 1)..n {
                s -= self.lu[r * n + c] * b[c];
            }
            b[r] = s / self.lu[r * n + r];
        }
    }
}
