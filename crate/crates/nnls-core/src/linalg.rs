//! Tridiagonal systems.

use crate::real::Real;

/// Tridiagonal matrix; `lower[i]` couples row i+1 to column i, `upper[i]` row i to column i+1.
#[derive(Clone, Debug)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y = y + self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y = y + self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Thomas algorithm. Returns `None` on a vanishing or non-finite pivot.
    pub fn solve(&self, rhs: &[T]) -> Option<Vec<T>> {
        let n = self.len();
        if n == 0 {
            return Some(Vec::new());
        }
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        let tiny = T::min_positive_value();
        let mut piv = self.diag[0];
        if piv.abs() <= tiny || !piv.is_finite() {
            return None;
        }
        if n > 1 {
            c[0] = self.upper[0] / piv;
        }
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if piv.abs() <= tiny || !piv.is_finite() {
                return None;
            }
            if i + 1 < n {
                c[i] = self.upper[i] / piv;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] = d[i] - c[i] * d[i + 1];
        }
        Some(d)
    }

    /// Number of negative eigenvalues of a symmetric tridiagonal matrix (Sturm count at 0).
    /// `lower` is used as the off-diagonal; the matrix must be symmetric.
    pub fn negative_count(&self) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut q = self.diag[0];
        let eps = T::epsilon();
        for i in 0..n {
            if i > 0 {
                let b = self.lower[i - 1];
                let prev = if q == T::zero() { eps } else { q };
                q = self.diag[i] - b * b / prev;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }
}
