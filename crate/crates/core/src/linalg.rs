//! Symmetric positive-definite solvers.
//!
//! [`SkylineMatrix`] stores each column from its first structural nonzero
//! down to the diagonal, the classic profile layout for stiffness matrices.
//! Cholesky fill stays inside that envelope. [`DenseMatrix`] is the plain
//! row-major counterpart, kept for small systems and cross-checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Pivots below this fraction of the original diagonal are treated as
/// singular.
const PIVOT_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Lower-triangular `L` with `A = L Lᵀ`, reading the lower triangle.
    pub fn cholesky(&self) -> Result<DenseCholesky> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > PIVOT_RATIO * libm::fabs(self.get(j, j))) || !d.is_finite() {
                return Err(Error::Factorization { equation: j, pivot: d });
            }
            let djj = libm::sqrt(d);
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(DenseCholesky { n, l })
    }
}

#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

/// Symmetric matrix in column profile storage (upper triangle).
#[derive(Debug, Clone, PartialEq)]
pub struct SkylineMatrix {
    /// First stored row of each column.
    first: Vec<usize>,
    /// Start of each column in `values`; one extra entry at the end.
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineMatrix {
    /// Empty matrix whose column `j` holds rows `first[j]..=j`.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(first.len() + 1);
        let mut total = 0;
        for (j, &f) in first.iter().enumerate() {
            debug_assert!(f <= j);
            offsets.push(total);
            total += j - f + 1;
        }
        offsets.push(total);
        Self {
            first,
            offsets,
            values: vec![0.0; total],
        }
    }

    pub fn size(&self) -> usize {
        self.first.len()
    }

    /// Stored entries, diagonal included.
    pub fn stored(&self) -> usize {
        self.values.len()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        if r < self.first[c] {
            None
        } else {
            Some(self.offsets[c] + r - self.first[c])
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds to the symmetric pair `(i, j)`, `(j, i)`. Panics outside the
    /// profile.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let k = self.slot(i, j).expect("entry outside the skyline profile");
        self.values[k] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        let mut y = vec![0.0; n];
        for j in 0..n {
            let base = self.offsets[j];
            for i in self.first[j]..j {
                let a = self.values[base + i - self.first[j]];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[j] += self.values[self.offsets[j + 1] - 1] * x[j];
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.size();
        let mut d = DenseMatrix::zeros(n);
        for j in 0..n {
            for i in self.first[j]..=j {
                let v = self.get(i, j);
                d.set(i, j, v);
                d.set(j, i, v);
            }
        }
        d
    }

    /// `A = Uᵀ U` with `U` upper triangular in the same profile.
    pub fn cholesky(&self) -> Result<SkylineCholesky> {
        let n = self.size();
        let mut u = self.clone();
        for j in 0..n {
            let fj = u.first[j];
            let bj = u.offsets[j];
            for i in fj..j {
                let fi = u.first[i];
                let bi = u.offsets[i];
                let k0 = fi.max(fj);
                let mut s = u.values[bj + i - fj];
                for k in k0..i {
                    s -= u.values[bi + k - fi] * u.values[bj + k - fj];
                }
                let uii = u.values[u.offsets[i + 1] - 1];
                u.values[bj + i - fj] = s / uii;
            }
            let diag = bj + j - fj;
            let original = u.values[diag];
            let mut d = original;
            for k in fj..j {
                let v = u.values[bj + k - fj];
                d -= v * v;
            }
            if !(d > PIVOT_RATIO * libm::fabs(original)) || !d.is_finite() {
                return Err(Error::Factorization { equation: j, pivot: d });
            }
            u.values[diag] = libm::sqrt(d);
        }
        Ok(SkylineCholesky { factor: u })
    }
}

#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    factor: SkylineMatrix,
}

impl SkylineCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let u = &self.factor;
        let n = u.size();
        let mut x = b.to_vec();
        // Uᵀ y = b
        for j in 0..n {
            let (fj, bj) = (u.first[j], u.offsets[j]);
            let mut s = x[j];
            for k in fj..j {
                s -= u.values[bj + k - fj] * x[k];
            }
            x[j] = s / u.values[bj + j - fj];
        }
        // U x = y
        for j in (0..n).rev() {
            let (fj, bj) = (u.first[j], u.offsets[j]);
            x[j] /= u.values[bj + j - fj];
            let xj = x[j];
            for k in fj..j {
                x[k] -= u.values[bj + k - fj] * xj;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tridiagonal plus one long-range coupling, SPD by diagonal dominance.
    fn sample() -> SkylineMatrix {
        let n = 7;
        let mut first: Vec<usize> = (0..n).map(|j: usize| j.saturating_sub(1)).collect();
        first[6] = 2;
        let mut m = SkylineMatrix::with_profile(first);
        for j in 0..n {
            m.add(j, j, 4.0 + j as f64);
            if j > 0 {
                m.add(j - 1, j, -1.0);
            }
        }
        m.add(2, 6, 0.5);
        m
    }

    #[test]
    fn skyline_storage() {
        let m = sample();
        assert_eq!(m.get(6, 2), 0.5);
        assert_eq!(m.get(0, 6), 0.0);
        assert_eq!(m.stored(), 1 + 2 * 5 + 5);
        let d = m.to_dense();
        let x: Vec<f64> = (0..7).map(|k| k as f64 - 2.5).collect();
        assert_eq!(m.mul_vec(&x), d.mul_vec(&x));
    }

    #[test]
    fn skyline_and_dense_solves_agree() {
        let m = sample();
        let b: Vec<f64> = (0..7).map(|k| (k * k) as f64 - 3.0).collect();
        let xs = m.cholesky().unwrap().solve(&b);
        let xd = m.to_dense().cholesky().unwrap().solve(&b);
        for (a, c) in xs.iter().zip(&xd) {
            assert!(libm::fabs(a - c) < 1e-14);
        }
        let r = m.mul_vec(&xs);
        for (a, c) in r.iter().zip(&b) {
            assert!(libm::fabs(a - c) < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = SkylineMatrix::with_profile(alloc::vec![0, 0]);
        m.add(0, 0, 1.0);
        m.add(0, 1, 1.0);
        m.add(1, 1, 1.0);
        assert!(matches!(m.cholesky(), Err(Error::Factorization { equation: 1, .. })));
        assert!(matches!(
            m.to_dense().cholesky(),
            Err(Error::Factorization { equation: 1, .. })
        ));
        let mut neg = SkylineMatrix::with_profile(alloc::vec![0]);
        neg.add(0, 0, -2.0);
        assert!(neg.cholesky().is_err());
    }
}
