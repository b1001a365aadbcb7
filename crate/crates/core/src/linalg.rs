//! Small numerical core: 2x2 matrices for transfer-matrix products and a
//! dense symmetric eigensolver used as an independent oracle.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 2x2 real matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn diag(x: f64, y: f64) -> Self {
        Self::new(x, 0.0, 0.0, y)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Inverse; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Self::new(
            self.d / det,
            -self.b / det,
            -self.c / det,
            self.a / det,
        ))
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::IDENTITY, |acc, _| *self * acc)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|x| x.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

/// Operator norm (largest singular value), from the eigenvalues of `M^T M`.
pub fn sl2_norm(m: &Mat2) -> f64 {
    let s = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
    let det = m.det().abs();
    // s^2 - 4 det^2 factored to keep precision when the singular values are close
    let disc = ((s - 2.0 * det).max(0.0) * (s + 2.0 * det)).sqrt();
    (0.5 * (s + disc)).sqrt()
}

/// Dense square matrix in row-major storage.
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

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    /// Symmetric tridiagonal matrix with the given diagonal and off-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, diag[i]);
            if i + 1 < n {
                m.set(i, i + 1, off[i]);
                m.set(i + 1, i, off[i]);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn off_diagonal_mass(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j) * self.get(i, j);
                }
            }
        }
        s.sqrt()
    }
}

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending. Sweeps stop once the off-diagonal Frobenius mass is
/// below `tol * ||A||_F`.
pub fn symmetric_eigenvalues_dense(a: &DenseMatrix, tol: f64) -> Result<Vec<f64>> {
    let asym = a.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let n = a.size();
    let mut m = a.clone();
    let scale = m.frobenius();
    if n == 0 {
        return Ok(Vec::new());
    }
    let target = tol * scale;

    for _ in 0..MAX_SWEEPS {
        if m.off_diagonal_mass() <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                m.set(p, p, app - t * apq);
                m.set(q, q, aqq + t * apq);
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m.get(r, p);
                    let arq = m.get(r, q);
                    let nrp = arp - s * (arq + tau * arp);
                    let nrq = arq + s * (arp - tau * arq);
                    m.set(r, p, nrp);
                    m.set(p, r, nrp);
                    m.set(r, q, nrq);
                    m.set(q, r, nrq);
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let m = DenseMatrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let e = symmetric_eigenvalues_dense(&m, 1e-14).unwrap();
        assert_eq!(e, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn star_graph_eigenvalues() {
        let m = DenseMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let e = symmetric_eigenvalues_dense(&m, 1e-14).unwrap();
        let r2 = 2f64.sqrt();
        assert!(
            close(e[0], -r2, 1e-12) && close(e[1], 0.0, 1e-12) && close(e[2], r2, 1e-12),
            "{e:?}"
        );
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]).unwrap();
        assert!(matches!(
            symmetric_eigenvalues_dense(&m, 1e-12),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn free_chain_matches_cosine_formula() {
        let n = 40;
        let m = DenseMatrix::tridiagonal(&vec![0.0; n], &vec![1.0; n - 1]);
        let e = symmetric_eigenvalues_dense(&m, 1e-15).unwrap();
        let mut exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&exact) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn sl2_norm_examples() {
        assert!(close(sl2_norm(&Mat2::IDENTITY), 1.0, 1e-15));
        for c in [1.0, 1.5, 7.0, 1e6] {
            assert!(close(sl2_norm(&Mat2::diag(c, 1.0 / c)), c, 1e-12 * c));
        }
        let rot = Mat2::new(0.6, -0.8, 0.8, 0.6);
        assert!(close(sl2_norm(&rot), 1.0, 1e-15));
    }

    #[test]
    fn mat2_algebra() {
        let m = Mat2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(m.det(), -2.0);
        let inv = m.inverse().unwrap();
        assert!((m * inv).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        assert_eq!(m.transpose(), Mat2::new(1.0, 3.0, 2.0, 4.0));
        assert_eq!(m.pow(0), Mat2::IDENTITY);
        assert_eq!(m.pow(2), m * m);
        assert_eq!(m.apply([1.0, 1.0]), [3.0, 7.0]);
        assert!(Mat2::new(1.0, 1.0, 1.0, 1.0).inverse().is_none());
    }

    fn sl2() -> impl Strategy<Value = Mat2> {
        // d is solved from a d - b c = 1, so |a| is kept away from zero
        (0.2f64..3.0, prop::bool::ANY, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, neg, b, c)| {
            let a = if neg { -a } else { a };
            Mat2::new(a, b, c, (1.0 + b * c) / a)
        })
    }

    proptest! {
        #[test]
        fn sl2_norm_of_inverse(m in sl2()) {
            let n = sl2_norm(&m);
            let ni = sl2_norm(&m.inverse().unwrap());
            prop_assert!(n >= 1.0 - 1e-12);
            prop_assert!((n * ni - n * n).abs() <= 1e-9 * n * n);
        }

        #[test]
        fn sl2_norm_is_submultiplicative(a in sl2(), b in sl2()) {
            prop_assert!(sl2_norm(&(a * b)) <= sl2_norm(&a) * sl2_norm(&b) * (1.0 + 1e-12));
        }

        #[test]
        fn dense_eigenvalues_preserve_trace(entries in prop::collection::vec(-2.0f64..2.0, 36)) {
            let n = 6;
            let mut m = DenseMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    m.set(i, j, entries[i * n + j]);
                    m.set(j, i, entries[i * n + j]);
                }
            }
            let e = symmetric_eigenvalues_dense(&m, 1e-14).unwrap();
            prop_assert!((e.iter().sum::<f64>() - m.trace()).abs() <= 1e-10);
            let sq: f64 = e.iter().map(|x| x * x).sum();
            prop_assert!((sq - m.frobenius().powi(2)).abs() <= 1e-9);
        }
    }
}
