//! The half-line Jacobi operator with zero diagonal and off-diagonal
//! entries `sqrt(w_n)`, its finite windows, characteristic minors, Green's
//! functions, and a Sturm-bisection / inverse-iteration eigensolver.
//!
//! Site `n` of the half line couples to site `n + 1` through `sqrt(w_n)`.
//! A [`TruncatedJacobi`] is the restriction to a window of consecutive
//! sites; the default window for an `n`-site truncation is `[1, n]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomness::BranchingSequence;

/// First site of the default truncation window `[1, n]`.
pub const DEFAULT_WINDOW_START: usize = 1;

/// Overall sign relating the minor formula to `(J - E)^{-1}`: the minors are
/// determinants of `E - J`, the Green's function inverts `J - E`.
pub const GREEN_SIGN: f64 = -1.0;

/// Half-line operator `[Ju](0) = sqrt(w_0) u(1)`,
/// `[Ju](n) = sqrt(w_{n-1}) u(n-1) + sqrt(w_n) u(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOperator {
    seq: BranchingSequence,
}

impl JacobiOperator {
    pub fn new(seq: BranchingSequence) -> Self {
        Self { seq }
    }

    pub fn sequence(&self) -> &BranchingSequence {
        &self.seq
    }

    /// Off-diagonal entry between sites `n` and `n + 1`.
    pub fn off_diagonal(&self, n: usize) -> f64 {
        f64::from(self.seq.get(n)).sqrt()
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        jacobi_apply(&self.seq, u)
    }

    /// Restriction to sites `[start, start + n)`.
    pub fn window(&self, start: usize, n: usize) -> Result<TruncatedJacobi> {
        TruncatedJacobi::window(&self.seq, start, n)
    }

    /// Restriction to sites `[1, n]`.
    pub fn truncation(&self, n: usize) -> Result<TruncatedJacobi> {
        TruncatedJacobi::truncation(&self.seq, n)
    }
}

/// Applies the half-line operator to a finite vector; the last row drops
/// the coupling to the site beyond the vector.
pub fn jacobi_apply(seq: &BranchingSequence, u: &[f64]) -> Result<Vec<f64>> {
    let len = u.len();
    if len == 0 {
        return Ok(Vec::new());
    }
    if seq.len() + 1 < len {
        return Err(Error::SequenceTooShort {
            needed: len - 1,
            len: seq.len(),
        });
    }
    let a = |n: usize| f64::from(seq.get(n)).sqrt();
    Ok((0..len)
        .map(|n| {
            let mut acc = 0.0;
            if n > 0 {
                acc += a(n - 1) * u[n - 1];
            }
            if n + 1 < len {
                acc += a(n) * u[n + 1];
            }
            acc
        })
        .collect())
}

/// Symmetric tridiagonal matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedJacobi {
    off: Vec<f64>,
    off_sq: Vec<f64>,
}

impl TruncatedJacobi {
    /// From squared off-diagonal entries (the branching values).
    pub fn from_squares(off_sq: Vec<f64>) -> Self {
        Self {
            off: off_sq.iter().map(|w| w.sqrt()).collect(),
            off_sq,
        }
    }

    /// Restriction of the half-line operator to sites `[start, start + n)`.
    pub fn window(seq: &BranchingSequence, start: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "truncation size must be at least 1".into(),
            ));
        }
        let end = start + n - 1;
        if end > seq.len() {
            return Err(Error::SequenceTooShort {
                needed: end,
                len: seq.len(),
            });
        }
        Ok(Self::from_squares(
            seq.values()[start..end]
                .iter()
                .map(|&w| f64::from(w))
                .collect(),
        ))
    }

    /// Restriction to sites `[1, n]`.
    pub fn truncation(seq: &BranchingSequence, n: usize) -> Result<Self> {
        Self::window(seq, DEFAULT_WINDOW_START, n)
    }

    pub fn size(&self) -> usize {
        self.off.len() + 1
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    /// Largest squared off-diagonal entry, at least 1.
    pub fn max_square(&self) -> f64 {
        self.off_sq.iter().copied().fold(1.0, f64::max)
    }

    /// Gershgorin radius: every eigenvalue lies in `[-r, r]`.
    pub fn gershgorin(&self) -> f64 {
        let n = self.size();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1] } else { 0.0 };
                let r = if i + 1 < n { self.off[i] } else { 0.0 };
                l + r
            })
            .fold(0.0, f64::max)
    }

    /// Default bisection tolerance `1e-10 * 2 sqrt(d)`.
    pub fn default_tol(&self) -> f64 {
        1e-10 * 2.0 * self.max_square().sqrt()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                if i > 0 {
                    acc += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> crate::linalg::DenseMatrix {
        crate::linalg::DenseMatrix::tridiagonal(&vec![0.0; self.size()], &self.off)
    }
}

/// Number of eigenvalues strictly below `lambda` (negative pivots of the
/// LDL^T factorization of `T - lambda`).
pub fn sturm_count(t: &TruncatedJacobi, lambda: f64) -> usize {
    const PIVOT_GUARD: f64 = 1e-300;
    let mut q = -lambda;
    let mut count = usize::from(q < 0.0);
    for &w in &t.off_sq {
        let safe = if q.abs() < PIVOT_GUARD {
            if q < 0.0 {
                -PIVOT_GUARD
            } else {
                PIVOT_GUARD
            }
        } else {
            q
        };
        q = -lambda - w / safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues, ascending, each to within `tol`.
pub fn tridiag_eigenvalues(t: &TruncatedJacobi, tol: f64) -> Vec<f64> {
    let r = t.gershgorin() + 1.0;
    eigenvalues_in_interval(t, -r, r, tol)
}

/// Eigenvalues in `[lo, hi)`, ascending, each to within `tol`.
pub fn eigenvalues_in_interval(t: &TruncatedJacobi, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let tol = tol.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
    let (clo, chi) = (sturm_count(t, lo), sturm_count(t, hi));
    let mut out = Vec::with_capacity(chi.saturating_sub(clo));
    bisect(t, lo, hi, clo, chi, tol, &mut out);
    out
}

const PARALLEL_SPLIT: usize = 256;

fn bisect(
    t: &TruncatedJacobi,
    lo: f64,
    hi: f64,
    clo: usize,
    chi: usize,
    tol: f64,
    out: &mut Vec<f64>,
) {
    if chi <= clo {
        return;
    }
    if hi - lo <= tol {
        let mid = 0.5 * (lo + hi);
        out.extend(std::iter::repeat_n(mid, chi - clo));
        return;
    }
    let mid = 0.5 * (lo + hi);
    let cmid = sturm_count(t, mid);
    #[cfg(feature = "parallel")]
    if chi - clo >= PARALLEL_SPLIT && cmid > clo && chi > cmid {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        rayon::join(
            || bisect(t, lo, mid, clo, cmid, tol, &mut left),
            || bisect(t, mid, hi, cmid, chi, tol, &mut right),
        );
        out.append(&mut left);
        out.append(&mut right);
        return;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = PARALLEL_SPLIT;
    bisect(t, lo, mid, clo, cmid, tol, out);
    bisect(t, mid, hi, cmid, chi, tol, out);
}

/// LU factorization with partial pivoting of a general tridiagonal matrix
/// (sub-diagonal `dl`, diagonal `d`, super-diagonal `du`).
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Self {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    /// `log |det|`, or `None` when a pivot vanishes.
    pub fn log_abs_det(&self) -> Option<f64> {
        self.d
            .iter()
            .try_fold(0.0, |acc, &p| (p != 0.0).then(|| acc + p.abs().ln()))
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, p| m.min(p.abs()))
    }

    /// Replaces exactly vanishing pivots by `eps` (inverse iteration).
    pub fn regularize(&mut self, eps: f64) {
        for p in &mut self.d {
            if *p == 0.0 {
                *p = eps;
            }
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn shifted_lu(t: &TruncatedJacobi, shift: f64) -> TridiagLu {
    TridiagLu::factor(t.off.clone(), vec![-shift; t.size()], t.off.clone())
}

const MAX_INVERSE_ITERATIONS: usize = 20;
/// Residual bound `||T v - lambda' v||` demanded of returned eigenvectors.
pub const EIGENVECTOR_RESIDUAL: f64 = 1e-8;

fn start_vector(n: usize) -> Vec<f64> {
    // deterministic, with no special alignment to the free-chain modes
    (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract())
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn rayleigh_residual(t: &TruncatedJacobi, v: &[f64]) -> (f64, f64) {
    let tv = t.apply(v);
    let rq: f64 = tv.iter().zip(v).map(|(a, b)| a * b).sum();
    let res = tv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - rq * b).powi(2))
        .sum::<f64>()
        .sqrt();
    (rq, res)
}

/// Unit eigenvector for the eigenvalue closest to `lambda`.
pub fn eigenvector_inverse_iteration(t: &TruncatedJacobi, lambda: f64) -> Result<Vec<f64>> {
    eigenvector_deflated(t, lambda, &[])
}

/// Inverse iteration with every iterate orthogonalized against `previous`
/// (unit vectors), for eigenvalue clusters.
pub fn eigenvector_deflated(
    t: &TruncatedJacobi,
    lambda: f64,
    previous: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let n = t.size();
    let scale = t.max_square().sqrt();
    let shift = lambda + 1e-12 * scale;
    let mut lu = shifted_lu(t, shift);
    lu.regularize(f64::EPSILON * scale);
    let mut v = start_vector(n);
    let orthogonalize = |v: &mut [f64]| {
        for p in previous {
            let c: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p).for_each(|(a, b)| *a -= c * b);
        }
    };
    orthogonalize(&mut v);
    normalize(&mut v);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        lu.solve(&mut v);
        orthogonalize(&mut v);
        if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
            break;
        }
        residual = rayleigh_residual(t, &v).1;
        if residual <= 1e-3 * EIGENVECTOR_RESIDUAL * scale {
            break;
        }
    }
    if residual <= EIGENVECTOR_RESIDUAL {
        Ok(v)
    } else {
        Err(Error::NoConvergence { residual })
    }
}

/// Orthonormal eigenvectors for a list of eigenvalues, deflating within
/// clusters whose gaps are below `2 * tol`.
pub fn eigenvectors(t: &TruncatedJacobi, lambdas: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    let mut cluster_start = 0;
    for (i, &lambda) in lambdas.iter().enumerate() {
        if i > 0 && (lambda - lambdas[i - 1]).abs() >= 2.0 * tol {
            cluster_start = i;
        }
        let v = eigenvector_deflated(t, lambda, &out[cluster_start..i])?;
        out.push(v);
    }
    Ok(out)
}

/// Leading principal minors `D_0, ..., D_n` of `E - J` on the window of
/// sites `[start, start + n)`, with `D_0 = 1`.
pub fn minors_window(
    seq: &BranchingSequence,
    start: usize,
    energy: f64,
    n: usize,
) -> Result<Vec<f64>> {
    if n > 0 && start + n - 1 > seq.len() {
        return Err(Error::SequenceTooShort {
            needed: start + n - 1,
            len: seq.len(),
        });
    }
    let mut d = Vec::with_capacity(n + 1);
    d.push(1.0);
    if n >= 1 {
        d.push(energy);
    }
    for k in 2..=n {
        let w = f64::from(seq.get(start + k - 2));
        d.push(energy * d[k - 1] - w * d[k - 2]);
    }
    Ok(d)
}

/// Minors of `E - J` on `[1, k]`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSequence {
    pub energy: f64,
    pub values: Vec<f64>,
}

impl PolynomialSequence {
    /// `D_n = det(E - J)` on `[1, n]`.
    pub fn determinant(&self) -> f64 {
        *self.values.last().expect("D_0 always present")
    }
}

/// `D_0 = 1`, `D_1 = E`, `D_k = E D_{k-1} - w_{k-1} D_{k-2}`.
pub fn char_poly_seq(seq: &BranchingSequence, energy: f64, n: usize) -> Result<PolynomialSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "polynomial sequence needs n >= 1".into(),
        ));
    }
    Ok(PolynomialSequence {
        energy,
        values: minors_window(seq, DEFAULT_WINDOW_START, energy, n)?,
    })
}

fn check_sites(n: usize, j: usize, k: usize) -> Result<()> {
    if n == 0 || j == 0 || k == 0 || j > n || k > n {
        return Err(Error::IndexOutOfRange(format!(
            "sites ({j}, {k}) outside [1, {n}]"
        )));
    }
    Ok(())
}

/// A pivot of `J - E` below this fraction of `|E| + ||J||` counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Column `k` (1-based) of `(J - E)^{-1}` for the truncation to `[1, n]`,
/// by a pivoted tridiagonal solve.
pub fn green_column(seq: &BranchingSequence, n: usize, energy: f64, k: usize) -> Result<Vec<f64>> {
    check_sites(n, k, k)?;
    let t = TruncatedJacobi::truncation(seq, n)?;
    let lu = shifted_lu(&t, energy);
    let scale = energy.abs() + 2.0 * t.max_square().sqrt();
    let pivot = lu.min_abs_pivot();
    if pivot <= SINGULAR_TOL * scale.max(1.0) {
        return Err(Error::SingularTruncation {
            det: lu.log_abs_det().map_or(0.0, f64::exp),
        });
    }
    let mut b = vec![0.0; n];
    b[k - 1] = 1.0;
    lu.solve(&mut b);
    Ok(b)
}

/// `G(j, k) = <d_j, (J - E)^{-1} d_k>` for the truncation to `[1, n]`.
pub fn green_entry(
    seq: &BranchingSequence,
    n: usize,
    energy: f64,
    j: usize,
    k: usize,
) -> Result<f64> {
    check_sites(n, j, k)?;
    Ok(green_column(seq, n, energy, k)?[j - 1])
}

/// The same entry from characteristic minors: for `j <= k`,
/// `G(j, k) = -prod_{j <= i < k} sqrt(w_i) D_{j-1} D'_{n-k} / D_n`, where
/// `D'` are the minors on `[k + 1, n]`.
pub fn green_entry_polynomial(
    seq: &BranchingSequence,
    n: usize,
    energy: f64,
    j: usize,
    k: usize,
) -> Result<f64> {
    check_sites(n, j, k)?;
    let (j, k) = if j <= k { (j, k) } else { (k, j) };
    let full = minors_window(seq, 1, energy, n)?;
    let dn = full[n];
    let right = minors_window(seq, k + 1, energy, n - k)?;
    let hops: f64 = (j..k).map(|i| f64::from(seq.get(i)).sqrt()).product();
    if dn == 0.0 {
        return Err(Error::SingularTruncation { det: 0.0 });
    }
    Ok(GREEN_SIGN * hops * full[j - 1] * right[n - k] / dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues_dense;
    use crate::randomness::{sample_sequence, BranchingDistribution};
    use proptest::prelude::*;

    fn seq(v: &[u32]) -> BranchingSequence {
        BranchingSequence::new(v.to_vec()).unwrap()
    }

    fn random_seq(len: usize, seed: u64) -> BranchingSequence {
        sample_sequence(&BranchingDistribution::uniform(&[2, 3]).unwrap(), len, seed).unwrap()
    }

    #[test]
    fn apply_single_hop() {
        let s = BranchingSequence::constant(2, 10).unwrap();
        let mut u = vec![0.0; 5];
        u[0] = 1.0;
        let ju = jacobi_apply(&s, &u).unwrap();
        assert_eq!(ju, vec![0.0, 2f64.sqrt(), 0.0, 0.0, 0.0]);
    }

    #[test]
    fn apply_plane_wave_in_interior() {
        let s = BranchingSequence::constant(2, 64).unwrap();
        let theta = 0.7f64;
        let u: Vec<f64> = (0..40).map(|n| ((n + 1) as f64 * theta).sin()).collect();
        let ju = jacobi_apply(&s, &u).unwrap();
        let c = 2.0 * 2f64.sqrt() * theta.cos();
        // sin(n theta) + sin((n+2) theta) = 2 cos(theta) sin((n+1) theta); row 0 works since sin(0) = 0
        for n in 0..39 {
            assert!((ju[n] - c * u[n]).abs() < 1e-12, "row {n}");
        }
    }

    #[test]
    fn apply_needs_enough_couplings() {
        let s = seq(&[2, 2]);
        assert!(jacobi_apply(&s, &[1.0; 3]).is_ok());
        assert!(jacobi_apply(&s, &[1.0; 4]).is_err());
    }

    #[test]
    fn char_poly_examples() {
        let p = char_poly_seq(&seq(&[2, 3, 2]), 1.0, 2).unwrap();
        assert_eq!(p.values, vec![1.0, 1.0, -2.0]);
        let s = BranchingSequence::constant(2, 10).unwrap();
        for e in [-2.5, -1.0, 0.3, 2.0, 4.0] {
            let p = char_poly_seq(&s, e, 3).unwrap();
            assert!((p.determinant() - (e * e * e - 4.0 * e)).abs() < 1e-12);
        }
        let t = TruncatedJacobi::truncation(&s, 3).unwrap();
        let ev = tridiag_eigenvalues(&t, 1e-12);
        for (a, b) in ev.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn char_poly_positive_beyond_gershgorin() {
        let s = random_seq(100, 5);
        let e = 2.0 * 3f64.sqrt() + 0.01;
        let p = char_poly_seq(&s, e, 60).unwrap();
        assert!(p.values.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn green_two_site_example() {
        let s = seq(&[2, 2, 2]);
        let g11 = green_entry(&s, 2, 3.0, 1, 1).unwrap();
        let g12 = green_entry(&s, 2, 3.0, 1, 2).unwrap();
        assert!((g11 + 3.0 / 7.0).abs() < 1e-15);
        assert!((g12 + 2f64.sqrt() / 7.0).abs() < 1e-15);
        // regression for the overall sign of the minor formula
        assert_eq!(GREEN_SIGN, -1.0);
        assert!((green_entry_polynomial(&s, 2, 3.0, 1, 1).unwrap() - g11).abs() < 1e-15);
        assert!((green_entry_polynomial(&s, 2, 3.0, 1, 2).unwrap() - g12).abs() < 1e-15);
        assert!((green_entry_polynomial(&s, 2, 3.0, 2, 1).unwrap() - g12).abs() < 1e-15);
    }

    #[test]
    fn green_singular_energy() {
        let s = BranchingSequence::constant(2, 10).unwrap();
        // E = 2 is an eigenvalue of the 3-site truncation
        assert!(matches!(
            green_entry(&s, 3, 2.0, 1, 1),
            Err(Error::SingularTruncation { .. })
        ));
        assert!(green_entry(&s, 3, 1.0, 0, 1).is_err());
        assert!(green_entry(&s, 3, 1.0, 1, 4).is_err());
    }

    #[test]
    fn green_polynomial_matches_direct_solve() {
        for seed in 0..10 {
            let s = random_seq(60, seed);
            let n = 50;
            for (j, k) in [(1, 1), (1, 50), (7, 31), (25, 25), (40, 12), (50, 50)] {
                let direct = green_entry(&s, n, 4.0, j, k).unwrap();
                let poly = green_entry_polynomial(&s, n, 4.0, j, k).unwrap();
                assert!(
                    (direct - poly).abs() <= 1e-9 * direct.abs(),
                    "seed {seed} ({j},{k}): {direct} vs {poly}"
                );
            }
        }
    }

    #[test]
    fn green_column_solves_defining_relation() {
        let s = random_seq(40, 3);
        let n = 30;
        let t = TruncatedJacobi::truncation(&s, n).unwrap();
        for k in [1, 15, 30] {
            let col = green_column(&s, n, 0.37, k).unwrap();
            let jc = t.apply(&col);
            for i in 0..n {
                let lhs = jc[i] - 0.37 * col[i];
                let rhs = if i + 1 == k { 1.0 } else { 0.0 };
                assert!((lhs - rhs).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let s = random_seq(300, 11);
        let t = TruncatedJacobi::truncation(&s, 200).unwrap();
        let tol = t.default_tol();
        let ev = tridiag_eigenvalues(&t, tol);
        assert_eq!(ev.len(), 200);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let edge = 2.0 * 3f64.sqrt();
        assert!(ev.iter().all(|x| x.abs() <= edge));
        for i in 0..200 {
            assert!((ev[i] + ev[199 - i]).abs() <= 2.0 * tol);
        }
        let dense = symmetric_eigenvalues_dense(&t.to_dense(), 1e-15).unwrap();
        for (a, b) in ev.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-8);
        }
        let big = 10.0 * 3f64.sqrt();
        assert_eq!(sturm_count(&t, -big), 0);
        assert_eq!(sturm_count(&t, big), 200);
    }

    #[test]
    fn determinant_matches_eigenvalue_product() {
        for seed in 0..5 {
            let s = random_seq(60, seed);
            let n = 50;
            let t = TruncatedJacobi::truncation(&s, n).unwrap();
            let ev = tridiag_eigenvalues(&t, 1e-13);
            for e in [0.31, 1.7, -2.2] {
                let det = char_poly_seq(&s, e, n).unwrap().determinant();
                let prod: f64 = ev.iter().map(|l| e - l).product();
                assert!((det - prod).abs() <= 1e-6 * det.abs(), "{det} vs {prod}");
            }
        }
    }

    #[test]
    fn windows() {
        let s = seq(&[5, 2, 3, 4]);
        let t = TruncatedJacobi::truncation(&s, 3).unwrap();
        assert_eq!(t.off_diagonal(), &[2f64.sqrt(), 3f64.sqrt()]);
        let t0 = TruncatedJacobi::window(&s, 0, 3).unwrap();
        assert_eq!(t0.off_diagonal(), &[5f64.sqrt(), 2f64.sqrt()]);
        assert!(TruncatedJacobi::window(&s, 1, 5).is_err());
        assert_eq!(TruncatedJacobi::window(&s, 2, 1).unwrap().size(), 1);
    }

    #[test]
    fn kernel_vector_of_free_three_site_chain() {
        let s = BranchingSequence::constant(2, 10).unwrap();
        let t = TruncatedJacobi::truncation(&s, 3).unwrap();
        let v = eigenvector_inverse_iteration(&t, 0.0).unwrap();
        let sign = v[0].signum();
        let r = 0.5f64.sqrt();
        assert!((v[0] * sign - r).abs() < 1e-10);
        assert!(v[1].abs() < 1e-10);
        assert!((v[2] * sign + r).abs() < 1e-10);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_iteration_residuals() {
        let s = random_seq(600, 21);
        let t = TruncatedJacobi::truncation(&s, 500).unwrap();
        let tol = t.default_tol();
        let ev = tridiag_eigenvalues(&t, tol);
        let picks: Vec<f64> = ev.iter().step_by(37).copied().collect();
        let vs = eigenvectors(&t, &picks, tol).unwrap();
        for (lambda, v) in picks.iter().zip(&vs) {
            let (rq, res) = rayleigh_residual(&t, v);
            assert!(res <= EIGENVECTOR_RESIDUAL, "residual {res}");
            assert!((rq - lambda).abs() < 1e-8);
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deflation_yields_orthogonal_vectors_in_a_cluster() {
        // two decoupled copies of the same chain give doubly degenerate eigenvalues
        let mut sq = vec![2.0; 9];
        sq.push(1e-30);
        sq.extend(vec![2.0; 9]);
        let t = TruncatedJacobi::from_squares(sq);
        let tol = 1e-9;
        let ev = tridiag_eigenvalues(&t, tol);
        let pair = [ev[19], ev[18]];
        assert!((pair[0] - pair[1]).abs() < 2.0 * tol);
        let vs = eigenvectors(&t, &pair, tol).unwrap();
        let overlap: f64 = vs[0].iter().zip(&vs[1]).map(|(a, b)| a * b).sum();
        assert!(overlap.abs() < 1e-8, "overlap {overlap}");
    }

    #[test]
    fn tridiagonal_lu_solves_with_pivoting() {
        // matrix with a zero leading diagonal entry forces a row swap
        let dl = vec![1.0, 2.0, 1.5];
        let d = vec![0.0, 1.0, -1.0, 2.0];
        let du = vec![3.0, 0.5, 1.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = vec![
            d[0] * x[0] + du[0] * x[1],
            dl[0] * x[0] + d[1] * x[1] + du[1] * x[2],
            dl[1] * x[1] + d[2] * x[2] + du[2] * x[3],
            dl[2] * x[2] + d[3] * x[3],
        ];
        TridiagLu::factor(dl, d, du).solve(&mut b);
        for (a, e) in b.iter().zip(x) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn jacobi_apply_is_symmetric(
            w in prop::collection::vec(2u32..6, 30),
            u in prop::collection::vec(-1.0f64..1.0, 25),
            v in prop::collection::vec(-1.0f64..1.0, 25),
        ) {
            let s = BranchingSequence::new(w).unwrap();
            let ju = jacobi_apply(&s, &u).unwrap();
            let jv = jacobi_apply(&s, &v).unwrap();
            let lhs: f64 = ju.iter().zip(&v).map(|(a, b)| a * b).sum();
            let rhs: f64 = u.iter().zip(&jv).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn sturm_count_matches_sorted_eigenvalues(seed in any::<u64>(), x in -3.5f64..3.5) {
            let s = random_seq(80, seed);
            let t = TruncatedJacobi::truncation(&s, 60).unwrap();
            let ev = symmetric_eigenvalues_dense(&t.to_dense(), 1e-15).unwrap();
            let below = ev.iter().filter(|&&l| l < x - 1e-9).count();
            let at_or_below = ev.iter().filter(|&&l| l < x + 1e-9).count();
            let c = sturm_count(&t, x);
            prop_assert!(below <= c && c <= at_or_below);
        }
    }
}
