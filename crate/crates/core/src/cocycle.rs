//! One-step transfer matrices of the eigenvalue recursion
//! `sqrt(w_{n-1}) u(n-1) + sqrt(w_n) u(n+1) = E u(n)` and their products.
//!
//! The one-step matrix reads the entry `w_1` of the sequence it is applied
//! to, so the `i`-th factor of an `n`-step product consumes `w_{i+1}` and
//! the product acts on the initial vector `(u_1, sqrt(w_0) u_0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::minors_window;
use crate::linalg::{sl2_norm, Mat2};
use crate::randomness::{BranchingDistribution, BranchingSequence};

/// `[[E / sqrt(w), -1 / sqrt(w)], [sqrt(w), 0]]`: the one-step matrix of a
/// sequence whose entry at index 1 is `w`.
pub fn step_matrix(w: u32, energy: f64) -> Mat2 {
    let s = f64::from(w).sqrt();
    Mat2::new(energy / s, -1.0 / s, s, 0.0)
}

/// One-step matrix of `seq`; uses `w_1`.
pub fn transfer_matrix(seq: &BranchingSequence, energy: f64) -> Result<Mat2> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort {
            needed: 2,
            len: seq.len(),
        });
    }
    Ok(step_matrix(seq.get(1), energy))
}

/// Product of unit-determinant matrices stored as `exp(log_norm) * matrix`
/// with `||matrix|| = 1`.
///
/// After many steps `matrix` is numerically rank one, so its determinant
/// says nothing about the product. The determinant is therefore tracked
/// separately through a QR factorization of the running product:
/// `M = Q R_k ... R_1` with `Q` a rotation and `R_i` upper triangular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleProduct {
    pub log_norm: f64,
    pub matrix: Mat2,
    pub steps: usize,
    /// `sum log |R_i[0][0] R_i[1][1]|`.
    pub log_abs_det: f64,
    pub det_sign: f64,
    q: Mat2,
}

impl Default for CocycleProduct {
    fn default() -> Self {
        Self::identity()
    }
}

impl CocycleProduct {
    pub fn identity() -> Self {
        Self {
            log_norm: 0.0,
            matrix: Mat2::IDENTITY,
            steps: 0,
            log_abs_det: 0.0,
            det_sign: 1.0,
            q: Mat2::IDENTITY,
        }
    }

    /// Left-multiplies by one more factor and renormalizes.
    #[inline]
    pub fn push(&mut self, factor: &Mat2) {
        let m = *factor * self.matrix;
        let norm = sl2_norm(&m);
        self.matrix = m.scale(1.0 / norm);
        self.log_norm += norm.ln();
        self.steps += 1;

        let x = *factor * self.q;
        let r11 = x.a.hypot(x.c);
        let (cs, sn) = (x.a / r11, x.c / r11);
        let r22 = -sn * x.b + cs * x.d;
        self.q = Mat2::new(cs, -sn, sn, cs);
        self.log_abs_det += (r11 * r22.abs()).ln();
        self.det_sign *= r22.signum();
    }

    /// `later * self`.
    pub fn then(&self, later: &CocycleProduct) -> CocycleProduct {
        let m = later.matrix * self.matrix;
        let norm = sl2_norm(&m);
        CocycleProduct {
            log_norm: self.log_norm + later.log_norm + norm.ln(),
            matrix: m.scale(1.0 / norm),
            steps: self.steps + later.steps,
            log_abs_det: self.log_abs_det + later.log_abs_det,
            det_sign: self.det_sign * later.det_sign,
            // orientation of the composed QR factor is not needed for the determinant
            q: later.q * self.q,
        }
    }

    /// The unnormalized product. Overflows for long products.
    pub fn reconstruct(&self) -> Mat2 {
        self.matrix.scale(self.log_norm.exp())
    }

    /// Determinant of the unnormalized product.
    pub fn reconstructed_det(&self) -> f64 {
        self.det_sign * self.log_abs_det.exp()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let s = self.log_norm.exp();
        let w = self.matrix.apply(v);
        [w[0] * s, w[1] * s]
    }
}

/// `log ||M_k ... M_1||` for the step matrices of `values`, without the
/// bookkeeping of [`CocycleProduct`]. Rescales only when entries grow large.
pub fn log_norm_of(values: impl IntoIterator<Item = u32>, energy: f64) -> f64 {
    const BIG: f64 = 1e100;
    let (mut a, mut b, mut c, mut d) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut log_scale = 0.0;
    for w in values {
        let s = f64::from(w).sqrt();
        let (p, q) = (energy / s, 1.0 / s);
        // [[p, -q], [s, 0]] * [[a, b], [c, d]]
        let (na, nb) = (p * a - q * c, p * b - q * d);
        c = s * a;
        d = s * b;
        a = na;
        b = nb;
        let m = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
        if m > BIG {
            a /= m;
            b /= m;
            c /= m;
            d /= m;
            log_scale += m.ln();
        }
    }
    let m = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    log_scale + m.ln() + sl2_norm(&Mat2::new(a / m, b / m, c / m, d / m)).ln()
}

/// `M_n = M(T^{n-1} w) ... M(T w) M(w)`; factor `i` uses `w_{i+1}`.
pub fn cocycle_product(seq: &BranchingSequence, energy: f64, n: usize) -> Result<CocycleProduct> {
    if seq.len() < n + 1 {
        return Err(Error::SequenceTooShort {
            needed: n + 1,
            len: seq.len(),
        });
    }
    Ok(product_of(&seq.values()[1..=n], energy))
}

/// Product of the step matrices for `values` in order (first value applied first).
pub fn product_of(values: &[u32], energy: f64) -> CocycleProduct {
    let mut p = CocycleProduct::identity();
    for &w in values {
        p.push(&step_matrix(w, energy));
    }
    p
}

/// Solution of the eigenvalue recursion with `u_0 = 1`, returned as
/// `(u_0, ..., u_{n+1})`. Needs `w_0, ..., w_n`.
pub fn solve_recursion(seq: &BranchingSequence, energy: f64, n: usize) -> Result<Vec<f64>> {
    if seq.len() < n + 1 {
        return Err(Error::SequenceTooShort {
            needed: n + 1,
            len: seq.len(),
        });
    }
    let a = |i: usize| f64::from(seq.get(i)).sqrt();
    let mut u = Vec::with_capacity(n + 2);
    u.push(1.0);
    u.push(energy / a(0));
    for k in 1..=n {
        u.push((energy * u[k] - a(k - 1) * u[k - 1]) / a(k));
    }
    Ok(u)
}

/// Rebuilds `M_n` from characteristic minors of `E - J`:
/// `M_n = A(n) [[D_n, -D'_{n-1}], [sqrt(w_n) D_{n-1}, -sqrt(w_n) D'_{n-2}]] / prod_{i=1}^n sqrt(w_i)`
/// with `A(n) = diag(1, sqrt(w_n))`, `D` the minors on `[1, k]`, `D'` the
/// minors on `[2, k + 1]` and `D'_{-1} = 0`.
pub fn transfer_from_minors(seq: &BranchingSequence, energy: f64, n: usize) -> Result<Mat2> {
    if n == 0 {
        return Ok(Mat2::IDENTITY);
    }
    if seq.len() < n + 1 {
        return Err(Error::SequenceTooShort {
            needed: n + 1,
            len: seq.len(),
        });
    }
    let d = minors_window(seq, 1, energy, n)?;
    let dt = minors_window(seq, 2, energy, n - 1)?;
    let dt_at = |k: isize| if k < 0 { 0.0 } else { dt[k as usize] };
    let sn = f64::from(seq.get(n)).sqrt();
    let hops: f64 = (1..=n).map(|i| f64::from(seq.get(i)).sqrt()).product();
    let inner = Mat2::new(
        d[n],
        -dt_at(n as isize - 1),
        sn * d[n - 1],
        -sn * dt_at(n as isize - 2),
    );
    Ok((Mat2::diag(1.0, sn) * inner).scale(1.0 / hops))
}

/// `(M_a M_b^{-1})^n` together with the expected diagonal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FurstenbergWitness {
    pub alpha: u32,
    pub beta: u32,
    pub energy: f64,
    pub n: u32,
    pub matrix: Mat2,
    pub expected: Mat2,
    /// Largest entry deviation from `diag((b/a)^{n/2}, (a/b)^{n/2})`,
    /// relative to the expected norm.
    pub residual: f64,
    pub norm: f64,
}

pub const WITNESS_TOL: f64 = 1e-9;

/// Computes `A_n = (M_a M_b^{-1})^n` by repeated multiplication and checks
/// that it equals `diag((b/a)^{n/2}, (a/b)^{n/2})` for every energy.
pub fn furstenberg_witness(
    alpha: u32,
    beta: u32,
    energy: f64,
    n: u32,
) -> Result<FurstenbergWitness> {
    if alpha == beta || alpha < 2 || beta < 2 {
        return Err(Error::InvalidArgument(format!(
            "need distinct branching values >= 2, got {alpha}, {beta}"
        )));
    }
    let ma = step_matrix(alpha, energy);
    let mb_inv = step_matrix(beta, energy)
        .inverse()
        .expect("unit determinant");
    let matrix = (ma * mb_inv).pow(n);
    let ratio = f64::from(beta) / f64::from(alpha);
    let half = f64::from(n) / 2.0;
    let expected = Mat2::diag(ratio.powf(half), ratio.powf(-half));
    let norm = sl2_norm(&matrix);
    let residual = matrix.max_abs_diff(&expected) / sl2_norm(&expected);
    let w = FurstenbergWitness {
        alpha,
        beta,
        energy,
        n,
        matrix,
        expected,
        residual,
        norm,
    };
    if residual > WITNESS_TOL {
        return Err(Error::CheckFailed(format!(
            "(M_{alpha} M_{beta}^-1)^{n} deviates from diagonal form by {residual:e}"
        )));
    }
    Ok(w)
}

/// Tolerance for projective comparisons (angle distance).
pub const ANGLE_TOL: f64 = 1e-9;

/// Direction of a non-zero vector as an angle in `[0, pi)`.
pub fn direction_angle(v: [f64; 2]) -> f64 {
    let a = v[1].atan2(v[0]);
    a.rem_euclid(std::f64::consts::PI)
}

/// Distance between two projective directions given as angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}

const V1: f64 = 0.0;
const V2: f64 = std::f64::consts::FRAC_PI_2;

fn is_dir(angle: f64, target: f64) -> bool {
    angle_distance(angle, target) <= ANGLE_TOL
}

/// Images of the coordinate axes under one atom's step matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDirections {
    pub value: u32,
    /// Direction of `M e_1`.
    pub image_v1: f64,
    /// Direction of `M e_2`.
    pub image_v2: f64,
    /// Direction of `M^{-1} e_2`.
    pub preimage_v2: f64,
    /// Real eigendirections of `M` (empty when the eigenvalues are complex).
    pub eigendirections: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantDirectionReport {
    pub energy: f64,
    pub atoms: Vec<AtomDirections>,
    pub v1_invariant: bool,
    pub v2_invariant: bool,
    pub union_invariant: bool,
    /// Every atom maps `V1` to `V2` and `V2` to `V1`.
    pub swap_detected: bool,
    /// Directions fixed by every atom matrix, hence by the group they generate.
    pub fixed_directions: Vec<f64>,
}

impl InvariantDirectionReport {
    /// None of `{V1}`, `{V2}`, `{V1, V2}` is invariant.
    pub fn no_invariant_axis_set(&self) -> bool {
        !self.v1_invariant && !self.v2_invariant && !self.union_invariant
    }

    pub fn fix_is_empty(&self) -> bool {
        self.fixed_directions.is_empty()
    }
}

fn eigendirections(m: &Mat2) -> Vec<f64> {
    let tr = m.trace();
    let disc = tr * tr - 4.0 * m.det();
    if disc < 0.0 {
        return Vec::new();
    }
    let r = disc.sqrt();
    let mut dirs: Vec<f64> = [(tr + r) / 2.0, (tr - r) / 2.0]
        .iter()
        // (M - l) v = 0 with M = [[a, b], [c, 0]], c != 0: v = (l, c)
        .map(|&l| direction_angle([l, m.c]))
        .collect();
    if angle_distance(dirs[0], dirs[1]) <= ANGLE_TOL {
        dirs.pop();
    }
    dirs
}

/// Tracks the coordinate axes `V1 = span(e_1)`, `V2 = span(e_2)` under the
/// step matrices of every atom of `dist`, and searches for directions fixed
/// by all of them.
pub fn invariant_direction_check(
    dist: &BranchingDistribution,
    energy: f64,
) -> Result<InvariantDirectionReport> {
    if dist.is_degenerate() {
        return Err(Error::InvalidArgument(
            "invariant direction check needs a non-degenerate law".into(),
        ));
    }
    let atoms: Vec<AtomDirections> = dist
        .values()
        .map(|value| {
            let m = step_matrix(value, energy);
            let inv = m.inverse().expect("unit determinant");
            AtomDirections {
                value,
                image_v1: direction_angle(m.apply([1.0, 0.0])),
                image_v2: direction_angle(m.apply([0.0, 1.0])),
                preimage_v2: direction_angle(inv.apply([0.0, 1.0])),
                eigendirections: eigendirections(&m),
            }
        })
        .collect();

    let v1_invariant = atoms.iter().all(|a| is_dir(a.image_v1, V1));
    let v2_invariant = atoms.iter().all(|a| is_dir(a.image_v2, V2));
    let axis = |x: f64| is_dir(x, V1) || is_dir(x, V2);
    let union_invariant = atoms.iter().all(|a| axis(a.image_v1) && axis(a.image_v2));
    let swap_detected = atoms
        .iter()
        .all(|a| is_dir(a.image_v1, V2) && is_dir(a.image_v2, V1));

    let fixed_directions = atoms[0]
        .eigendirections
        .iter()
        .copied()
        .filter(|&d| {
            atoms[1..]
                .iter()
                .all(|a| a.eigendirections.iter().any(|&e| is_dir(d, e)))
        })
        .collect();

    Ok(InvariantDirectionReport {
        energy,
        atoms,
        v1_invariant,
        v2_invariant,
        union_invariant,
        swap_detected,
        fixed_directions,
    })
}
