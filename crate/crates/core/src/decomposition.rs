//! Splitting of `l^2` of a radial tree into invariant subspaces `H_{N,k}` on
//! which the Laplacian acts as the Jacobi block `J_N` with off-diagonals
//! `sqrt(b_N), sqrt(b_{N+1}), ...`.
//!
//! For `N = 0` there is one block, spanned by the radial functions
//! `phi_{0,1,j} = g_j^{-1/2}` on generation `j`. For `N >= 1` the copies are
//! indexed by pairs (anchor vertex in generation `N - 1`, Helmert row), in
//! BFS-then-row order: `k - 1 = anchor * (b_{N-1} - 1) + (row - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{eigenvector_inverse_iteration, tridiag_eigenvalues, TruncatedJacobi};
use crate::linalg::symmetric_eigenvalues_dense;
use crate::tree::{
    adjacency_matrix, apply_laplacian, RadialTree, TreeFunction, DEFAULT_DENSE_LIMIT,
};

/// `beta_N` for `N = 0..=D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityTable {
    beta: Vec<u128>,
}

impl MultiplicityTable {
    pub fn beta(&self) -> &[u128] {
        &self.beta
    }

    pub fn get(&self, n: usize) -> u128 {
        self.beta[n]
    }

    /// `sum_N beta_N (D - N + 1)`; equals the vertex count.
    pub fn total_dimension(&self) -> u128 {
        let depth = self.beta.len() - 1;
        self.beta
            .iter()
            .enumerate()
            .map(|(n, &b)| b * (depth - n + 1) as u128)
            .sum()
    }
}

/// `beta_0 = 1`, `beta_1 = b_0 - 1`, `beta_N = (b_{N-1} - 1) prod_{j < N-1} b_j`.
pub fn multiplicities(tree: &RadialTree) -> MultiplicityTable {
    let mut beta = Vec::with_capacity(tree.depth() + 1);
    beta.push(1);
    for n in 1..=tree.depth() {
        beta.push(u128::from(tree.b(n - 1) - 1) * tree.generation_size(n - 1));
    }
    MultiplicityTable { beta }
}

/// Row `r` (`1 <= r < b`) of the Helmert completion of the constant vector
/// in `R^b`: `(1, ..., 1, -r, 0, ..., 0) / sqrt(r (r + 1))` with `r` ones.
pub fn helmert_row(b: u32, r: u32) -> Vec<f64> {
    assert!(r >= 1 && r < b, "Helmert row {r} out of range for b = {b}");
    let norm = (f64::from(r) * f64::from(r + 1)).sqrt();
    (0..b)
        .map(|c| match c.cmp(&r) {
            std::cmp::Ordering::Less => 1.0 / norm,
            std::cmp::Ordering::Equal => -f64::from(r) / norm,
            std::cmp::Ordering::Greater => 0.0,
        })
        .collect()
}

/// One basis vector `phi_{N,k,j}`, supported on generation `N + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalBasisFunction {
    pub n: usize,
    pub k: u128,
    pub j: usize,
    /// Index of the anchor in generation `N - 1` (none for `N = 0`).
    pub anchor: Option<u128>,
    /// Helmert weights on the anchor's children (empty for `N = 0`).
    pub weights: Vec<f64>,
    /// `1 / sqrt(M_j)` for `N >= 1`, `g_j^{-1/2}` for `N = 0`.
    pub scale: f64,
    /// Number of generation-`(N + j)` descendants of each anchor child (`M_j`).
    pub spread: u128,
}

impl SphericalBasisFunction {
    pub fn generation(&self) -> usize {
        self.n + self.j
    }

    pub fn sup_norm(&self) -> f64 {
        match self.anchor {
            None => self.scale,
            Some(_) => self.scale * self.weights.iter().fold(0.0f64, |m, &x| m.max(x.abs())),
        }
    }

    /// Non-zero stretch of generation `N + j`: first vertex index and values.
    pub fn support(&self) -> (u128, Vec<f64>) {
        match self.anchor {
            None => (0, vec![self.scale; self.spread as usize]),
            Some(a) => {
                let b = self.weights.len() as u128;
                let mut values = Vec::with_capacity((b * self.spread) as usize);
                for &w in &self.weights {
                    values.extend(std::iter::repeat_n(w * self.scale, self.spread as usize));
                }
                (a * b * self.spread, values)
            }
        }
    }

    pub fn to_tree_function(&self, tree: &RadialTree) -> Result<TreeFunction> {
        let mut f = TreeFunction::zeros(tree)?;
        let (start, values) = self.support();
        let gen = f.generation_mut(self.generation());
        gen[start as usize..start as usize + values.len()].copy_from_slice(&values);
        Ok(f)
    }
}

fn check_block(tree: &RadialTree, n: usize, k: u128) -> Result<MultiplicityTable> {
    if n > tree.depth() {
        return Err(Error::IndexOutOfRange(format!(
            "block generation {n} beyond depth {}",
            tree.depth()
        )));
    }
    let beta = multiplicities(tree);
    if k == 0 || k > beta.get(n) {
        return Err(Error::IndexOutOfRange(format!(
            "copy index {k} outside [1, {}] for N = {n}",
            beta.get(n)
        )));
    }
    Ok(beta)
}

/// `(anchor, row)` of copy `k` in block generation `n >= 1`.
fn anchor_and_row(tree: &RadialTree, n: usize, k: u128) -> (u128, u32) {
    let rows = u128::from(tree.b(n - 1) - 1);
    let anchor = (k - 1) / rows;
    let row = ((k - 1) % rows) as u32 + 1;
    (anchor, row)
}

/// Basis vectors `phi_{N,k,j}` for `j = 0..=D-N`. Only metadata is built;
/// use [`SphericalBasisFunction::to_tree_function`] to materialize.
pub fn spherical_basis(
    tree: &RadialTree,
    n: usize,
    k: u128,
) -> Result<Vec<SphericalBasisFunction>> {
    check_block(tree, n, k)?;
    let depth = tree.depth();
    if n == 0 {
        return Ok((0..=depth)
            .map(|j| SphericalBasisFunction {
                n,
                k,
                j,
                anchor: None,
                weights: Vec::new(),
                scale: 1.0 / (tree.generation_size(j) as f64).sqrt(),
                spread: tree.generation_size(j),
            })
            .collect());
    }
    let (anchor, row) = anchor_and_row(tree, n, k);
    let weights = helmert_row(tree.b(n - 1), row);
    let mut spread = 1u128;
    let mut out = Vec::with_capacity(depth - n + 1);
    for j in 0..=depth - n {
        if j > 0 {
            spread *= u128::from(tree.b(n + j - 1));
        }
        out.push(SphericalBasisFunction {
            n,
            k,
            j,
            anchor: Some(anchor),
            weights: weights.clone(),
            scale: 1.0 / (spread as f64).sqrt(),
            spread,
        });
    }
    Ok(out)
}

/// `||phi_{N,k,j}||_inf` for `j = 0..=D-N`, without materializing anything.
pub fn basis_sup_norms(tree: &RadialTree, n: usize, k: u128) -> Result<Vec<f64>> {
    Ok(spherical_basis(tree, n, k)?
        .iter()
        .map(SphericalBasisFunction::sup_norm)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockActionReport {
    pub n: usize,
    pub k: u128,
    /// Largest `l^2` residual of `Delta phi_j - sqrt(b_{N+j}) phi_{j+1} - sqrt(b_{N+j-1}) phi_{j-1}`.
    pub max_residual: f64,
    pub worst_j: usize,
    /// `<phi_{j+1}, Delta phi_j>`, which should be `sqrt(b_{N+j})`.
    pub off_diagonals: Vec<f64>,
}

/// Checks that the Laplacian maps `phi_{N,k,j}` into the span of its two
/// radial neighbours with the Jacobi coefficients.
pub fn verify_block_action(
    tree: &RadialTree,
    n: usize,
    k: u128,
    tol: f64,
) -> Result<BlockActionReport> {
    let basis = spherical_basis(tree, n, k)?;
    let phis = basis
        .iter()
        .map(|b| b.to_tree_function(tree))
        .collect::<Result<Vec<_>>>()?;
    let mut max_residual = 0.0f64;
    let mut worst_j = 0;
    let mut off_diagonals = Vec::with_capacity(phis.len().saturating_sub(1));
    for (j, phi) in phis.iter().enumerate() {
        let image = apply_laplacian(tree, phi)?;
        let mut expected = TreeFunction::zeros(tree)?;
        if j + 1 < phis.len() {
            axpy(&mut expected, &phis[j + 1], f64::from(tree.b(n + j)).sqrt());
            off_diagonals.push(phis[j + 1].dot(&image));
        }
        if j > 0 {
            axpy(
                &mut expected,
                &phis[j - 1],
                f64::from(tree.b(n + j - 1)).sqrt(),
            );
        }
        let residual = l2_distance(&image, &expected);
        if residual > max_residual {
            max_residual = residual;
            worst_j = j;
        }
    }
    if max_residual > tol {
        return Err(Error::CheckFailed(format!(
            "block action residual {max_residual:e} at (N, k, j) = ({n}, {k}, {worst_j})"
        )));
    }
    Ok(BlockActionReport {
        n,
        k,
        max_residual,
        worst_j,
        off_diagonals,
    })
}

fn axpy(y: &mut TreeFunction, x: &TreeFunction, c: f64) {
    for g in 0..x.generations().len() {
        for (a, b) in y.generation_mut(g).iter_mut().zip(x.generation(g)) {
            *a += c * b;
        }
    }
}

fn l2_distance(a: &TreeFunction, b: &TreeFunction) -> f64 {
    a.generations()
        .iter()
        .zip(b.generations())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
        .sum::<f64>()
        .sqrt()
}

fn check_lift_len(tree: &RadialTree, n: usize, u: &[f64]) -> Result<()> {
    let room = tree.depth() - n + 1;
    if u.len() > room {
        return Err(Error::DimensionMismatch {
            expected: room,
            got: u.len(),
        });
    }
    Ok(())
}

/// `sum_j u_j phi_{N,k,j}`.
pub fn lift(tree: &RadialTree, n: usize, k: u128, u: &[f64]) -> Result<TreeFunction> {
    let basis = spherical_basis(tree, n, k)?;
    check_lift_len(tree, n, u)?;
    let mut f = TreeFunction::zeros(tree)?;
    for (phi, &c) in basis.iter().zip(u) {
        let (start, values) = phi.support();
        let gen = f.generation_mut(phi.generation());
        for (x, v) in gen[start as usize..].iter_mut().zip(values) {
            *x = c * v;
        }
    }
    Ok(f)
}

/// Per-generation sup of `lift(tree, N, k, u)` for generations `0..=D`,
/// computed as `|u_{m-N}| ||phi_{N,k,m-N}||_inf`. Works on trees far too
/// large to materialize.
pub fn lift_generation_sup(tree: &RadialTree, n: usize, k: u128, u: &[f64]) -> Result<Vec<f64>> {
    let sups = basis_sup_norms(tree, n, k)?;
    check_lift_len(tree, n, u)?;
    let mut out = vec![0.0; tree.depth() + 1];
    for (j, (&c, s)) in u.iter().zip(sups).enumerate() {
        out[n + j] = c.abs() * s;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheckReport {
    pub tree_eigenvalues: Vec<f64>,
    pub block_eigenvalues: Vec<f64>,
    pub max_discrepancy: f64,
    pub tol: f64,
}

impl SpectralCheckReport {
    pub fn passed(&self) -> bool {
        self.max_discrepancy <= self.tol
    }
}

/// Eigenvalues of `J_N` truncated to `D - N + 1` sites.
pub fn block_eigenvalues(tree: &RadialTree, n: usize) -> Vec<f64> {
    let squares = tree.branching()[n..]
        .iter()
        .map(|&b| f64::from(b))
        .collect();
    tridiag_eigenvalues(&TruncatedJacobi::from_squares(squares), BLOCK_BISECTION_TOL)
}

const BLOCK_BISECTION_TOL: f64 = 1e-13;

/// Eigenvalue of the truncated `J_N` closest to `energy`, with a unit eigenvector.
pub fn block_eigenpair(tree: &RadialTree, n: usize, energy: f64) -> Result<(f64, Vec<f64>)> {
    if n > tree.depth() {
        return Err(Error::InvalidArgument(format!(
            "block {n} beyond depth {}",
            tree.depth()
        )));
    }
    let squares = tree.branching()[n..]
        .iter()
        .map(|&b| f64::from(b))
        .collect();
    let t = TruncatedJacobi::from_squares(squares);
    let lambda = tridiag_eigenvalues(&t, BLOCK_BISECTION_TOL)
        .into_iter()
        .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()))
        .expect("block has at least one site");
    Ok((lambda, eigenvector_inverse_iteration(&t, lambda)?))
}
const DENSE_TOL: f64 = 1e-15;

/// Compares the sorted spectrum of the adjacency matrix with the union of
/// `beta_N` copies of each truncated block spectrum.
pub fn spectral_multiset_check(tree: &RadialTree, tol: f64) -> Result<SpectralCheckReport> {
    let dense = adjacency_matrix(tree, DEFAULT_DENSE_LIMIT)?;
    let tree_eigenvalues = symmetric_eigenvalues_dense(&dense, DENSE_TOL)?;
    let beta = multiplicities(tree);
    let mut block = Vec::with_capacity(tree_eigenvalues.len());
    for n in 0..=tree.depth() {
        let eigs = block_eigenvalues(tree, n);
        for _ in 0..beta.get(n) {
            block.extend_from_slice(&eigs);
        }
    }
    if block.len() != tree_eigenvalues.len() {
        return Err(Error::CheckFailed(format!(
            "dimension identity violated: {} block eigenvalues, {} vertices",
            block.len(),
            tree_eigenvalues.len()
        )));
    }
    block.sort_by(f64::total_cmp);
    let max_discrepancy = tree_eigenvalues
        .iter()
        .zip(&block)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(SpectralCheckReport {
        tree_eigenvalues,
        block_eigenvalues: block,
        max_discrepancy,
        tol,
    })
}
