//! Finite radial rooted trees.
//!
//! Vertices are addressed as `(generation, index)` with breadth-first
//! canonical indexing: vertex `(n, i)` has parent `(n - 1, i / b_{n-1})` and
//! children `(n + 1, i * b_n + c)` for `c in 0..b_n`. The flat vertex order
//! used by [`adjacency_matrix`] is generation by generation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::randomness::BranchingSequence;

/// Largest vertex count accepted by [`adjacency_matrix`] unless overridden.
pub const DEFAULT_DENSE_LIMIT: usize = 2000;

/// Largest vertex count for which tree functions are materialized.
pub const MATERIALIZE_LIMIT: u128 = 1 << 26;

/// Radial tree cut after generation `depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialTree {
    branching: Vec<u32>,
    generation_sizes: Vec<u128>,
}

impl RadialTree {
    pub fn new(branching: &[u32], depth: usize) -> Result<Self> {
        build_tree(branching, depth)
    }

    pub fn from_sequence(seq: &BranchingSequence, depth: usize) -> Result<Self> {
        build_tree(seq.values(), depth)
    }

    pub fn depth(&self) -> usize {
        self.branching.len()
    }

    /// `(b_0, ..., b_{D-1})`.
    pub fn branching(&self) -> &[u32] {
        &self.branching
    }

    pub fn b(&self, n: usize) -> u32 {
        self.branching[n]
    }

    /// `(g_0, ..., g_D)` with `g_0 = 1`.
    pub fn generation_sizes(&self) -> &[u128] {
        &self.generation_sizes
    }

    pub fn generation_size(&self, n: usize) -> u128 {
        self.generation_sizes[n]
    }

    pub fn total_vertices(&self) -> u128 {
        self.generation_sizes.iter().sum()
    }

    pub fn max_branching(&self) -> u32 {
        self.branching.iter().copied().max().unwrap_or(0)
    }

    pub fn parent(&self, generation: usize, index: u128) -> Option<(usize, u128)> {
        if generation == 0 {
            return None;
        }
        Some((
            generation - 1,
            index / u128::from(self.branching[generation - 1]),
        ))
    }

    pub fn children(&self, generation: usize, index: u128) -> impl Iterator<Item = (usize, u128)> {
        let b = if generation < self.depth() {
            u128::from(self.branching[generation])
        } else {
            0
        };
        (0..b).map(move |c| (generation + 1, index * b + c))
    }

    /// Position of vertex `(n, i)` in the flat BFS order.
    pub fn flat_index(&self, generation: usize, index: u128) -> u128 {
        self.generation_sizes[..generation].iter().sum::<u128>() + index
    }

    fn materializable(&self) -> Result<usize> {
        let total = self.total_vertices();
        if total > MATERIALIZE_LIMIT {
            return Err(Error::TreeTooLarge);
        }
        Ok(total as usize)
    }
}

/// Builds the radial tree with branching `(b_0, ..., b_{depth-1})`.
pub fn build_tree(branching: &[u32], depth: usize) -> Result<RadialTree> {
    if branching.len() < depth {
        return Err(Error::BranchingTooShort {
            len: branching.len(),
            depth,
        });
    }
    let branching = branching[..depth].to_vec();
    let mut sizes = Vec::with_capacity(depth + 1);
    sizes.push(1u128);
    for (generation, &b) in branching.iter().enumerate() {
        if b < 2 {
            return Err(Error::BranchingTooSmall {
                generation,
                value: b,
            });
        }
        let next = sizes[generation]
            .checked_mul(u128::from(b))
            .ok_or(Error::TreeTooLarge)?;
        sizes.push(next);
    }
    Ok(RadialTree {
        branching,
        generation_sizes: sizes,
    })
}

/// Real function on the vertices of a tree, stored generation by generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFunction {
    generations: Vec<Vec<f64>>,
}

impl TreeFunction {
    pub fn zeros(tree: &RadialTree) -> Result<Self> {
        tree.materializable()?;
        Ok(Self {
            generations: tree
                .generation_sizes
                .iter()
                .map(|&g| vec![0.0; g as usize])
                .collect(),
        })
    }

    /// Function that is `profile[n]` on every vertex of generation `n`.
    pub fn radial(tree: &RadialTree, profile: &[f64]) -> Result<Self> {
        if profile.len() != tree.depth() + 1 {
            return Err(Error::DimensionMismatch {
                expected: tree.depth() + 1,
                got: profile.len(),
            });
        }
        let mut f = Self::zeros(tree)?;
        for (gen, &c) in f.generations.iter_mut().zip(profile) {
            gen.fill(c);
        }
        Ok(f)
    }

    /// Inverse of [`to_flat`](Self::to_flat).
    pub fn from_flat(tree: &RadialTree, flat: &[f64]) -> Result<Self> {
        let total = tree.materializable()?;
        if flat.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: flat.len(),
            });
        }
        let mut generations = Vec::with_capacity(tree.depth() + 1);
        let mut start = 0;
        for &g in &tree.generation_sizes {
            let g = g as usize;
            generations.push(flat[start..start + g].to_vec());
            start += g;
        }
        Ok(Self { generations })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.generations.concat()
    }

    pub fn generations(&self) -> &[Vec<f64>] {
        &self.generations
    }

    pub fn generation(&self, n: usize) -> &[f64] {
        &self.generations[n]
    }

    pub fn generation_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.generations[n]
    }

    pub fn value(&self, generation: usize, index: usize) -> f64 {
        self.generations[generation][index]
    }

    pub fn set(&mut self, generation: usize, index: usize, v: f64) {
        self.generations[generation][index] = v;
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.generations
            .iter()
            .zip(&other.generations)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(x, y)| x * y)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Largest absolute value on each generation.
    pub fn generation_sup(&self) -> Vec<f64> {
        self.generations
            .iter()
            .map(|g| g.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.generations
            .iter()
            .zip(&other.generations)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    fn matches(&self, tree: &RadialTree) -> Result<()> {
        if self.generations.len() != tree.depth() + 1 {
            return Err(Error::DimensionMismatch {
                expected: tree.depth() + 1,
                got: self.generations.len(),
            });
        }
        for (g, &size) in self.generations.iter().zip(&tree.generation_sizes) {
            if g.len() as u128 != size {
                return Err(Error::DimensionMismatch {
                    expected: size as usize,
                    got: g.len(),
                });
            }
        }
        Ok(())
    }
}

/// `(Lf)(v)` = sum of `f` over the neighbours of `v`: the parent (absent at
/// the root) plus the children (absent in the last generation).
pub fn apply_laplacian(tree: &RadialTree, f: &TreeFunction) -> Result<TreeFunction> {
    f.matches(tree)?;
    let depth = tree.depth();
    let generations = (0..=depth)
        .map(|n| {
            let size = tree.generation_sizes[n] as usize;
            (0..size)
                .map(|i| {
                    let mut acc = 0.0;
                    if n > 0 {
                        acc += f.generations[n - 1][i / tree.branching[n - 1] as usize];
                    }
                    if n < depth {
                        let b = tree.branching[n] as usize;
                        acc += f.generations[n + 1][i * b..(i + 1) * b].iter().sum::<f64>();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(TreeFunction { generations })
}

/// Dense adjacency matrix in flat BFS order.
pub fn adjacency_matrix(tree: &RadialTree, limit: usize) -> Result<DenseMatrix> {
    let total = tree.total_vertices();
    if total > limit as u128 {
        return Err(Error::DenseLimitExceeded {
            vertices: total.min(usize::MAX as u128) as usize,
            limit,
        });
    }
    let total = total as usize;
    let mut a = DenseMatrix::zeros(total);
    let mut offset = 0usize;
    for n in 0..tree.depth() {
        let size = tree.generation_sizes[n] as usize;
        let b = tree.branching[n] as usize;
        let next_offset = offset + size;
        for i in 0..size {
            for c in 0..b {
                let u = offset + i;
                let v = next_offset + i * b + c;
                a.set(u, v, 1.0);
                a.set(v, u, 1.0);
            }
        }
        offset = next_offset;
    }
    Ok(a)
}
