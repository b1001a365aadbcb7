//! Numerical laboratory for the adjacency Laplacian on radial rooted trees
//! with random branching numbers.
//!
//! The Laplacian of a radial tree splits into a direct sum of half-line
//! Jacobi matrices with off-diagonal entries `sqrt(b_n)`. This crate builds
//! the pieces needed to check that picture at desk scale:
//!
//! - [`randomness`]: branching laws, seeded i.i.d. sequences, the left shift
//! - [`tree`]: finite radial trees, BFS vertex indexing, the Laplacian
//! - [`decomposition`]: multiplicities, the spherical basis, block checks
//! - [`jacobi`]: the half-line Jacobi operator, minors, Green's functions,
//!   Sturm bisection and inverse iteration
//! - [`linalg`]: 2x2 matrices and a dense Jacobi-rotation eigensolver
//! - [`cocycle`]: transfer matrices and renormalized products
//! - [`lyapunov`]: Monte Carlo Lyapunov exponents
//! - [`experiments`]: Weyl vectors, spectrum histograms, decay fits
//! - [`plot`]: dependency-free SVG line plots

pub mod cocycle;
pub mod decomposition;
pub mod error;
pub mod experiments;
pub mod jacobi;
pub mod linalg;
pub mod lyapunov;
pub mod plot;
pub mod randomness;
pub mod tree;

pub use error::{Error, Result};
