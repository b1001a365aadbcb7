//! Branching laws, seeded i.i.d. branching sequences and the left shift.
//!
//! Every random draw in the crate flows through [`BranchingDistribution::stream`],
//! which keys a ChaCha8 generator on `(seed, stream)`. Monte Carlo code uses
//! the sample index as the stream number, so serial and parallel runs see
//! the same numbers.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of the generator, recorded in run metadata.
pub const PRNG_ID: &str =
    "ChaCha8Rng (rand_chacha 0.9); seed_from_u64(seed), set_stream(sub-stream index)";

/// Tolerance on the weight sum accepted from user input before normalizing.
pub const WEIGHT_SUM_TOL: f64 = 1e-6;

/// Probability law on integer branching values `{2, ..., d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingDistribution {
    atoms: Vec<(u32, f64)>,
    d: u32,
}

impl BranchingDistribution {
    /// Builds a law from `(value, weight)` pairs. Weights must be positive and
    /// sum to one within [`WEIGHT_SUM_TOL`]; they are then renormalized.
    /// The upper bound `d` is the largest atom.
    pub fn new(atoms: Vec<(u32, f64)>) -> Result<Self> {
        let d = atoms.iter().map(|&(v, _)| v).max().unwrap_or(0);
        Self::with_bound(atoms, d)
    }

    /// Like [`new`](Self::new) with an explicit upper bound `d` on the alphabet.
    pub fn with_bound(mut atoms: Vec<(u32, f64)>, d: u32) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        atoms.sort_by_key(|&(v, _)| v);
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate value {}",
                    w[0].0
                )));
            }
        }
        for &(v, w) in &atoms {
            if v < 2 || v > d {
                return Err(Error::InvalidDistribution(format!(
                    "value {v} outside [2, {d}]"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "weight {w} for value {v} is not positive"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        for a in &mut atoms {
            a.1 /= total;
        }
        Ok(Self { atoms, d })
    }

    /// Point mass at `value`. Degenerate, but handy for closed-form checks.
    pub fn degenerate(value: u32) -> Result<Self> {
        Self::new(vec![(value, 1.0)])
    }

    /// Uniform law on the given values.
    pub fn uniform(values: &[u32]) -> Result<Self> {
        let w = 1.0 / values.len().max(1) as f64;
        Self::new(values.iter().map(|&v| (v, w)).collect())
    }

    /// Parses `"2:0.5,3:0.5"`.
    pub fn parse(literal: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for part in literal.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (v, w) = part.split_once(':').ok_or_else(|| {
                Error::InvalidDistribution(format!("expected value:weight, got {part:?}"))
            })?;
            let v: u32 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidDistribution(format!("bad value {v:?}")))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::InvalidDistribution(format!("bad weight {w:?}")))?;
            atoms.push((v, w));
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(u32, f64)] {
        &self.atoms
    }

    pub fn values(&self) -> impl Iterator<Item = u32> + '_ {
        self.atoms.iter().map(|&(v, _)| v)
    }

    /// Upper bound of the alphabet.
    pub fn d(&self) -> u32 {
        self.d
    }

    /// Largest value carrying positive weight.
    pub fn d_mu(&self) -> u32 {
        self.atoms.last().map(|&(v, _)| v).unwrap_or(0)
    }

    pub fn min_value(&self) -> u32 {
        self.atoms.first().map(|&(v, _)| v).unwrap_or(0)
    }

    /// A law with a single atom.
    pub fn is_degenerate(&self) -> bool {
        self.atoms.len() < 2
    }

    pub fn contains(&self, value: u32) -> bool {
        self.atoms.iter().any(|&(v, _)| v == value)
    }

    /// Infinite stream of i.i.d. draws for `(seed, stream)`.
    pub fn stream(&self, seed: u64, stream: u64) -> BranchingStream {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let index = WeightedIndex::new(self.atoms.iter().map(|&(_, w)| w))
            .expect("weights validated at construction");
        BranchingStream {
            rng,
            index,
            values: self.atoms.iter().map(|&(v, _)| v).collect(),
        }
    }
}

impl fmt::Display for BranchingDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, w)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}:{w}")?;
        }
        Ok(())
    }
}

/// Iterator of i.i.d. branching values.
#[derive(Debug, Clone)]
pub struct BranchingStream {
    rng: ChaCha8Rng,
    index: WeightedIndex<f64>,
    values: Vec<u32>,
}

impl Iterator for BranchingStream {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.values.len() == 1 {
            return Some(self.values[0]);
        }
        Some(self.values[self.index.sample(&mut self.rng)])
    }
}

/// Finite prefix `(w_0, ..., w_{L-1})` of a branching sequence, together with
/// the number of shifts already applied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchingSequence {
    values: Vec<u32>,
    origin: usize,
}

impl BranchingSequence {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some((generation, &value)) = values.iter().enumerate().find(|(_, &v)| v < 2) {
            return Err(Error::BranchingTooSmall { generation, value });
        }
        Ok(Self { values, origin: 0 })
    }

    pub fn constant(value: u32, len: usize) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn get(&self, n: usize) -> u32 {
        self.values[n]
    }

    pub fn max(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// The left shift applied `k` times: `result_n = w_{n+k}`.
    pub fn shift(&self, k: usize) -> Result<Self> {
        shift(self, k)
    }
}

/// Draws `length` i.i.d. values (sub-stream 0 of `seed`).
pub fn sample_sequence(
    dist: &BranchingDistribution,
    length: usize,
    seed: u64,
) -> Result<BranchingSequence> {
    sample_sequence_stream(dist, length, seed, 0)
}

pub fn sample_sequence_stream(
    dist: &BranchingDistribution,
    length: usize,
    seed: u64,
    stream: u64,
) -> Result<BranchingSequence> {
    if length == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(BranchingSequence {
        values: dist.stream(seed, stream).take(length).collect(),
        origin: 0,
    })
}

pub fn shift(seq: &BranchingSequence, k: usize) -> Result<BranchingSequence> {
    if k > seq.values.len() {
        return Err(Error::ShiftPastEnd {
            shift: k,
            len: seq.values.len(),
        });
    }
    Ok(BranchingSequence {
        values: seq.values[k..].to_vec(),
        origin: seq.origin + k,
    })
}
