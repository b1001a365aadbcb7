//! Monte Carlo estimates of the Lyapunov exponent
//! `L(E) = lim (1/n) log ||M_n^E(w)||`.
//!
//! Each sample is one long product over a fresh i.i.d. sequence drawn from
//! sub-stream `s` of the seed, where `s` is the sample index (offset per
//! grid point in [`lyapunov_curve`]). Per-sample values are merged in index
//! order, so the result does not depend on the number of worker threads.

use serde::{Deserialize, Serialize};

use crate::cocycle::log_norm_of;
use crate::error::{Error, Result};
use crate::randomness::{BranchingDistribution, BranchingSequence};

/// Smallest step count accepted by [`estimate_lyapunov`].
pub const MIN_STEPS: usize = 100;

/// Stream offset between consecutive grid points of a curve.
pub const GRID_STREAM_STRIDE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub energy: f64,
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`; zero for one sample.
    pub std_err: f64,
    pub seed: u64,
}

impl LyapunovEstimate {
    /// `mean / std_err` (infinite when the spread vanishes).
    pub fn z_score(&self) -> f64 {
        if self.std_err == 0.0 {
            if self.mean == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(self.mean)
            }
        } else {
            self.mean / self.std_err
        }
    }
}

/// `(1/n) log ||M_n^E||` along sub-stream `stream` of `seed`.
pub fn sample_exponent(
    dist: &BranchingDistribution,
    energy: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> f64 {
    // the first draw is w_0, which the product never reads
    log_norm_of(dist.stream(seed, stream).skip(1).take(n), energy) / n as f64
}

fn check(n: usize, samples: usize) -> Result<()> {
    if n < MIN_STEPS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_STEPS} steps, got {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    Ok(())
}

fn per_sample(
    dist: &BranchingDistribution,
    energy: f64,
    n: usize,
    samples: usize,
    seed: u64,
    offset: u64,
) -> Vec<f64> {
    let one = |s: usize| sample_exponent(dist, energy, n, seed, offset + s as u64);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..samples).map(one).collect()
    }
}

fn summarize(energy: f64, n: usize, seed: u64, values: &[f64]) -> LyapunovEstimate {
    let samples = values.len();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let std_err = if samples > 1 {
        let var =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64;
        (var / samples as f64).sqrt()
    } else {
        0.0
    };
    LyapunovEstimate {
        energy,
        n,
        samples,
        mean,
        std_err,
        seed,
    }
}

fn estimate_with_offset(
    dist: &BranchingDistribution,
    energy: f64,
    n: usize,
    samples: usize,
    seed: u64,
    offset: u64,
) -> Result<LyapunovEstimate> {
    check(n, samples)?;
    Ok(summarize(
        energy,
        n,
        seed,
        &per_sample(dist, energy, n, samples, seed, offset),
    ))
}

/// Average of `(1/n) log ||M_n^E||` over `samples` independent sequences.
pub fn estimate_lyapunov(
    dist: &BranchingDistribution,
    energy: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    estimate_with_offset(dist, energy, n, samples, seed, 0)
}

/// One estimate per grid energy, sorted by energy. Grid point `i` (after
/// sorting) uses sub-streams `i * 2^32 + s`.
pub fn lyapunov_curve(
    dist: &BranchingDistribution,
    grid: &[f64],
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<LyapunovEstimate>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty energy grid".into()));
    }
    check(n, samples)?;
    let mut energies = grid.to_vec();
    energies.sort_by(f64::total_cmp);
    energies
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            estimate_with_offset(dist, e, n, samples, seed, i as u64 * GRID_STREAM_STRIDE)
        })
        .collect()
}

/// `(1/n) |sum_{i=1}^{n/2} xi_i|` with `xi_i = (1/2) log(w_{2i-1} / w_{2i})`,
/// which is `(1/n) log ||M_n^0||` in closed form.
pub fn zero_energy_exact(seq: &BranchingSequence, n_even: usize) -> Result<f64> {
    if n_even % 2 == 1 {
        return Err(Error::OddStepCount(n_even));
    }
    if n_even == 0 {
        return Err(Error::InvalidArgument("step count must be positive".into()));
    }
    if seq.len() <= n_even {
        return Err(Error::SequenceTooShort {
            needed: n_even + 1,
            len: seq.len(),
        });
    }
    let sum: f64 = (1..=n_even / 2)
        .map(|i| 0.5 * (f64::from(seq.get(2 * i - 1)) / f64::from(seq.get(2 * i))).ln())
        .sum();
    Ok(sum.abs() / n_even as f64)
}

/// `L(E)` for the constant sequence `w = c`: `log` of the spectral radius of
/// the one-step matrix, zero inside the band `|E| <= 2 sqrt(c)`.
pub fn constant_exponent(c: u32, energy: f64) -> f64 {
    let t = energy.abs() / f64::from(c).sqrt();
    if t <= 2.0 {
        0.0
    } else {
        ((t + (t * t - 4.0).sqrt()) / 2.0).ln()
    }
}

/// `steps` equally spaced points from `emin` to `emax` inclusive.
pub fn linspace(emin: f64, emax: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![emin],
        _ => {
            let h = (emax - emin) / (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    if i == steps - 1 {
                        emax
                    } else {
                        emin + h * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Equally spaced points of `[-2 sqrt(d), 2 sqrt(d)]` with `|E| >= 1/l`.
pub fn band_grid(d: u32, l: f64, steps: usize) -> Vec<f64> {
    let edge = 2.0 * f64::from(d).sqrt();
    linspace(-edge, edge, steps)
        .into_iter()
        .filter(|e| e.abs() >= 1.0 / l)
        .collect()
}
