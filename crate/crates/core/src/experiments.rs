//! Spectral experiments on the half-line operator and its tree lift: Weyl
//! vectors on planted constant runs, eigenvalue histograms of truncations,
//! and exponential-decay fits of truncated eigenvectors.

use serde::{Deserialize, Serialize};

use crate::decomposition::lift_generation_sup;
use crate::error::{Error, Result};
use crate::jacobi::{eigenvalues_in_interval, eigenvectors, sturm_count, TruncatedJacobi};
use crate::lyapunov::estimate_lyapunov;
use crate::randomness::{sample_sequence, BranchingDistribution, BranchingSequence};
use crate::tree::RadialTree;

/// Largest truncation accepted by [`spectrum_histogram`].
pub const MAX_HISTOGRAM_SIZE: usize = 50_000;

/// Slack allowed beyond the band edge when counting eigenvalues.
pub const EDGE_SLACK: f64 = 1e-9;

/// Fit windows end at the last entry above this fraction of the peak.
pub const DECAY_FLOOR: f64 = 1e-12;

pub const MIN_DECAY_POINTS: usize = 10;

/// `R^{-1/2} e^{i j theta}` on sites `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylVector {
    pub start: usize,
    pub len: usize,
    pub theta: f64,
}

impl WeylVector {
    /// `theta = arccos(E / (2 sqrt(d_mu)))`.
    pub fn new(energy: f64, d_mu: u32, start: usize, len: usize) -> Result<Self> {
        let edge = 2.0 * f64::from(d_mu).sqrt();
        if energy.abs() > edge {
            return Err(Error::OutsideSpectrum {
                energy: energy.abs(),
                edge,
            });
        }
        if len == 0 {
            return Err(Error::InvalidArgument(
                "Weyl vector needs a non-empty support".into(),
            ));
        }
        Ok(Self {
            start,
            len,
            theta: (energy / edge).clamp(-1.0, 1.0).acos(),
        })
    }

    /// `(re, im)` at site `j`.
    pub fn value(&self, j: usize) -> (f64, f64) {
        if j < self.start || j >= self.start + self.len {
            return (0.0, 0.0);
        }
        let a = 1.0 / (self.len as f64).sqrt();
        let phase = j as f64 * self.theta;
        (a * phase.cos(), a * phase.sin())
    }

    pub fn norm(&self) -> f64 {
        (self.start..self.start + self.len)
            .map(|j| {
                let (re, im) = self.value(j);
                re * re + im * im
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// i.i.d. draws with sites `[run_start, run_start + run_len)` overwritten by
/// `run_value`.
pub fn engineered_sequence(
    dist: &BranchingDistribution,
    run_value: u32,
    run_start: usize,
    run_len: usize,
    length: usize,
    seed: u64,
) -> Result<BranchingSequence> {
    if !dist.contains(run_value) {
        return Err(Error::InvalidArgument(format!(
            "run value {run_value} is not an atom of {dist}"
        )));
    }
    if run_start + run_len > length {
        return Err(Error::IndexOutOfRange(format!(
            "run [{run_start}, {}) outside sequence of length {length}",
            run_start + run_len
        )));
    }
    let mut values = sample_sequence(dist, length, seed)?.values().to_vec();
    values[run_start..run_start + run_len].fill(run_value);
    BranchingSequence::new(values)
}

/// `||(J - E) psi||` for the Weyl vector on `[k, k + r)`, by direct
/// application of `J` to the real and imaginary parts.
pub fn weyl_residual(
    seq: &BranchingSequence,
    energy: f64,
    k: usize,
    r: usize,
    d_mu: u32,
) -> Result<f64> {
    let psi = WeylVector::new(energy, d_mu, k, r)?;
    if seq.len() < k + r + 1 {
        return Err(Error::SequenceTooShort {
            needed: k + r + 1,
            len: seq.len(),
        });
    }
    let a = |i: usize| f64::from(seq.get(i)).sqrt();
    let mut sum = 0.0;
    for n in k.saturating_sub(1)..=k + r {
        let (mut re, mut im) = psi.value(n + 1);
        re *= a(n);
        im *= a(n);
        if n > 0 {
            let (lr, li) = psi.value(n - 1);
            re += a(n - 1) * lr;
            im += a(n - 1) * li;
        }
        let (cr, ci) = psi.value(n);
        re -= energy * cr;
        im -= energy * ci;
        sum += re * re + im * im;
    }
    Ok(sum.sqrt())
}

/// `2 (sqrt(d_mu) + |E|) / sqrt(R)`.
pub fn weyl_bound(energy: f64, d_mu: u32, r: usize) -> f64 {
    2.0 * (f64::from(d_mu).sqrt() + energy.abs()) / (r as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub r: usize,
    pub residual: f64,
    pub bound: f64,
}

/// Relative rounding slack for [`WeylRow::within_bound`]. At `E = 0` the
/// residual of an exact run equals the bound.
pub const WEYL_ROUNDING: f64 = 1e-12;

impl WeylRow {
    pub fn within_bound(&self) -> bool {
        self.residual <= self.bound * (1.0 + WEYL_ROUNDING)
    }
}

const WEYL_PAD: usize = 8;

/// Residuals on planted runs of `d_mu` of each length in `runs`. The run
/// covers the support and both neighbouring couplings.
pub fn weyl_scan(
    dist: &BranchingDistribution,
    energy: f64,
    runs: &[usize],
    seed: u64,
) -> Result<Vec<WeylRow>> {
    let d_mu = dist.d_mu();
    runs.iter()
        .map(|&r| {
            let k = WEYL_PAD;
            let seq = engineered_sequence(dist, d_mu, k - 1, r + 1, k + r + 1 + WEYL_PAD, seed)?;
            Ok(WeylRow {
                r,
                residual: weyl_residual(&seq, energy, k, r, d_mu)?,
                bound: weyl_bound(energy, d_mu, r),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumHistogram {
    pub n: usize,
    /// `bins + 1` edges spanning `[-2 sqrt(d_mu), 2 sqrt(d_mu)]`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub min: f64,
    pub max: f64,
    /// Eigenvalues beyond the band edge by more than [`EDGE_SLACK`].
    pub outside: usize,
    pub empty_fraction: f64,
}

/// Eigenvalue `k` (0-based, ascending) by bisection on Sturm counts.
pub fn kth_eigenvalue(t: &TruncatedJacobi, k: usize, tol: f64) -> f64 {
    let g = t.gershgorin() + 1.0;
    let (mut lo, mut hi) = (-g, g);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Histogram of the eigenvalues of the size-`n` truncation, from Sturm
/// counts at the bin edges; extremes by bisection.
pub fn spectrum_histogram(
    dist: &BranchingDistribution,
    n: usize,
    seed: u64,
    bins: usize,
) -> Result<SpectrumHistogram> {
    if n == 0 || n > MAX_HISTOGRAM_SIZE {
        return Err(Error::InvalidArgument(format!(
            "truncation size must be in [1, {MAX_HISTOGRAM_SIZE}], got {n}"
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let seq = sample_sequence(dist, n, seed)?;
    let t = TruncatedJacobi::truncation(&seq, n)?;
    let edge = 2.0 * f64::from(dist.d_mu()).sqrt();
    let edges = crate::lyapunov::linspace(-edge, edge, bins + 1);
    let mut cuts: Vec<usize> = edges.iter().map(|&x| sturm_count(&t, x)).collect();
    cuts[0] = sturm_count(&t, -edge - EDGE_SLACK);
    cuts[bins] = sturm_count(&t, edge + EDGE_SLACK);
    let counts: Vec<usize> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    let outside = n - (cuts[bins] - cuts[0]);
    let tol = 1e-12 * edge;
    let empty = counts.iter().filter(|&&c| c == 0).count();
    Ok(SpectrumHistogram {
        n,
        min: kth_eigenvalue(&t, 0, tol),
        max: kth_eigenvalue(&t, n - 1, tol),
        edges,
        counts,
        outside,
        empty_fraction: empty as f64 / bins as f64,
    })
}

/// Least-squares fit of `log |u_j|` over `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Negated slope; positive means decay.
    pub rate: f64,
    pub start: usize,
    pub end: usize,
    /// RMS deviation of `log |u_j|` from the fitted line.
    pub residual: f64,
}

/// Fits `log |u_j|` over indices `[start, end]` of `u`, skipping entries
/// at or below `floor`.
pub fn fit_log_slope(u: &[f64], start: usize, end: usize, floor: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = (start..=end)
        .filter(|&j| u[j].abs() > floor)
        .map(|j| (j as f64, u[j].abs().ln()))
        .collect();
    if pts.len() < MIN_DECAY_POINTS {
        return Err(Error::InsufficientDecayWindow { points: pts.len() });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        rate: -slope,
        start,
        end,
        residual,
    })
}

/// `[peak, last]`: from the last index attaining `max |u|` to the last index
/// above `DECAY_FLOOR * max |u|`.
pub fn decay_window(u: &[f64]) -> Result<(usize, usize, f64)> {
    let max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 || !max.is_finite() {
        return Err(Error::InsufficientDecayWindow { points: 0 });
    }
    let peak = u
        .iter()
        .rposition(|x| x.abs() == max)
        .expect("max attained");
    let floor = DECAY_FLOOR * max;
    let last = u
        .iter()
        .rposition(|x| x.abs() > floor)
        .expect("peak is above floor");
    Ok((peak, last, floor))
}

/// Exponential decay rate of `u` to the right of its peak.
pub fn decay_rate_fit(u: &[f64]) -> Result<DecayFit> {
    let (peak, last, floor) = decay_window(u)?;
    fit_log_slope(u, peak, last, floor)
}

/// Fit on whichever side of the peak offers the longer window. Indices in
/// the returned fit refer to `u` read right to left when `reversed` is set.
pub fn two_sided_decay_fit(u: &[f64]) -> Result<(DecayFit, bool)> {
    let rev: Vec<f64> = u.iter().rev().copied().collect();
    let right = decay_window(u)?;
    let left = decay_window(&rev)?;
    if right.1 - right.0 >= left.1 - left.0 {
        decay_rate_fit(u)
            .map(|f| (f, false))
            .or_else(|_| decay_rate_fit(&rev).map(|f| (f, true)))
    } else {
        decay_rate_fit(&rev)
            .map(|f| (f, true))
            .or_else(|_| decay_rate_fit(u).map(|f| (f, false)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub eigenvalue: f64,
    pub fit: DecayFit,
    pub reversed: bool,
    /// Reference rate `L^(eigenvalue)`.
    pub reference: f64,
    pub ratio: f64,
    /// `||T u - lambda u||`.
    pub eigen_residual: f64,
}

/// Monte Carlo parameters for the reference exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            steps: 20_000,
            samples: 8,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub reports: Vec<DecayReport>,
    /// Eigenvalues in the window whose vectors gave no usable fit.
    pub skipped: Vec<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

impl LocalizationReport {
    pub fn median_ratio(&self) -> Option<f64> {
        median(self.reports.iter().map(|r| r.ratio).collect())
    }

    pub fn median_rate(&self) -> Option<f64> {
        median(self.reports.iter().map(|r| r.fit.rate).collect())
    }
}

/// Decay fits of the truncation eigenvectors with eigenvalues in
/// `[lo, hi)`, each compared with a Monte Carlo exponent at that energy.
pub fn localization_report(
    dist: &BranchingDistribution,
    n: usize,
    seed: u64,
    window: (f64, f64),
    reference: ReferenceConfig,
) -> Result<LocalizationReport> {
    let (lo, hi) = window;
    let edge = 2.0 * f64::from(dist.d_mu()).sqrt();
    if !(lo < hi && -edge < lo && hi < edge) {
        return Err(Error::InvalidArgument(format!(
            "window [{lo}, {hi}] must lie inside (-{edge}, {edge})"
        )));
    }
    if lo <= 0.0 && hi >= 0.0 {
        return Err(Error::InvalidArgument(
            "window must exclude a neighbourhood of E = 0".into(),
        ));
    }
    let seq = sample_sequence(dist, n + 1, seed)?;
    let t = TruncatedJacobi::truncation(&seq, n)?;
    let tol = 1e-13 * edge;
    let lambdas = eigenvalues_in_interval(&t, lo, hi, tol);
    let vectors = eigenvectors(&t, &lambdas, tol)?;
    let mut reports = Vec::with_capacity(lambdas.len());
    let mut skipped = Vec::new();
    for (&lambda, u) in lambdas.iter().zip(&vectors) {
        let Ok((fit, reversed)) = two_sided_decay_fit(u) else {
            skipped.push(lambda);
            continue;
        };
        let tu = t.apply(u);
        let eigen_residual = tu
            .iter()
            .zip(u)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let l_ref = estimate_lyapunov(
            dist,
            lambda,
            reference.steps,
            reference.samples,
            reference.seed,
        )?
        .mean;
        reports.push(DecayReport {
            eigenvalue: lambda,
            fit,
            reversed,
            reference: l_ref,
            ratio: fit.rate / l_ref,
            eigen_residual,
        });
    }
    Ok(LocalizationReport { reports, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDecayReport {
    pub n: usize,
    pub k: u128,
    pub half_line: DecayFit,
    /// Fit of the per-generation sup over the same window, shifted by `N`.
    pub tree: DecayFit,
    pub reference: f64,
    pub epsilon: f64,
    /// `reference + log(2)/2 - epsilon`.
    pub threshold: f64,
    /// Per-generation sup of the lift, generations `0..=D`.
    pub generation_sup: Vec<f64>,
}

impl TreeDecayReport {
    pub fn passed(&self) -> bool {
        self.tree.rate >= self.threshold
    }

    /// `tree rate - half-line rate - log(2)/2`.
    pub fn dominance_margin(&self) -> f64 {
        self.tree.rate - self.half_line.rate - 0.5 * std::f64::consts::LN_2
    }

    /// Tree rate at least the fitted half-line rate plus `log(2)/2 - epsilon`.
    /// Holds for every tree with all branching numbers at least 2.
    pub fn dominates(&self) -> bool {
        self.dominance_margin() >= -self.epsilon
    }
}

/// Smallest `D - N` accepted by [`tree_decay_check`].
pub const MIN_TREE_DECAY_DEPTH: usize = 20;

/// Lifts `u` into block `(N, k)` and fits the decay of the per-generation
/// sup of the lift, to compare with `l_ref + log(2)/2`.
pub fn tree_decay_check(
    tree: &RadialTree,
    n: usize,
    k: u128,
    u: &[f64],
    l_ref: f64,
    epsilon: f64,
) -> Result<TreeDecayReport> {
    if tree.depth() < n + MIN_TREE_DECAY_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "tree depth {} leaves fewer than {MIN_TREE_DECAY_DEPTH} generations below N = {n}",
            tree.depth()
        )));
    }
    let (peak, last, floor) = decay_window(u)?;
    let half_line = fit_log_slope(u, peak, last, floor)?;
    let generation_sup = lift_generation_sup(tree, n, k, u)?;
    // same sample points as the half-line fit
    let masked: Vec<f64> = generation_sup[n..]
        .iter()
        .zip(u)
        .map(|(&s, &x)| if x.abs() > floor { s } else { 0.0 })
        .collect();
    let tree_fit = fit_log_slope(&masked, peak, last, 0.0)?;
    Ok(TreeDecayReport {
        n,
        k,
        half_line,
        tree: tree_fit,
        reference: l_ref,
        epsilon,
        threshold: l_ref + 0.5 * std::f64::consts::LN_2 - epsilon,
        generation_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::tridiag_eigenvalues;

    fn coin() -> BranchingDistribution {
        BranchingDistribution::uniform(&[2, 3]).unwrap()
    }

    #[test]
    fn weyl_vector_is_unit() {
        for (e, r) in [(0.0, 16), (1.0, 256), (2.0 * 3f64.sqrt(), 4096)] {
            let psi = WeylVector::new(e, 3, 5, r).unwrap();
            assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            WeylVector::new(3.5, 3, 0, 4),
            Err(Error::OutsideSpectrum { .. })
        ));
    }

    #[test]
    fn engineered_examples() {
        let dist = coin();
        let all = engineered_sequence(&dist, 3, 0, 50, 50, 1).unwrap();
        assert!(all.values().iter().all(|&v| v == 3));
        let plain = sample_sequence(&dist, 300, 9).unwrap();
        let planted = engineered_sequence(&dist, 3, 100, 64, 300, 9).unwrap();
        for i in (0..100).chain(164..300) {
            assert_eq!(plain.get(i), planted.get(i));
        }
        let mut longest = 0;
        let mut cur = 0;
        for &v in planted.values() {
            cur = if v == 3 { cur + 1 } else { 0 };
            longest = longest.max(cur);
        }
        assert!(longest >= 64);
        assert!(engineered_sequence(&dist, 3, 290, 20, 300, 9).is_err());
        assert!(engineered_sequence(&dist, 4, 0, 2, 300, 9).is_err());
    }

    #[test]
    fn weyl_residual_on_constant_run() {
        let dist = coin();
        let edge = 2.0 * 3f64.sqrt();
        for e in [0.0, 1.0, edge, -2.5] {
            let rows = weyl_scan(&dist, e, &[16, 64, 256, 1024, 4096], 4).unwrap();
            for w in &rows {
                assert!(w.within_bound(), "E={e}: {w:?}");
                // exact run: only the four boundary terms survive
                assert!((w.residual - 2.0 * 3f64.sqrt() / (w.r as f64).sqrt()).abs() < 1e-9);
            }
            for pair in rows.windows(2) {
                let ratio = pair[1].residual / pair[0].residual;
                assert!((ratio / 0.5 - 1.0).abs() < 0.5);
            }
        }
    }

    #[test]
    fn weyl_residual_outside_band() {
        let seq = BranchingSequence::constant(3, 100).unwrap();
        assert!(matches!(
            weyl_residual(&seq, 3.5, 5, 10, 3),
            Err(Error::OutsideSpectrum { .. })
        ));
    }

    #[test]
    fn free_chain_histogram() {
        let dist = BranchingDistribution::degenerate(2).unwrap();
        let h = spectrum_histogram(&dist, 100, 0, 20).unwrap();
        let exact: Vec<f64> = (1..=100)
            .map(|k| 2.0 * 2f64.sqrt() * (k as f64 * std::f64::consts::PI / 101.0).cos())
            .collect();
        let edges = &h.edges;
        for (i, &c) in h.counts.iter().enumerate() {
            let expected = exact
                .iter()
                .filter(|&&x| x >= edges[i] && x < edges[i + 1])
                .count();
            assert_eq!(c, expected, "bin {i}");
        }
        assert!((h.max - exact[0]).abs() < 1e-10);
        assert!((h.min - exact[99]).abs() < 1e-10);
        assert_eq!(h.outside, 0);
        assert_eq!(h.counts.iter().sum::<usize>(), 100);
    }

    #[test]
    fn histogram_extremes_match_full_solve() {
        let h = spectrum_histogram(&coin(), 500, 3, 40).unwrap();
        let seq = sample_sequence(&coin(), 500, 3).unwrap();
        let eigs = tridiag_eigenvalues(&TruncatedJacobi::truncation(&seq, 500).unwrap(), 1e-13);
        assert!((h.max - eigs[499]).abs() < 1e-10);
        assert!((h.min - eigs[0]).abs() < 1e-10);
        assert!(h.max <= 2.0 * 3f64.sqrt() + EDGE_SLACK);
        assert!(spectrum_histogram(&coin(), 50_001, 3, 40).is_err());
    }

    #[test]
    fn decay_fit_examples() {
        let u: Vec<f64> = (0..200).map(|j| (-0.3 * j as f64).exp()).collect();
        assert!((decay_rate_fit(&u).unwrap().rate - 0.3).abs() < 1e-9);
        let noisy: Vec<f64> = (0..200)
            .map(|j| (-0.3 * j as f64).exp() * (1.0 + 0.1 * if j % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        assert!((decay_rate_fit(&noisy).unwrap().rate - 0.3).abs() < 0.02);
        assert!(matches!(
            decay_rate_fit(&[1.0; 50]),
            Err(Error::InsufficientDecayWindow { .. })
        ));
        assert!(decay_rate_fit(&[0.0; 50]).is_err());
    }

    #[test]
    fn decay_fit_starts_at_peak() {
        let u: Vec<f64> = (0..100)
            .map(|j| (-0.2 * (j as f64 - 30.0).abs()).exp())
            .collect();
        let f = decay_rate_fit(&u).unwrap();
        assert_eq!(f.start, 30);
        assert!((f.rate - 0.2).abs() < 1e-9);
        let (g, _) = two_sided_decay_fit(&u).unwrap();
        assert!((g.rate - 0.2).abs() < 1e-9);
    }

    #[test]
    fn localization_on_coin_law() {
        let r =
            localization_report(&coin(), 2000, 1, (0.9, 1.1), ReferenceConfig::default()).unwrap();
        assert!(!r.reports.is_empty());
        for d in &r.reports {
            assert!(d.eigen_residual <= 1e-8);
        }
        let m = r.median_ratio().unwrap();
        assert!((0.5..=2.0).contains(&m), "median ratio {m}");
    }

    #[test]
    fn free_chain_shows_no_decay() {
        let dist = BranchingDistribution::degenerate(2).unwrap();
        let r =
            localization_report(&dist, 2000, 1, (0.9, 1.1), ReferenceConfig::default()).unwrap();
        assert!(r.median_rate().unwrap() <= 0.02, "{:?}", r.median_rate());
    }

    #[test]
    fn localization_window_checks() {
        let cfg = ReferenceConfig::default();
        assert!(localization_report(&coin(), 100, 1, (-0.5, 0.5), cfg).is_err());
        assert!(localization_report(&coin(), 100, 1, (3.0, 4.0), cfg).is_err());
        let empty = localization_report(&coin(), 100, 1, (3.0, 3.01), cfg).unwrap();
        assert!(empty.reports.is_empty());
    }

    #[test]
    fn binary_tree_adds_half_log_two() {
        let tree = RadialTree::new(&[2; 40], 40).unwrap();
        let u: Vec<f64> = (0..36)
            .map(|j| (-0.4 * j as f64).exp() * (1.0 + 0.05 * (j as f64).sin()))
            .collect();
        let r = tree_decay_check(&tree, 4, 3, &u, 0.4, 0.05).unwrap();
        assert!(
            (r.dominance_margin()).abs() < 1e-12,
            "{}",
            r.dominance_margin()
        );
        assert!(r.passed());
    }

    #[test]
    fn ternary_tree_adds_half_log_three() {
        let tree = RadialTree::new(&[3; 30], 30).unwrap();
        let u: Vec<f64> = (0..28).map(|j| (-0.25 * j as f64).exp()).collect();
        let r = tree_decay_check(&tree, 2, 1, &u, 0.25, 0.0).unwrap();
        assert!((r.tree.rate - 0.25 - 0.5 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn delta_lift_has_no_window() {
        let tree = RadialTree::new(&[2; 30], 30).unwrap();
        let mut u = vec![0.0; 31];
        u[0] = 1.0;
        assert!(matches!(
            tree_decay_check(&tree, 0, 1, &u, 0.1, 0.05),
            Err(Error::InsufficientDecayWindow { .. })
        ));
        assert!(tree_decay_check(
            &RadialTree::new(&[2; 10], 10).unwrap(),
            0,
            1,
            &u[..11],
            0.1,
            0.05
        )
        .is_err());
    }
}
