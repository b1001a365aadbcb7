use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rtsl_core::cocycle::{furstenberg_witness, invariant_direction_check};
use rtsl_core::decomposition::{
    basis_sup_norms, block_eigenpair, multiplicities, spectral_multiset_check, verify_block_action,
    MultiplicityTable,
};
use rtsl_core::experiments::{
    localization_report, spectrum_histogram, tree_decay_check, weyl_scan, ReferenceConfig,
};
use rtsl_core::linalg::sl2_norm;
use rtsl_core::lyapunov::{estimate_lyapunov, linspace, lyapunov_curve};
use rtsl_core::plot::{emit_svg, PlotRow, PlotStyle};
use rtsl_core::randomness::{sample_sequence, BranchingDistribution};
use rtsl_core::tree::RadialTree;

use crate::config::{EnergyGrid, RunConfig};
use crate::output::{csv_bytes, read_csv, write_output, Cell};
use crate::{
    CliError, Command, DecayArgs, DecomposeArgs, FurstenbergArgs, LyapunovArgs, PlotArgs,
    SpectrumArgs, TreeDecayArgs, WeylArgs,
};

type Out<'a> = &'a mut Vec<u8>;

pub fn dispatch(command: &Command, out: Out) -> Result<(), CliError> {
    match command {
        Command::Lyapunov(a) => lyapunov(a, out),
        Command::Spectrum(a) => spectrum(a, out),
        Command::Decay(a) => decay(a, out),
        Command::Weyl(a) => weyl(a, out),
        Command::DecomposeVerify(a) => decompose_verify(a, out),
        Command::TreeDecay(a) => tree_decay(a, out),
        Command::Furstenberg(a) => furstenberg(a, out),
        Command::Plot(a) => plot(a, out),
    }
}

fn parse_dist(literal: &str) -> Result<BranchingDistribution, CliError> {
    BranchingDistribution::parse(literal).map_err(|e| CliError::Usage(e.to_string()))
}

/// Writes `bytes` to `path` with its sidecar, or to `out` when no path is given.
fn emit(
    path: Option<&Path>,
    bytes: &[u8],
    config: &RunConfig,
    started: Instant,
    out: Out,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            write_output(p, bytes, config, started.elapsed().as_secs_f64())?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.extend_from_slice(bytes),
    }
    Ok(())
}

fn lyapunov(a: &LyapunovArgs, out: Out) -> Result<(), CliError> {
    let started = Instant::now();
    let dist = parse_dist(&a.dist)?;
    let mut config = RunConfig::new("lyapunov");
    config.dist = Some(dist.to_string());
    config.n = Some(a.n);
    config.samples = Some(a.samples);
    config.seed = Some(a.seed);
    config.output = a.out.clone();
    let grid = match &a.energies {
        Some(e) => {
            config.energies = Some(e.clone());
            e.clone()
        }
        None => {
            if a.steps == 0 {
                return Err(CliError::Usage("--steps must be positive".into()));
            }
            config.grid = Some(EnergyGrid {
                emin: a.emin,
                emax: a.emax,
                steps: a.steps,
            });
            linspace(a.emin, a.emax, a.steps)
        }
    };
    let curve = lyapunov_curve(&dist, &grid, a.n, a.samples, a.seed)?;
    let rows: Vec<Vec<Cell>> = curve
        .iter()
        .map(|e| {
            vec![
                Cell::F(e.energy),
                Cell::F(e.mean),
                Cell::F(e.std_err),
                Cell::U(e.n as u64),
                Cell::U(e.samples as u64),
            ]
        })
        .collect();
    let bytes = csv_bytes(&["energy", "lyapunov", "std_err", "n", "samples"], &rows)?;
    emit(a.out.as_deref(), &bytes, &config, started, out)
}

fn spectrum(a: &SpectrumArgs, out: Out) -> Result<(), CliError> {
    let started = Instant::now();
    let dist = parse_dist(&a.dist)?;
    let mut config = RunConfig::new("spectrum");
    config.dist = Some(dist.to_string());
    config.n = Some(a.size);
    config.bins = Some(a.bins);
    config.seed = Some(a.seed);
    config.output = a.out.clone();
    let h = spectrum_histogram(&dist, a.size, a.seed, a.bins)?;
    let rows: Vec<Vec<Cell>> = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            vec![
                Cell::F(h.edges[i]),
                Cell::F(h.edges[i + 1]),
                Cell::U(c as u64),
            ]
        })
        .collect();
    let bytes = csv_bytes(&["bin_left", "bin_right", "count"], &rows)?;
    let edge = 2.0 * f64::from(dist.d_mu()).sqrt();
    writeln!(out, "size {}  band edge {:.12}", h.n, edge)?;
    writeln!(out, "min eigenvalue {:.12}", h.min)?;
    writeln!(out, "max eigenvalue {:.12}", h.max)?;
    writeln!(out, "empty bin fraction {:.6}", h.empty_fraction)?;
    writeln!(out, "eigenvalues outside band {}", h.outside)?;
    if a.out.is_some() {
        emit(a.out.as_deref(), &bytes, &config, started, out)?;
    }
    if h.outside > 0 {
        return Err(CliError::Check(format!(
            "{} eigenvalues beyond the band edge {edge}",
            h.outside
        )));
    }
    Ok(())
}

fn decay(a: &DecayArgs, out: Out) -> Result<(), CliError> {
    let started = Instant::now();
    let dist = parse_dist(&a.dist)?;
    let [lo, hi] = a.window[..] else {
        return Err(CliError::Usage(format!(
            "--window needs two values a,b, got {:?}",
            a.window
        )));
    };
    let mut config = RunConfig::new("decay");
    config.dist = Some(dist.to_string());
    config.n = Some(a.size);
    config.seed = Some(a.seed);
    config.output = a.out.clone();
    config = config
        .extra("window", format!("{lo},{hi}"))
        .extra("ref_n", a.ref_n)
        .extra("ref_samples", a.ref_samples);
    let reference = ReferenceConfig {
        steps: a.ref_n,
        samples: a.ref_samples,
        seed: a.seed,
    };
    let report = localization_report(&dist, a.size, a.seed, (lo, hi), reference)?;
    let rows: Vec<Vec<Cell>> = report
        .reports
        .iter()
        .map(|r| {
            vec![
                Cell::F(r.eigenvalue),
                Cell::F(r.fit.rate),
                Cell::F(r.reference),
                Cell::F(r.ratio),
                Cell::F(r.fit.residual),
            ]
        })
        .collect();
    let bytes = csv_bytes(
        &[
            "eigenvalue",
            "fitted_rate",
            "reference_L",
            "ratio",
            "fit_residual",
        ],
        &rows,
    )?;
    writeln!(
        out,
        "eigenvalues in window {}",
        report.reports.len() + report.skipped.len()
    )?;
    writeln!(
        out,
        "fitted {}  skipped {}",
        report.reports.len(),
        report.skipped.len()
    )?;
    if let Some(m) = report.median_ratio() {
        writeln!(out, "median fitted/reference ratio {m:.6}")?;
    }
    if let Some(m) = report.median_rate() {
        writeln!(out, "median fitted rate {m:.6}")?;
    }
    if a.out.is_some() {
        emit(a.out.as_deref(), &bytes, &config, started, out)?;
    }
    Ok(())
}

fn weyl(a: &WeylArgs, out: Out) -> Result<(), CliError> {
    let started = Instant::now();
    if a.dmax < 2 {
        return Err(CliError::Usage("--dmax must be at least 2".into()));
    }
    let values: Vec<u32> = (2..=a.dmax).collect();
    let dist = BranchingDistribution::uniform(&values)?;
    let mut config = RunConfig::new("weyl");
    config.dist = Some(dist.to_string());
    config.energies = Some(vec![a.energy]);
    config.seed = Some(a.seed);
    config.output = a.out.clone();
    config = config.extra(
        "runs",
        a.runs
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    let rows = weyl_scan(&dist, a.energy, &a.runs, a.seed)?;
    writeln!(out, "{:>8} {:>22} {:>22}", "R", "residual", "bound")?;
    for r in &rows {
        writeln!(out, "{:>8} {:>22.15e} {:>22.15e}", r.r, r.residual, r.bound)?;
    }
    if a.out.is_some() {
        let cells: Vec<Vec<Cell>> = rows
            .iter()
            .map(|r| vec![Cell::U(r.r as u64), Cell::F(r.residual), Cell::F(r.bound)])
            .collect();
        emit(
            a.out.as_deref(),
            &csv_bytes(&["r", "residual", "bound"], &cells)?,
            &config,
            started,
            out,
        )?;
    }
    if let Some(bad) = rows.iter().find(|r| !r.within_bound()) {
        return Err(CliError::Check(format!(
            "Weyl residual {} exceeds bound {} at R = {}",
            bad.residual, bad.bound, bad.r
        )));
    }
    Ok(())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn decompose_verify(a: &DecomposeArgs, out: Out) -> Result<(), CliError> {
    let branching = match &a.branching {
        Some(b) => b.clone(),
        None => sample_sequence(&parse_dist(&a.dist)?, a.depth.max(1), a.seed)?
            .values()
            .to_vec(),
    };
    let tree = RadialTree::new(&branching, a.depth)?;
    let beta: MultiplicityTable = multiplicities(&tree);
    writeln!(out, "branching {}", join(tree.branching()))?;
    writeln!(out, "beta = {}", join(beta.beta()))?;
    let dim = beta.total_dimension();
    let vertices = tree.total_vertices();
    writeln!(out, "dimension identity {dim} = {vertices}")?;
    if dim != vertices {
        return Err(CliError::Check(format!(
            "dimension identity violated: {dim} != {vertices}"
        )));
    }
    let mut max_residual = 0.0f64;
    for n in 0..=tree.depth() {
        for k in 1..=beta.get(n) {
            let r = verify_block_action(&tree, n, k, a.tol)?;
            max_residual = max_residual.max(r.max_residual);
        }
    }
    writeln!(out, "max block residual {max_residual:.3e}")?;
    let sups_ok = (0..=tree.depth()).all(|n| {
        basis_sup_norms(&tree, n, 1).is_ok_and(|s| {
            s.windows(2).enumerate().all(|(j, w)| {
                ((w[1] / w[0]).powi(2) * f64::from(tree.b(n + j)) - 1.0).abs() < 1e-12
            })
        })
    });
    writeln!(
        out,
        "sup-norm ratios b^(-1/2): {}",
        if sups_ok { "ok" } else { "FAILED" }
    )?;
    let report = spectral_multiset_check(&tree, a.tol)?;
    writeln!(
        out,
        "max spectral discrepancy {:.3e} (tol {:.1e})",
        report.max_discrepancy, a.tol
    )?;
    if !sups_ok {
        return Err(CliError::Check("sup-norm ratio".into()));
    }
    if !report.passed() {
        return Err(CliError::Check(format!(
            "spectral discrepancy {:e} above {:e}",
            report.max_discrepancy, a.tol
        )));
    }
    Ok(())
}

fn tree_decay(a: &TreeDecayArgs, out: Out) -> Result<(), CliError> {
    let started = Instant::now();
    let dist = parse_dist(&a.dist)?;
    let seq = sample_sequence(&dist, a.depth.max(1), a.branching_seed)?;
    let tree = RadialTree::from_sequence(&seq, a.depth)?;
    let (lambda, u) = block_eigenpair(&tree, a.block, a.energy)?;
    let l_ref = estimate_lyapunov(&dist, lambda, a.ref_n, a.ref_samples, a.branching_seed)?.mean;
    let report = tree_decay_check(&tree, a.block, a.k, &u, l_ref, a.eps)?;
    writeln!(
        out,
        "block (N, k) = ({}, {}), eigenvalue {lambda:.12}",
        a.block, a.k
    )?;
    writeln!(
        out,
        "half-line rate {:.6} over [{}, {}]",
        report.half_line.rate, report.half_line.start, report.half_line.end
    )?;
    writeln!(out, "tree rate {:.6}", report.tree.rate)?;
    writeln!(out, "reference L {:.6}", report.reference)?;
    writeln!(
        out,
        "tree rate vs L + log(2)/2 - eps = {:.6}: {}",
        report.threshold,
        if report.passed() { "above" } else { "below" }
    )?;
    writeln!(
        out,
        "dominance margin (tree - half-line - log(2)/2) {:.3e}",
        report.dominance_margin()
    )?;
    if let Some(path) = &a.out {
        let mut config = RunConfig::new("tree-decay");
        config.dist = Some(dist.to_string());
        config.depth = Some(a.depth);
        config.seed = Some(a.branching_seed);
        config.energies = Some(vec![a.energy]);
        config.output = Some(path.clone());
        config = config
            .extra("N", a.block)
            .extra("k", a.k)
            .extra("eps", a.eps)
            .extra("ref_n", a.ref_n)
            .extra("ref_samples", a.ref_samples);
        let rows: Vec<Vec<Cell>> = report
            .generation_sup
            .iter()
            .enumerate()
            .map(|(m, &s)| vec![Cell::U(m as u64), Cell::F(s)])
            .collect();
        emit(
            Some(path),
            &csv_bytes(&["generation", "sup"], &rows)?,
            &config,
            started,
            out,
        )?;
    }
    if !report.dominates() {
        return Err(CliError::Check(format!(
            "tree rate {:.6} below half-line rate {:.6} + log(2)/2 - {}",
            report.tree.rate, report.half_line.rate, report.epsilon
        )));
    }
    Ok(())
}

fn furstenberg(a: &FurstenbergArgs, out: Out) -> Result<(), CliError> {
    let w = furstenberg_witness(a.alpha, a.beta, a.energy, a.n)?;
    let m = w.matrix;
    writeln!(
        out,
        "A_{} = (M_{} M_{}^-1)^{} at E = {}",
        a.n, a.alpha, a.beta, a.n, a.energy
    )?;
    writeln!(out, "  [[{:.12e}, {:.12e}],", m.a, m.b)?;
    writeln!(out, "   [{:.12e}, {:.12e}]]", m.c, m.d)?;
    writeln!(
        out,
        "norm {:.12}  expected {:.12}",
        w.norm,
        sl2_norm(&w.expected)
    )?;
    writeln!(
        out,
        "relative deviation from diagonal form {:.3e}",
        w.residual
    )?;
    let dist = match &a.dist {
        Some(d) => parse_dist(d)?,
        None => BranchingDistribution::uniform(&[a.alpha, a.beta])?,
    };
    let r = invariant_direction_check(&dist, a.energy)?;
    writeln!(out, "atoms {}", join(&dist.values().collect::<Vec<_>>()))?;
    writeln!(out, "V1 invariant {}", r.v1_invariant)?;
    writeln!(out, "V2 invariant {}", r.v2_invariant)?;
    writeln!(out, "V1 u V2 invariant {}", r.union_invariant)?;
    writeln!(out, "swap V1 <-> V2 {}", r.swap_detected)?;
    writeln!(out, "common fixed directions {}", r.fixed_directions.len())?;
    if a.energy != 0.0 && !(r.no_invariant_axis_set() && r.fix_is_empty()) {
        return Err(CliError::Check(format!(
            "invariant direction found at E = {}",
            a.energy
        )));
    }
    Ok(())
}

fn column(header: &[String], name: &str) -> Result<usize, CliError> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Usage(format!("no column {name:?} in {}", header.join(","))))
}

fn plot(a: &PlotArgs, out: Out) -> Result<(), CliError> {
    let started = Instant::now();
    let (header, rows) = read_csv(&a.input)?;
    if header.len() < 2 {
        return Err(CliError::Usage("need at least two columns to plot".into()));
    }
    let xi = a.x.as_deref().map_or(Ok(0), |n| column(&header, n))?;
    let yi = a.y.as_deref().map_or(Ok(1), |n| column(&header, n))?;
    let ei = match a.err.as_deref() {
        Some(n) => Some(column(&header, n)?),
        None => header.iter().position(|h| h == "std_err"),
    };
    let num = |s: &str, row: usize| {
        s.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("row {}: {s:?} is not a number", row + 1)))
    };
    let mut points = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let err = match ei {
            Some(e) => Some(num(&r[e], i)?),
            None => None,
        };
        points.push(PlotRow {
            x: num(&r[xi], i)?,
            y: num(&r[yi], i)?,
            err,
        });
    }
    let style = PlotStyle {
        title: a.title.clone(),
        x_label: header[xi].clone(),
        y_label: header[yi].clone(),
        ..PlotStyle::default()
    };
    let svg = emit_svg(&points, &style)?;
    let mut config = RunConfig::new("plot");
    config.input = Some(a.input.clone());
    config.output = Some(a.out.clone());
    config = config.extra("x", &header[xi]).extra("y", &header[yi]);
    if let Some(e) = ei {
        config = config.extra("err", &header[e]);
    }
    emit(Some(&a.out), svg.as_bytes(), &config, started, out)
}
