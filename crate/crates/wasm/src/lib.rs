//! Browser bindings. Each entry point runs one experiment and returns an SVG
//! document for the page to insert.

use rtsl_core::experiments::{decay_window, spectrum_histogram};
use rtsl_core::jacobi::{eigenvector_inverse_iteration, tridiag_eigenvalues, TruncatedJacobi};
use rtsl_core::lyapunov::{linspace, lyapunov_curve};
use rtsl_core::plot::{emit_svg, PlotRow, PlotStyle};
use rtsl_core::randomness::{sample_sequence, BranchingDistribution};
use wasm_bindgen::prelude::*;

/// Largest truncation the eigenvector demo will diagonalize.
pub const MAX_PROFILE_SIZE: usize = 4000;
/// Largest `n * samples * steps` accepted by the Lyapunov demo.
pub const MAX_LYAPUNOV_WORK: usize = 50_000_000;

fn err(e: impl ToString) -> String {
    e.to_string()
}

pub fn lyapunov_svg(
    dist: &str,
    emin: f64,
    emax: f64,
    steps: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<String, String> {
    if n.saturating_mul(samples).saturating_mul(steps) > MAX_LYAPUNOV_WORK {
        return Err(format!("n * samples * steps exceeds {MAX_LYAPUNOV_WORK}"));
    }
    let dist = BranchingDistribution::parse(dist).map_err(err)?;
    let curve =
        lyapunov_curve(&dist, &linspace(emin, emax, steps), n, samples, seed).map_err(err)?;
    let rows: Vec<PlotRow> = curve
        .iter()
        .map(|e| PlotRow::with_err(e.energy, e.mean, e.std_err))
        .collect();
    let style = PlotStyle {
        title: format!("Lyapunov exponent, {dist}"),
        x_label: "E".into(),
        y_label: "L(E)".into(),
        ..PlotStyle::default()
    };
    emit_svg(&rows, &style).map_err(err)
}

pub fn spectrum_svg(dist: &str, size: usize, seed: u64, bins: usize) -> Result<String, String> {
    let dist = BranchingDistribution::parse(dist).map_err(err)?;
    let h = spectrum_histogram(&dist, size, seed, bins).map_err(err)?;
    let rows: Vec<PlotRow> = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| PlotRow::new(0.5 * (h.edges[i] + h.edges[i + 1]), c as f64))
        .collect();
    let style = PlotStyle {
        title: format!(
            "eigenvalue counts, n = {size}, range [{:.4}, {:.4}]",
            h.min, h.max
        ),
        x_label: "eigenvalue".into(),
        y_label: "count".into(),
        ..PlotStyle::default()
    };
    emit_svg(&rows, &style).map_err(err)
}

/// `log10 |u_j|` for the truncation eigenvector whose eigenvalue is closest
/// to `energy`, with the fitted decay rate in the title.
pub fn eigenvector_svg(dist: &str, size: usize, seed: u64, energy: f64) -> Result<String, String> {
    if !(2..=MAX_PROFILE_SIZE).contains(&size) {
        return Err(format!("size must lie in [2, {MAX_PROFILE_SIZE}]"));
    }
    let dist = BranchingDistribution::parse(dist).map_err(err)?;
    let seq = sample_sequence(&dist, size + 1, seed).map_err(err)?;
    let t = TruncatedJacobi::truncation(&seq, size).map_err(err)?;
    let lambda = tridiag_eigenvalues(&t, t.default_tol())
        .into_iter()
        .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()))
        .ok_or("empty spectrum")?;
    let u = eigenvector_inverse_iteration(&t, lambda).map_err(err)?;
    let rate = match decay_window(&u)
        .and_then(|(s, e, floor)| rtsl_core::experiments::fit_log_slope(&u, s, e, floor))
    {
        Ok(fit) => format!("fitted rate {:.4}", fit.rate),
        Err(_) => "no decay window".into(),
    };
    let floor = u.iter().fold(0.0f64, |m, x| m.max(x.abs())) * 1e-16;
    let rows: Vec<PlotRow> = u
        .iter()
        .enumerate()
        .map(|(j, x)| PlotRow::new((j + 1) as f64, x.abs().max(floor).log10()))
        .collect();
    let style = PlotStyle {
        title: format!("eigenvector at {lambda:.6}, {rate}"),
        x_label: "site".into(),
        y_label: "log10 |u|".into(),
        ..PlotStyle::default()
    };
    emit_svg(&rows, &style).map_err(err)
}

// Seeds are u32 on the JS side so they stay plain numbers.
#[wasm_bindgen(js_name = lyapunovCurve)]
pub fn lyapunov_curve_js(
    dist: &str,
    emin: f64,
    emax: f64,
    steps: usize,
    n: usize,
    samples: usize,
    seed: u32,
) -> Result<String, JsValue> {
    lyapunov_svg(dist, emin, emax, steps, n, samples, seed.into())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = spectrumHistogram)]
pub fn spectrum_histogram_js(
    dist: &str,
    size: usize,
    seed: u32,
    bins: usize,
) -> Result<String, JsValue> {
    spectrum_svg(dist, size, seed.into(), bins).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = eigenvectorProfile)]
pub fn eigenvector_profile_js(
    dist: &str,
    size: usize,
    seed: u32,
    energy: f64,
) -> Result<String, JsValue> {
    eigenvector_svg(dist, size, seed.into(), energy).map_err(|e| JsValue::from_str(&e))
}
