//! Deterministic text export of computed objects.
//!
//! Numbers are written as {:.16e} (17 significant digits), enough to
//! reproduce every f64 bit-for-bit from the text, and all container ordering
//! is fixed, so re-running a computation yields byte-identical files. CSV
//! bodies carry a single leading comment line with a JSON header when the
//! table needs context (the residual trace and dispersion table do; plain
//! tables do not).

use serde::Serialize;

use crate::analytic::SigmaSet;
use crate::continuation::Branch;
use crate::fieldsolver::ResidualTrace;
use crate::linearization::JacobianSpectrum;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Residual trace as CSV: a JSON comment header carrying the scalars, then
/// theta, psi, flux rows on the collocation angles.
pub fn residual_csv(trace: &ResidualTrace) -> String {
    let header = serde_json::json!({
        "c_g": trace.c_g,
        "lambda": trace.lambda,
        "sigma": trace.sigma,
        "K": trace.truncation,
        "M_col": trace.nodal.nodes.len(),
    });
    let mut out = format!("# {header}\ntheta,psi,flux\n");
    for (i, &theta) in trace.nodal.nodes.iter().enumerate() {
        out.push_str(&fmt(theta));
        out.push(',');
        out.push_str(&fmt(trace.nodal.values[i]));
        out.push(',');
        out.push_str(&fmt(trace.flux.values[i]));
        out.push('\n');
    }
    out
}

/// Numeric spectrum vs. closed-form dispersion coefficients:
/// k, beta_numeric, beta_analytic, abs_error, offdiag.
pub fn spectrum_csv(spectrum: &JacobianSpectrum, analytic: &[f64]) -> String {
    assert_eq!(
        analytic.len(),
        spectrum.modes.len(),
        "one analytic coefficient per probed mode"
    );
    let mut out = String::from("k,beta_numeric,beta_analytic,abs_error,offdiag\n");
    for (i, &k) in spectrum.modes.iter().enumerate() {
        let numeric = spectrum.numeric_beta[i];
        out.push_str(&format!(
            "{k},{},{},{},{}\n",
            fmt(numeric),
            fmt(analytic[i]),
            fmt((numeric - analytic[i]).abs()),
            fmt(spectrum.leak[i]),
        ));
    }
    out
}

/// Bifurcation-set table: k, s_k, member (1 when s(k) > 0), with the cutoff
/// index in the JSON header.
pub fn sigma_csv(n_dim: u32, core_radius: f64, set: &SigmaSet, values: &[f64]) -> String {
    assert_eq!(values.len(), set.k_max, "one value per mode up to k_max");
    let header = serde_json::json!({
        "N": n_dim,
        "R": core_radius,
        "k_max": set.k_max,
        "cutoff": set.cutoff,
    });
    let mut out = format!("# {header}\nk,s_k,member\n");
    for (i, &s) in values.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, fmt(s), u8::from(s > 0.0)));
    }
    out
}

/// Dispersion table over a lambda grid: k, lambda, beta, slope.
pub fn dispersion_csv(
    core_radius: f64,
    mode: usize,
    s_value: f64,
    rows: &[(usize, f64, f64, f64)],
) -> String {
    let header = serde_json::json!({
        "R": core_radius,
        "m": mode,
        "s_m": s_value,
    });
    let mut out = format!("# {header}\nk,lambda,beta,slope\n");
    for &(k, lambda, beta, slope) in rows {
        out.push_str(&format!("{k},{},{},{}\n", fmt(lambda), fmt(beta), fmt(slope)));
    }
    out
}

/// Branch as CSV: epsilon, lambda, residual_norm, then the flattened cosine
/// coefficients g_cos_1..g_cos_K of each boundary.
pub fn branch_csv(branch: &Branch) -> String {
    let k = branch.config.truncation;
    let mut out = String::from("epsilon,lambda,residual_norm");
    for j in 1..=k {
        out.push_str(&format!(",g_cos_{j}"));
    }
    out.push('\n');
    for point in &branch.points {
        out.push_str(&fmt(point.epsilon));
        out.push(',');
        out.push_str(&fmt(point.lambda));
        out.push(',');
        out.push_str(&fmt(point.residual_norm));
        for j in 1..=k {
            out.push(',');
            out.push_str(&fmt(point.boundary.cos_coeff(j)));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct BranchDocument<'a> {
    mode: usize,
    config: &'a crate::config::TwoPhaseConfig,
    schedule: &'a [f64],
    truncated: &'a Option<String>,
    points: &'a [crate::continuation::BranchPoint],
}

/// Branch as a self-contained JSON document embedding the configuration and
/// the amplitude schedule that produced it.
pub fn branch_json(branch: &Branch, schedule: &[f64]) -> String {
    let doc = BranchDocument {
        mode: branch.mode,
        config: &branch.config,
        schedule,
        truncated: &branch.truncated,
        points: &branch.points,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("branch document serializes");
    text.push('\n');
    text
}

/// Pretty JSON for any serializable report.
pub fn report_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}
