//! The six analysis workflows. Each one resolves its RunConfig, runs the
//! corresponding library routine, prints a short console account and writes
//! deterministic CSV/JSON (and optionally SVG) files into the output
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use serrin2p::continuation::{self, CrCondition};
use serrin2p::geometry::FourierBoundary;
use serrin2p::{analytic, export, fieldsolver, linearization};

use crate::errors::{CliError, CliResult};
use crate::runconfig::RunConfig;
use crate::svg;

fn write_artifact(dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::Write {
        path: dir.display().to_string(),
        source: e,
    })?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| CliError::Write {
        path: path.display().to_string(),
        source: e,
    })?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// sigma-table: s(k) for k = 1..k_max, membership in Sigma, cutoff index.
pub fn sigma_table(rc: &RunConfig) -> CliResult<()> {
    let n = rc.n_dim();
    let r = rc.core_radius();
    let k_max = rc.k_max_or(10);
    let set = analytic::sigma_set(n, r, k_max)?;
    let values = (1..=k_max)
        .map(|k| analytic::bifurcation_value(n, r, k))
        .collect::<serrin2p::Result<Vec<f64>>>()?;

    println!("bifurcation values for N = {n}, R = {r}");
    println!("{:>4}  {:>22}  {}", "k", "s(k)", "in Sigma");
    for k in 1..=k_max {
        let member = set.members.iter().any(|&(j, _)| j == k);
        println!(
            "{k:>4}  {:>22.16}  {}",
            values[k - 1],
            if member { "yes" } else { "no" }
        );
    }
    match set.cutoff {
        Some(c) => println!("cutoff: s(k) <= 0 from k = {c} on"),
        None => println!("cutoff: not reached within k_max = {k_max}"),
    }

    write_artifact(&rc.out_dir(), "sigma_table.csv", &export::sigma_csv(n, r, &set, &values))?;
    Ok(())
}

/// dispersion: beta_k(lambda) and its lambda-slope on a uniform grid.
pub fn dispersion(rc: &RunConfig) -> CliResult<()> {
    let m = rc.require_mode()?;
    let r = rc.core_radius();
    let k_max = rc.k_max_or(8);
    let lmin = rc.lambda_min.unwrap_or(-0.02);
    let lmax = rc.lambda_max.unwrap_or(0.02);
    let steps = rc.lambda_steps.unwrap_or(41);
    if steps == 0 {
        return Err(CliError::Usage(
            "the lambda grid is empty (--lambda-steps 0); need at least one point".into(),
        ));
    }
    if !(lmin.is_finite() && lmax.is_finite()) || lmin > lmax {
        return Err(CliError::Usage(format!(
            "bad lambda grid: need finite lambda-min <= lambda-max, got [{lmin}, {lmax}]"
        )));
    }

    let curve = analytic::dispersion_curve(r, m)?;
    let grid: Vec<f64> = if steps == 1 {
        vec![lmin]
    } else {
        (0..steps)
            .map(|j| lmin + (lmax - lmin) * j as f64 / (steps - 1) as f64)
            .collect()
    };
    let mut rows = Vec::with_capacity(k_max * steps);
    for k in 1..=k_max {
        for &lambda in &grid {
            rows.push((
                k,
                lambda,
                analytic::dispersion_coefficient(r, m, k, lambda)?,
                analytic::dispersion_slope(r, m, k, lambda)?,
            ));
        }
    }

    println!(
        "dispersion about mode m = {m} at R = {r}: s(m) = {:.16}, slope at 0 = {:.16}",
        curve.s_value, curve.slope_at_zero
    );
    println!(
        "{} modes x {} lambda points on [{lmin}, {lmax}]; beta_m vanishes at lambda = 0",
        k_max, steps
    );
    write_artifact(
        &rc.out_dir(),
        "dispersion.csv",
        &export::dispersion_csv(r, m, curve.s_value, &rows),
    )?;
    Ok(())
}

fn read_boundary(path: &Path) -> CliResult<FourierBoundary> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// solve: residual trace of one boundary, optionally with a shape figure.
pub fn solve(rc: &RunConfig) -> CliResult<()> {
    let path = rc.boundary.as_ref().ok_or_else(|| {
        CliError::Usage("--boundary <file.json> is required for solve".into())
    })?;
    let g = read_boundary(path)?;

    // Contrast comes either from --mode-m/--lambda (sigma_c = s(m) + lambda)
    // or directly from --sigma-c.
    let (cfg, trace) = match rc.mode_m {
        Some(m) => {
            let lambda = rc.lambda();
            let sigma = analytic::bifurcation_value(2, rc.core_radius(), m)? + lambda;
            let cfg = rc.two_phase(sigma)?;
            let trace = fieldsolver::residual(&cfg, &g, m, lambda)?;
            (cfg, trace)
        }
        None => {
            let cfg = rc.two_phase(rc.sigma_core())?;
            let trace = fieldsolver::residual_direct(&cfg, &g)?;
            (cfg, trace)
        }
    };

    let sup = trace.sup_norm();
    let tol = rc.residual_tol.unwrap_or(1e-9);
    println!(
        "sigma_c = {:.16}, c_g = {:.16}, sup |Psi| = {:.3e} ({} tolerance {tol:.0e})",
        trace.sigma,
        trace.c_g,
        sup,
        if sup <= tol { "within" } else { "ABOVE" }
    );
    write_artifact(&rc.out_dir(), "residual.csv", &export::residual_csv(&trace))?;
    if rc.want_svg() {
        write_artifact(
            &rc.out_dir(),
            "shape.svg",
            &svg::shape_figure(cfg.core_radius, &g),
        )?;
    }
    Ok(())
}

/// linearize: finite-difference Jacobian spectrum at the trivial shape.
pub fn linearize(rc: &RunConfig) -> CliResult<()> {
    let m = rc.require_mode()?;
    let lambda = rc.lambda();
    let k_max = rc.k_max_or(8);
    let cfg = rc.two_phase(rc.sigma_core())?;

    let spectrum = linearization::spectrum_at_trivial(&cfg, m, lambda, k_max)?;
    let analytic_beta = (1..=k_max)
        .map(|k| analytic::dispersion_coefficient(cfg.core_radius, m, k, lambda))
        .collect::<serrin2p::Result<Vec<f64>>>()?;

    println!(
        "linearization at the trivial shape, m = {m}, lambda = {lambda}, K = {}",
        cfg.truncation
    );
    println!("{:>4}  {:>24}  {:>24}  {:>12}", "k", "beta numeric", "beta closed form", "leak");
    for (i, &k) in spectrum.modes.iter().enumerate() {
        println!(
            "{k:>4}  {:>24.16}  {:>24.16}  {:>12.3e}",
            spectrum.numeric_beta[i], analytic_beta[i], spectrum.leak[i]
        );
    }
    println!("off-diagonal norm: {:.3e}", spectrum.offdiag_norm);
    write_artifact(
        &rc.out_dir(),
        "spectrum.csv",
        &export::spectrum_csv(&spectrum, &analytic_beta),
    )?;
    Ok(())
}

/// branch: trace the symmetry-breaking branch of mode m and export it.
pub fn branch(rc: &RunConfig) -> CliResult<()> {
    let m = rc.require_mode()?;
    let eps_base = rc.eps_base.unwrap_or(1e-4);
    let eps_max = rc.eps_max.unwrap_or(1e-2);
    if !(eps_base > 0.0 && eps_base <= eps_max) || !eps_max.is_finite() {
        return Err(CliError::Usage(format!(
            "bad amplitude schedule: need 0 < eps-base <= eps-max, got [{eps_base}, {eps_max}]"
        )));
    }
    let schedule = continuation::geometric_schedule(eps_base, eps_max);
    let cfg = rc.two_phase(rc.sigma_core())?;
    let traced = continuation::trace_branch(&cfg, m, &schedule)?;

    let lam_max = traced
        .points
        .iter()
        .map(|p| p.lambda.abs())
        .fold(0.0, f64::max);
    println!(
        "mode-{m} branch: {} points, eps in [-{eps:.3e}, {eps:.3e}], max |lambda| = {lam_max:.3e}",
        traced.points.len(),
        eps = schedule.last().copied().unwrap_or(0.0),
    );
    if let Some(note) = &traced.truncated {
        println!("note: {note}");
    }

    let dir = rc.out_dir();
    write_artifact(&dir, "branch.csv", &export::branch_csv(&traced))?;
    write_artifact(&dir, "branch.json", &export::branch_json(&traced, &schedule))?;
    if rc.want_svg() {
        write_artifact(&dir, "branch_gallery.svg", &svg::branch_gallery(&traced))?;
    }
    Ok(())
}

/// verify: the bifurcation hypotheses at mode m plus a seeded rotation
/// spot check, written as one consolidated report.
pub fn verify(rc: &RunConfig) -> CliResult<()> {
    let m = rc.require_mode()?;
    let cfg = rc.two_phase(rc.sigma_core())?;
    let mut report = continuation::verify_crandall_rabinowitz_with_base(&cfg, m, rc.sigma_override)?;

    // Equivariance spot check: a random rotation of a random-amplitude
    // mode-m boundary must rotate the residual coefficients and nothing else.
    let seed = rc.seed();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let amp: f64 = rng.gen_range(5e-4..2e-3);
    let vcfg = rc.two_phase(report.base_sigma)?;
    let g = FourierBoundary::mode(vcfg.truncation, m, amp)?;
    let base = fieldsolver::residual_direct(&vcfg, &g)?;
    let turned = fieldsolver::residual_direct(&vcfg, &g.rotated(phi))?;
    let expected = base.fourier.rotated(phi);
    let mut dev = (turned.fourier.mean - expected.mean).abs();
    for k in 1..=vcfg.truncation {
        dev = dev.max((turned.fourier.cos_coeff(k) - expected.cos_coeff(k)).abs());
        dev = dev.max((turned.fourier.sin_coeff(k) - expected.sin_coeff(k)).abs());
    }
    let pass = dev <= 1e-10;
    report.conditions.push(CrCondition {
        name: "rotation-equivariance".into(),
        pass,
        measured: dev,
        expected: None,
        detail: format!(
            "seeded spot check (seed {seed}): amplitude {amp:.3e} rotated by {phi:.6}; \
             coefficient deviation vs rotated residual"
        ),
    });
    report.all_pass &= pass;

    println!(
        "bifurcation hypotheses at m = {m}, R = {}: s(m) = {:.16}, checks run at sigma_c = {:.16}",
        report.core_radius, report.s_value, report.base_sigma
    );
    for c in &report.conditions {
        println!(
            "[{}] {}: measured {:.3e}{} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            match c.expected {
                Some(e) => format!(", expected {e:.6e}"),
                None => String::new(),
            },
            c.detail
        );
    }
    write_artifact(&rc.out_dir(), "verify_report.json", &export::report_json(&report))?;

    if report.all_pass {
        println!("all conditions hold");
        Ok(())
    } else {
        Err(CliError::Failed(
            "one or more bifurcation hypotheses failed; see verify_report.json".into(),
        ))
    }
}
