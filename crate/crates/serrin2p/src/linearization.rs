//! Finite-difference linearization of the overdetermined residual around a
//! given shape, and the numeric dispersion analysis built from it.
//!
//! At the trivial shape the linearized residual is diagonal in the Fourier
//! basis: perturbing the boundary by eps cos(k theta) perturbs psi by
//! eps beta_k(lambda) cos(k theta) + O(eps^2). The routines here recover that
//! spectrum purely numerically (central differences of the nonlinear
//! residual), so agreement with the closed-form coefficients is a genuine
//! end-to-end check of the field solver, the geometry, and the analytic
//! module at once, not a tautology.

use nalgebra::DMatrix;

use crate::config::TwoPhaseConfig;
use crate::error::{Error, Result};
use crate::fieldsolver::{self, ResidualTrace};
use crate::fourier::FourierCoeffs;
use crate::geometry::{BoundaryTrace, FourierBoundary, Parity};

/// Default step for directional finite differences of the residual.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

fn check_step(step: f64) -> Result<()> {
    if !step.is_finite() || step.abs() <= 1e-12 {
        return Err(Error::Domain(format!(
            "finite-difference step {step} is not usable (need |step| > 1e-12)"
        )));
    }
    Ok(())
}

/// Central difference quotient of two residual traces.
fn quotient(plus: ResidualTrace, minus: ResidualTrace, step: f64) -> ResidualTrace {
    let inv = 1.0 / (2.0 * step);
    let diff = |p: &[f64], m: &[f64]| -> Vec<f64> {
        p.iter().zip(m).map(|(&a, &b)| (a - b) * inv).collect()
    };
    ResidualTrace {
        nodal: BoundaryTrace {
            nodes: plus.nodal.nodes.clone(),
            values: diff(&plus.nodal.values, &minus.nodal.values),
        },
        flux: BoundaryTrace {
            nodes: plus.flux.nodes.clone(),
            values: diff(&plus.flux.values, &minus.flux.values),
        },
        fourier: FourierCoeffs {
            mean: (plus.fourier.mean - minus.fourier.mean) * inv,
            cos: diff(&plus.fourier.cos, &minus.fourier.cos),
            sin: diff(&plus.fourier.sin, &minus.fourier.sin),
        },
        c_g: (plus.c_g - minus.c_g) * inv,
        sigma: plus.sigma,
        lambda: plus.lambda,
        truncation: plus.truncation,
    }
}

/// Directional derivative of the residual at shape g in the given direction,
/// with the contrast split sigma_c = s(mode) + lambda.
pub fn directional_derivative(
    cfg: &TwoPhaseConfig,
    g: &FourierBoundary,
    mode: usize,
    lambda: f64,
    direction: &FourierBoundary,
    step: f64,
) -> Result<ResidualTrace> {
    check_step(step)?;
    let plus = fieldsolver::residual(cfg, &g.add_scaled(direction, step), mode, lambda)?;
    let minus = fieldsolver::residual(cfg, &g.add_scaled(direction, -step), mode, lambda)?;
    Ok(quotient(plus, minus, step))
}

/// Same, but at the contrast stored in the configuration (no bifurcation
/// split). Used when probing deliberately detuned contrasts.
pub fn directional_derivative_direct(
    cfg: &TwoPhaseConfig,
    g: &FourierBoundary,
    direction: &FourierBoundary,
    step: f64,
) -> Result<ResidualTrace> {
    check_step(step)?;
    let plus = fieldsolver::residual_direct(cfg, &g.add_scaled(direction, step))?;
    let minus = fieldsolver::residual_direct(cfg, &g.add_scaled(direction, -step))?;
    Ok(quotient(plus, minus, step))
}

/// Numeric spectrum of the linearized residual at the trivial shape: the
/// diagonal entries beta_k and, per probed mode, the worst leakage into any
/// other Fourier coefficient.
#[derive(Clone, Debug, serde::Serialize)]
pub struct JacobianSpectrum {
    pub modes: Vec<usize>,
    pub numeric_beta: Vec<f64>,
    pub leak: Vec<f64>,
    pub offdiag_norm: f64,
    pub lambda: f64,
}

/// Probe the linearization at the trivial shape mode by mode. Requires
/// k_max <= K/2 so that the probed band sits well inside the truncation.
pub fn spectrum_at_trivial(
    cfg: &TwoPhaseConfig,
    mode: usize,
    lambda: f64,
    k_max: usize,
) -> Result<JacobianSpectrum> {
    if k_max < 1 || 2 * k_max > cfg.truncation {
        return Err(Error::Domain(format!(
            "spectrum probe band k_max = {k_max} must satisfy 1 <= k_max <= K/2 (K = {})",
            cfg.truncation
        )));
    }
    let trivial = FourierBoundary::zero(cfg.truncation);
    let mut numeric_beta = Vec::with_capacity(k_max);
    let mut leak = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let direction = FourierBoundary::mode(cfg.truncation, k, 1.0)?;
        let trace =
            directional_derivative(cfg, &trivial, mode, lambda, &direction, DEFAULT_FD_STEP)?;
        numeric_beta.push(trace.fourier.cos_coeff(k));
        let mut worst = trace.fourier.mean.abs();
        for j in 1..=cfg.truncation {
            if j != k {
                worst = worst.max(trace.fourier.cos_coeff(j).abs());
            }
            worst = worst.max(trace.fourier.sin_coeff(j).abs());
        }
        leak.push(worst);
    }
    let offdiag_norm = leak.iter().fold(0.0, |m: f64, &v| m.max(v));
    Ok(JacobianSpectrum { modes: (1..=k_max).collect(), numeric_beta, leak, offdiag_norm, lambda })
}

/// Numeric diagonal entry beta_mode(lambda), obtained from one directional
/// derivative at the trivial shape.
fn numeric_diagonal(cfg: &TwoPhaseConfig, mode: usize, lambda: f64) -> Result<f64> {
    let trivial = FourierBoundary::zero(cfg.truncation);
    let direction = FourierBoundary::mode(cfg.truncation, mode, 1.0)?;
    let trace = directional_derivative(cfg, &trivial, mode, lambda, &direction, DEFAULT_FD_STEP)?;
    Ok(trace.fourier.cos_coeff(mode))
}

/// Locate the zero of the numeric diagonal entry beta_mode over a lambda
/// window by bisection, down to a window width of 1e-9.
pub fn detect_bifurcation(cfg: &TwoPhaseConfig, mode: usize, window: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = window;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bifurcation window ({lo}, {hi})")));
    }
    let mut f_lo = numeric_diagonal(cfg, mode, lo)?;
    let f_hi = numeric_diagonal(cfg, mode, hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoCrossing { mode, lo, hi });
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        let f_mid = numeric_diagonal(cfg, mode, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn assemble_with<F>(truncation: usize, parity: Parity, mut derivative: F) -> Result<DMatrix<f64>>
where
    F: FnMut(&FourierBoundary) -> Result<ResidualTrace>,
{
    let k = truncation;
    let size = match parity {
        Parity::Even => k,
        Parity::General => 2 * k,
    };
    let mut jac = DMatrix::<f64>::zeros(size, size);
    for col in 0..size {
        let mut cos = vec![0.0; k];
        let mut sin = vec![0.0; k];
        if col < k {
            cos[col] = 1.0;
        } else {
            sin[col - k] = 1.0;
        }
        let direction = match parity {
            Parity::Even => FourierBoundary::even(cos),
            Parity::General => FourierBoundary::general(cos, sin)?,
        };
        let trace = derivative(&direction)?;
        for row in 1..=k {
            jac[(row - 1, col)] = trace.fourier.cos_coeff(row);
            if parity == Parity::General {
                jac[(k + row - 1, col)] = trace.fourier.sin_coeff(row);
            }
        }
    }
    Ok(jac)
}

/// Full finite-difference Jacobian of the residual's Fourier coefficients
/// with respect to the boundary's, at shape g and contrast s(mode) + lambda.
/// Even parity restricts to the cosine-cosine block (K x K); general parity
/// returns the stacked [cos; sin] x [cos; sin] matrix (2K x 2K).
pub fn assemble_jacobian(
    cfg: &TwoPhaseConfig,
    g: &FourierBoundary,
    mode: usize,
    lambda: f64,
    parity: Parity,
) -> Result<DMatrix<f64>> {
    assemble_with(cfg.truncation, parity, |direction| {
        directional_derivative(cfg, g, mode, lambda, direction, DEFAULT_FD_STEP)
    })
}

/// Jacobian at the contrast stored in the configuration itself.
pub fn assemble_jacobian_direct(
    cfg: &TwoPhaseConfig,
    g: &FourierBoundary,
    parity: Parity,
) -> Result<DMatrix<f64>> {
    assemble_with(cfg.truncation, parity, |direction| {
        directional_derivative_direct(cfg, g, direction, DEFAULT_FD_STEP)
    })
}

/// Kernel dimension of a Jacobian: the number of singular values below
/// rel_tol times the largest one.
pub fn kernel_dimension(matrix: &DMatrix<f64>, rel_tol: f64) -> usize {
    let svd = matrix.clone().svd(false, false);
    let s_max = svd.singular_values.max();
    if s_max == 0.0 {
        return matrix.ncols();
    }
    svd.singular_values.iter().filter(|&&s| s < rel_tol * s_max).count()
}
