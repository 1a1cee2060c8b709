use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter outside its mathematical domain (bad dimension, radius,
    /// conductivity, mode index, step size, ...).
    #[error("invalid parameter: {0}")]
    Domain(String),

    /// Boundary perturbation violates admissibility (crosses the core margin,
    /// inconsistent coefficient data, bad parity).
    #[error("inadmissible boundary: {0}")]
    Geometry(String),

    /// The spectral collocation system could not be solved reliably.
    #[error("spectral solve failed: {0}")]
    Solver(String),

    /// Newton corrector ran out of iterations or line-search steps.
    #[error("corrector did not converge after {iters} iterations (residual sup-norm {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },

    /// Bisection window does not bracket a sign change.
    #[error("no sign change of the mode-{mode} dispersion coefficient on [{lo}, {hi}]")]
    NoCrossing { mode: usize, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
