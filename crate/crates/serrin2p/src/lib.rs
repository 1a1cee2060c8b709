//! Solver and bifurcation-analysis toolkit for a two-phase Serrin-type
//! overdetermined problem.
//!
//! The concentric configuration (core B_R inside the unit disk, conductivity
//! sigma_c in the core and 1 outside) solves
//!
//!   -div(sigma grad u) = 1  in Omega,   u = 0  and  d_n u = c  on  dOmega
//!
//! for every sigma_c. At the conductivities s(k) collected in the bifurcation
//! set Sigma this trivial family loses local uniqueness, and branches of
//! non-radial domains Omega_g with g ~ eps cos(m theta) split off. The crates'
//! modules follow that storyline:
//!
//! - [`analytic`]: closed forms: bifurcation values s(k), the set Sigma,
//!   dispersion coefficients beta_k(lambda), the transversality slope, and the
//!   exact radial base solution;
//! - [`geometry`]: the perturbed boundary r = 1 + g(theta) as a truncated
//!   Fourier series, with measures, normals and the compatibility constant;
//! - [`fieldsolver`]: spectral solution of the two-phase Dirichlet problem and
//!   the overdetermined residual Psi(g, lambda);
//! - [`linearization`]: finite-difference Frechet derivative, its Fourier
//!   diagonalization, and bifurcation detection;
//! - [`continuation`]: Newton tracing of the symmetry-breaking branches and a
//!   numerical audit of the Crandall-Rabinowitz hypotheses;
//! - [`export`]: deterministic CSV/JSON serializations of the result types.

pub mod analytic;
pub mod config;
pub mod continuation;
pub mod error;
pub mod export;
pub mod fieldsolver;
pub mod fourier;
pub mod geometry;
pub mod linearization;

pub use config::TwoPhaseConfig;
pub use error::{Error, Result};
