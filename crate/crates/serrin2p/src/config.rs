//! Shared problem configuration.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_TRUNCATION: usize = 32;
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Floor for the collocation node count; the hard requirement is M >= 2K+1,
/// the floor just keeps quadratures well resolved for small K.
pub const MIN_COLLOCATION: usize = 256;

/// Physical and discretization parameters: dimension N, core radius R,
/// conductivity contrast sigma_c, spectral truncation K, collocation count M.
///
/// The closed-form module accepts any N >= 2; the field solver, linearization
/// and continuation are planar (N = 2) and check that themselves.
#[derive(Clone, Debug, Serialize)]
pub struct TwoPhaseConfig {
    pub n_dim: u32,
    pub core_radius: f64,
    pub sigma_core: f64,
    /// Fourier truncation order K.
    pub truncation: usize,
    /// Collocation node count M >= 2K+1.
    pub collocation: usize,
    /// Admissibility margin: the perturbed boundary must satisfy
    /// 1 + g > core_radius + margin everywhere.
    pub margin: f64,
}

impl TwoPhaseConfig {
    pub fn new(n_dim: u32, core_radius: f64, sigma_core: f64) -> Result<Self> {
        let cfg = TwoPhaseConfig {
            n_dim,
            core_radius,
            sigma_core,
            truncation: DEFAULT_TRUNCATION,
            collocation: MIN_COLLOCATION.max(2 * DEFAULT_TRUNCATION + 1),
            margin: DEFAULT_MARGIN,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set K and raise M to max(2K+1, floor).
    pub fn with_truncation(mut self, truncation: usize) -> Result<Self> {
        self.truncation = truncation;
        self.collocation = MIN_COLLOCATION.max(2 * truncation + 1);
        self.validate()?;
        Ok(self)
    }

    pub fn with_collocation(mut self, collocation: usize) -> Result<Self> {
        self.collocation = collocation;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma_core: f64) -> Result<Self> {
        self.sigma_core = sigma_core;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dim < 2 {
            return Err(Error::Domain(format!("dimension N = {} must be >= 2", self.n_dim)));
        }
        if !(self.core_radius > 0.0 && self.core_radius < 1.0) {
            return Err(Error::Domain(format!(
                "core radius R = {} must lie in (0, 1)",
                self.core_radius
            )));
        }
        if !(self.sigma_core > 0.0) || !self.sigma_core.is_finite() {
            return Err(Error::Domain(format!(
                "conductivity sigma_c = {} must be positive and finite",
                self.sigma_core
            )));
        }
        if self.sigma_core == 1.0 {
            return Err(Error::Domain(
                "conductivity sigma_c = 1 is the one-phase degeneration; the two-phase problem requires sigma_c != 1".into(),
            ));
        }
        if self.truncation < 8 {
            return Err(Error::Domain(format!(
                "truncation K = {} must be >= 8",
                self.truncation
            )));
        }
        if self.collocation < 2 * self.truncation + 1 {
            return Err(Error::Domain(format!(
                "collocation count M = {} must be >= 2K+1 = {}",
                self.collocation,
                2 * self.truncation + 1
            )));
        }
        if !(self.margin >= 0.0) || self.core_radius + self.margin >= 1.0 {
            return Err(Error::Domain(format!(
                "margin = {} must be >= 0 with R + margin < 1",
                self.margin
            )));
        }
        Ok(())
    }
}
