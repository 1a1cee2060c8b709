//! Run configuration shared by every subcommand. Values resolve in three
//! layers: built-in defaults, then a JSON file given with --config, then
//! explicit command-line flags. Unknown keys in the file are rejected so a
//! typo cannot silently fall back to a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serrin2p::TwoPhaseConfig;

use crate::errors::{CliError, CliResult};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    // Problem parameters (TwoPhaseConfig).
    pub n_dim: Option<u32>,
    pub core_radius: Option<f64>,
    pub sigma_core: Option<f64>,
    pub truncation: Option<usize>,
    pub collocation: Option<usize>,
    pub margin: Option<f64>,

    // Mode under study and contrast offset sigma_c = s(m) + lambda.
    pub mode_m: Option<usize>,
    pub lambda: Option<f64>,

    // Tolerance override for the residual verdict printed by `solve`.
    pub residual_tol: Option<f64>,

    // Output plumbing.
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,

    // Command-specific options.
    pub k_max: Option<usize>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_steps: Option<usize>,
    pub boundary: Option<PathBuf>,
    pub svg: Option<bool>,
    pub eps_base: Option<f64>,
    pub eps_max: Option<f64>,
    pub sigma_override: Option<f64>,
}

macro_rules! overlay_fields {
    ($base:expr, $over:expr, $($f:ident),+ $(,)?) => {{
        let mut out = $base;
        $( if $over.$f.is_some() { out.$f = $over.$f; } )+
        out
    }};
}

impl RunConfig {
    /// Read a configuration file; parse errors carry the line and column.
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace the ones in `self`.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        overlay_fields!(
            self,
            over,
            n_dim,
            core_radius,
            sigma_core,
            truncation,
            collocation,
            margin,
            mode_m,
            lambda,
            residual_tol,
            out_dir,
            seed,
            k_max,
            lambda_min,
            lambda_max,
            lambda_steps,
            boundary,
            svg,
            eps_base,
            eps_max,
            sigma_override,
        )
    }

    pub fn n_dim(&self) -> u32 {
        self.n_dim.unwrap_or(2)
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius.unwrap_or(0.9)
    }

    pub fn sigma_core(&self) -> f64 {
        self.sigma_core.unwrap_or(0.5)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(0.0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn k_max_or(&self, default: usize) -> usize {
        self.k_max.unwrap_or(default)
    }

    pub fn want_svg(&self) -> bool {
        self.svg.unwrap_or(false)
    }

    pub fn require_mode(&self) -> CliResult<usize> {
        self.mode_m.ok_or_else(|| {
            CliError::Usage(
                "--mode-m is required for this command (set it on the command line or in the \
                 --config file)"
                    .into(),
            )
        })
    }

    /// Assemble the solver configuration around the given core contrast.
    pub fn two_phase(&self, sigma_core: f64) -> CliResult<TwoPhaseConfig> {
        let mut cfg = TwoPhaseConfig::new(self.n_dim(), self.core_radius(), sigma_core)?;
        if let Some(k) = self.truncation {
            cfg = cfg.with_truncation(k)?;
        }
        if let Some(m) = self.collocation {
            cfg = cfg.with_collocation(m)?;
        }
        if let Some(margin) = self.margin {
            cfg.margin = margin;
            cfg.validate()?;
        }
        Ok(cfg)
    }
}
