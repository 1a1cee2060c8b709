//! Command-line front end for the two-phase overdetermined-problem toolkit.
//!
//! Exit codes: 0 success, 2 validation error (arguments, files, parameter
//! domains), 3 numerical failure (solver breakdown, non-convergence, failed
//! verification). Every command is deterministic for a fixed run
//! configuration, seed included; reruns produce byte-identical files.

mod commands;
mod errors;
mod runconfig;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use errors::CliResult;
use runconfig::RunConfig;

#[derive(Parser)]
#[command(
    name = "serrin2p",
    version,
    about = "Bifurcation toolkit for the two-phase overdetermined problem on perturbed disks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the bifurcation values s(k) and the set Sigma
    SigmaTable(SigmaTableArgs),
    /// Dispersion coefficients beta_k(lambda) on a lambda grid
    Dispersion(DispersionArgs),
    /// Solve the Dirichlet problem for a boundary file and export the residual trace
    Solve(SolveArgs),
    /// Finite-difference Jacobian spectrum at the trivial shape
    Linearize(LinearizeArgs),
    /// Trace the symmetry-breaking branch of mode m
    Branch(BranchArgs),
    /// Check the bifurcation hypotheses and write a consolidated report
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Space dimension N >= 2 (the field solver itself is planar)
    #[arg(long = "N")]
    n_dim: Option<u32>,

    /// Core radius R in (0, 1)
    #[arg(long = "R")]
    core_radius: Option<f64>,

    /// Core conductivity sigma_c, given directly
    #[arg(long = "sigma-c")]
    sigma_core: Option<f64>,

    /// Mode m under study; where applicable pins sigma_c = s(m) + lambda
    #[arg(long = "mode-m")]
    mode_m: Option<usize>,

    /// Contrast offset lambda from the bifurcation value s(m)
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,

    /// Fourier truncation order K
    #[arg(long = "K")]
    truncation: Option<usize>,

    /// Collocation node count M >= 2K+1
    #[arg(long = "M")]
    collocation: Option<usize>,

    /// Admissibility margin: boundaries must keep 1 + g > R + margin
    #[arg(long)]
    margin: Option<f64>,

    /// Directory for CSV/JSON/SVG artifacts (default: current directory)
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// JSON run configuration; explicit flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,

    /// Seed for the randomized spot checks
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn partial(&self) -> RunConfig {
        RunConfig {
            n_dim: self.n_dim,
            core_radius: self.core_radius,
            sigma_core: self.sigma_core,
            truncation: self.truncation,
            collocation: self.collocation,
            margin: self.margin,
            mode_m: self.mode_m,
            lambda: self.lambda,
            out_dir: self.out_dir.clone(),
            seed: self.seed,
            ..Default::default()
        }
    }

    /// defaults <- config file <- common flags <- command-specific flags.
    fn resolve(&self, extra: RunConfig) -> CliResult<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(self.partial()).overlay(extra))
    }
}

#[derive(Args)]
struct SigmaTableArgs {
    #[command(flatten)]
    common: Common,

    /// Largest mode to tabulate (default 10)
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args)]
struct DispersionArgs {
    #[command(flatten)]
    common: Common,

    /// Largest Fourier index k of the tabulated coefficients (default 8)
    #[arg(long)]
    kmax: Option<usize>,

    /// Left end of the lambda grid (default -0.02)
    #[arg(long, allow_negative_numbers = true)]
    lambda_min: Option<f64>,

    /// Right end of the lambda grid (default 0.02)
    #[arg(long, allow_negative_numbers = true)]
    lambda_max: Option<f64>,

    /// Number of grid points (default 41; 0 is rejected)
    #[arg(long)]
    lambda_steps: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,

    /// Boundary coefficient file (JSON, as produced by the geometry layer)
    #[arg(long)]
    boundary: Option<PathBuf>,

    /// Also write a to-scale SVG figure of the core and the boundary
    #[arg(long)]
    svg: bool,

    /// Tolerance for the printed residual verdict (default 1e-9)
    #[arg(long)]
    residual_tol: Option<f64>,
}

#[derive(Args)]
struct LinearizeArgs {
    #[command(flatten)]
    common: Common,

    /// Number of probed Fourier modes; must satisfy kmax <= K/2 (default 8)
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args)]
struct BranchArgs {
    #[command(flatten)]
    common: Common,

    /// Smallest branch amplitude (default 1e-4)
    #[arg(long)]
    eps_base: Option<f64>,

    /// Largest branch amplitude; the schedule doubles up to it (default 1e-2)
    #[arg(long)]
    eps_max: Option<f64>,

    /// Also write an SVG gallery of shapes along the branch
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,

    /// Run the checks at this contrast instead of s(m) (hypotheses then fail)
    #[arg(long, allow_negative_numbers = true)]
    sigma_override: Option<f64>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::SigmaTable(a) => {
            let rc = a.common.resolve(RunConfig { k_max: a.kmax, ..Default::default() })?;
            commands::sigma_table(&rc)
        }
        Command::Dispersion(a) => {
            let rc = a.common.resolve(RunConfig {
                k_max: a.kmax,
                lambda_min: a.lambda_min,
                lambda_max: a.lambda_max,
                lambda_steps: a.lambda_steps,
                ..Default::default()
            })?;
            commands::dispersion(&rc)
        }
        Command::Solve(a) => {
            let rc = a.common.resolve(RunConfig {
                boundary: a.boundary,
                svg: a.svg.then_some(true),
                residual_tol: a.residual_tol,
                ..Default::default()
            })?;
            commands::solve(&rc)
        }
        Command::Linearize(a) => {
            let rc = a.common.resolve(RunConfig { k_max: a.kmax, ..Default::default() })?;
            commands::linearize(&rc)
        }
        Command::Branch(a) => {
            let rc = a.common.resolve(RunConfig {
                eps_base: a.eps_base,
                eps_max: a.eps_max,
                svg: a.svg.then_some(true),
                ..Default::default()
            })?;
            commands::branch(&rc)
        }
        Command::Verify(a) => {
            let rc = a
                .common
                .resolve(RunConfig { sigma_override: a.sigma_override, ..Default::default() })?;
            commands::verify(&rc)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
