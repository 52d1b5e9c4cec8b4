//! bcpatch: command-line front end for the workbench library.
//!
//! Every file-writing invocation drops a manifest next to its primary
//! output (command line, resolved config and hash, input hashes, output
//! list, seed, wall time). Reports are JSON with a `schema_version`
//! field; scalars printed to stdout or CSV carry 17 significant digits.
//! Errors emit a one-line JSON diagnostic on stderr and map to exit
//! codes: usage and file problems 1, solver nonconvergence 2,
//! domain/resolution/fit precondition failures 3.

mod config;
mod manifest;
mod run;

use bcpatch_core::Error;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "bcpatch",
    version,
    about = "Numerical workbench for singular steady states of the 2D Euler equations on the flat torus"
)]
pub struct Cli {
    /// Flat JSON config file whose keys mirror flag names; flags override
    /// it, it overrides built-in defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Root seed for every randomized diagnostic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Thread cap for data-parallel sections; outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the four-quadrant patch potential psi_0 as a field file.
    Psi0(Psi0Args),
    /// Self-similar corner barrier: angular profile or sampled field.
    #[command(subcommand)]
    Barrier(BarrierCmd),
    /// Damped fixed-point solves of the steady equation.
    #[command(subcommand)]
    Steady(SteadyCmd),
    /// Diagnostics on stored fields and solve pipelines.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Shorthand for `analyze sweep`.
    Sweep(SweepArgs),
    /// Shorthand for `analyze lab`.
    Lab(LabArgs),
    /// Evaluate the torus Green function and its log/regular split.
    Green(GreenArgs),
}

#[derive(Debug, Subcommand)]
pub enum BarrierCmd {
    /// Solve the angular profile ODE; writes {"s","beta","a","theta","g"}.
    Profile(BarrierProfileArgs),
    /// Sample the barrier at a given eps on a grid and write a field file.
    Field(BarrierFieldArgs),
}

#[derive(Debug, Subcommand)]
pub enum SteadyCmd {
    /// Run the damped fixed-point iteration to the residual target.
    Solve(SteadySolveArgs),
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    /// Check barrier <= phi <= eps on the corner region of a stored solve.
    Sandwich(SandwichArgs),
    /// Ratio diagnostics phi/barrier - 1: masked field stats and the
    /// tail-corrected L2 deviation.
    Ratio(RatioArgs),
    /// Log-log fit of the ratio field's fan maxima near the origin.
    Holder(HolderArgs),
    /// Convergence sweep across a decreasing eps list (JSON + CSV).
    Sweep(SweepArgs),
    /// Randomized empirical-constant ensembles for the energy, Sobolev,
    /// isoperimetric and rescaled sup-bound inequalities.
    Lab(LabArgs),
}

#[derive(Debug, Args)]
pub struct Psi0Args {
    /// Sine-mode cutoff of the synthesized series (default: grid n).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Cells per quarter side, a power of two >= 8 (default 1024).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output field file; the sidecar lands at <out>.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BarrierProfileArgs {
    /// Nonlinearity exponent in (0.05, 0.95) (default 0.5).
    #[arg(long)]
    pub s: Option<f64>,
    /// Angular grid nodes for the profile ODE (default 2048).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Shooting tolerance on the midpoint bracket (default 1e-12).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output profile JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BarrierFieldArgs {
    #[arg(long)]
    pub s: Option<f64>,
    /// Patch height eps in (0, 1) (default 1e-3).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Cells per quarter side (default 1024).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Angular grid nodes for the profile ODE (default 2048).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Output field file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SteadySolveArgs {
    #[arg(long)]
    pub s: Option<f64>,
    /// Patch height eps in (0, 1) (default 1e-3).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Cells per quarter side (default 1024).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Damping factor in (0, 1] (default 0.5).
    #[arg(long)]
    pub omega: Option<f64>,
    /// Sup-norm residual target (default 1e-8).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration budget (default 5000).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Initial iterate: psi0, barrier-blend, or file (default psi0).
    #[arg(long)]
    pub init: Option<String>,
    /// Field file for --init file; prolonged spectrally if coarser than
    /// the solve grid.
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    /// Output field file for the converged solution.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output report JSON (residual history, certified inequalities, ...).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SandwichArgs {
    /// Stored solution field (reads <phi>.json for s and eps).
    #[arg(long)]
    pub phi: Option<PathBuf>,
    /// Override the sidecar's s.
    #[arg(long)]
    pub s: Option<f64>,
    /// Override the sidecar's eps.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Angular grid nodes for the barrier profile (default 2048).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Output report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long)]
    pub phi: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Mask radius around the axes/origin (default 4h of the loaded grid).
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Output report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HolderArgs {
    #[arg(long)]
    pub phi: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Number of log-spaced fit radii in [8h, sqrt(eps)/(-ln eps)]
    /// (default 40).
    #[arg(long)]
    pub radii: Option<usize>,
    /// Output report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub s: Option<f64>,
    /// Strictly decreasing comma-separated eps values
    /// (default 1e-2,1e-3,1e-4).
    #[arg(long)]
    pub eps_list: Option<String>,
    /// Cells per quarter side for every solve (default 1024).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Monte Carlo pairs per seminorm estimate (default 4000).
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Output table JSON; the CSV lands at --csv or <out>.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabArgs {
    /// One of caccioppoli, sobolev_h1, sobolev_w11, isoperimetric,
    /// linf_rescale; omit to run all five.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Ensemble size (default 500).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Cells per quarter side of the ensemble grid (default 128).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Bi-partition mass fraction for the isoperimetric ensemble
    /// (default 0.1).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    /// First component of the evaluation point x.
    #[arg(long, allow_negative_numbers = true)]
    pub x1: Option<f64>,
    /// Second component of the evaluation point x.
    #[arg(long, allow_negative_numbers = true)]
    pub x2: Option<f64>,
    /// First component of the source point y.
    #[arg(long, allow_negative_numbers = true)]
    pub y1: Option<f64>,
    /// Second component of the source point y.
    #[arg(long, allow_negative_numbers = true)]
    pub y2: Option<f64>,
    /// Acceleration cutoff of the spectral remainder sum (default 48).
    #[arg(long)]
    pub terms: Option<usize>,
    /// Optional output JSON; the split always prints to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn error_slug(e: &Error) -> &'static str {
    match e {
        Error::InvalidParam(_) => "invalid_param",
        Error::Domain(_) => "domain",
        Error::Resolution(_) => "resolution",
        Error::NonConvergence { .. } => "non_convergence",
        Error::Stabilization { .. } => "stabilization",
        Error::Bracket(_) => "bracket",
        Error::Fit(_) => "fit",
        Error::Format(_) => "format",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParam(_) | Error::Format(_) | Error::Io(_) | Error::Json(_) => 1,
        Error::NonConvergence { .. } | Error::Stabilization { .. } => 2,
        Error::Domain(_) | Error::Resolution(_) | Error::Fit(_) | Error::Bracket(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let message = e
                .to_string()
                .lines()
                .next()
                .unwrap_or("usage error")
                .to_string();
            eprintln!(
                "{}",
                serde_json::json!({ "error": "usage", "exit_code": 1, "message": message })
            );
            return ExitCode::from(1);
        }
    };
    match run::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = error_exit_code(&e);
            eprintln!(
                "{}",
                serde_json::json!({
                    "error": error_slug(&e),
                    "exit_code": code,
                    "message": e.to_string(),
                })
            );
            ExitCode::from(code)
        }
    }
}
