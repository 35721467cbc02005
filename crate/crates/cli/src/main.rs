//! `qreg`: command-line driver for register-encoded function studies.

mod artifacts;
mod encode;
mod entropy;
mod fp;
mod params;
mod spectral;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::params::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "qreg",
    version,
    about = "Quantum-register MPS encodings, transforms and Fokker-Planck solvers"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Relative SVD truncation tolerance on discarded squared weight.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Largest bond dimension kept by truncations.
    #[arg(long = "max-rank", global = true)]
    pub max_rank: Option<usize>,
    /// Variational sweeps per simplification.
    #[arg(long, global = true)]
    pub sweeps: Option<usize>,
    /// Directory for the artifacts (created if missing).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// File with `key = value` lines; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a one-dimensional density and write the MPS with its entropy profile.
    Encode(encode::EncodeArgs),
    /// Entropy profiles of the test densities over a range of resolutions.
    EntropyStudy(entropy::StudyArgs),
    /// Two-mode squeezed Gaussians over squeezing ratios, angles and qubit orders.
    #[command(name = "entropy-2d")]
    Entropy2d(entropy::MultiArgs),
    /// Three-mode Gaussians over squeezing ratios, angles and qubit orders.
    #[command(name = "entropy-3d")]
    Entropy3d(entropy::MultiArgs),
    /// Entanglement after every Fourier layer, with and without two's complement.
    QftStudy(spectral::QftArgs),
    /// Fourier and linear interpolation against direct sampling.
    Interpolate(spectral::InterpolateArgs),
    /// Finite-difference and spectral derivative errors.
    Derivative(spectral::DerivativeArgs),
    /// Fokker-Planck trajectories with implicit finite differences or the exact spectral step.
    SolveFp(fp::SolveArgs),
    /// Check the refinement entropy and purity bounds.
    VerifyBounds(entropy::BoundsArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let global = cli.global;
    match cli.command {
        Command::Encode(a) => encode::run(&a, &Settings::resolve(&global, "encode", encode::KEYS)?),
        Command::EntropyStudy(a) => entropy::run_study(
            &a,
            &Settings::resolve(&global, "entropy-study", entropy::STUDY_KEYS)?,
        ),
        Command::Entropy2d(a) => entropy::run_multi(
            &a,
            2,
            &Settings::resolve(&global, "entropy-2d", entropy::MULTI_KEYS)?,
        ),
        Command::Entropy3d(a) => entropy::run_multi(
            &a,
            3,
            &Settings::resolve(&global, "entropy-3d", entropy::MULTI_KEYS)?,
        ),
        Command::QftStudy(a) => spectral::run_qft(
            &a,
            &Settings::resolve(&global, "qft-study", spectral::QFT_KEYS)?,
        ),
        Command::Interpolate(a) => spectral::run_interpolate(
            &a,
            &Settings::resolve(&global, "interpolate", spectral::INTERPOLATE_KEYS)?,
        ),
        Command::Derivative(a) => {
            let s = Settings::resolve_with(
                &global,
                "derivative",
                spectral::DERIVATIVE_KEYS,
                spectral::DERIVATIVE_TOLERANCE,
            )?;
            spectral::run_derivative(&a, &s)
        }
        Command::SolveFp(a) => fp::run(
            &a,
            &Settings::resolve_with(&global, "solve-fp", fp::KEYS, fp::DEFAULT_TOLERANCE)?,
        ),
        Command::VerifyBounds(a) => entropy::run_bounds(
            &a,
            &Settings::resolve(&global, "verify-bounds", entropy::BOUNDS_KEYS)?,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
