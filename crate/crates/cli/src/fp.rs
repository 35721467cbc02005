use anyhow::{anyhow, Result};
use clap::{Args, ValueEnum};
use qregister::encoding::{sample_1d, Distribution, Representation, Scheme};
use qregister::pde::{
    evolve_fd, split_step_record, Checkpoints, EvolutionRecord, FdOptions, FokkerPlanckSpec,
};
use qregister::spectral::SpectralOptions;
use qregister::{Axis, Mps};
use serde::Serialize;

use crate::artifacts::{num, report_sizes, Artifacts};
use crate::params::{parse_f64, Settings};

pub const KEYS: &[&str] = &[
    "method", "D", "mu", "m", "a", "b", "dt", "t", "sigma0", "x0", "every", "times",
];

/// Squared-weight truncation used unless `--tolerance` is given; moment checks need it tight.
pub const DEFAULT_TOLERANCE: f64 = 1e-24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Crank-Nicolson with central differences, absorbing boundaries.
    Fd,
    /// Exact spectral propagator, periodic boundaries.
    SplitStep,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Method as ValueEnum>::from_str(s, true)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Fd => "fd",
            Method::SplitStep => "split-step",
        })
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Diffusion coefficient.
    #[arg(long = "D")]
    pub d: Option<f64>,
    /// Drift.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Finite-difference time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t: Option<f64>,
    /// Width of the initial Gaussian.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Centre of the initial Gaussian.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Finite-difference steps between recorded checkpoints.
    #[arg(long)]
    pub every: Option<usize>,
    /// Comma-separated output times for the spectral method (default: ten even steps up to t).
    #[arg(long)]
    pub times: Option<String>,
}

#[derive(Serialize)]
struct Summary {
    method: String,
    final_time: f64,
    mean: f64,
    variance: f64,
    expected_mean: f64,
    expected_variance: f64,
    mean_error: f64,
    variance_relative_error: f64,
    retained_mass: f64,
    max_bond: usize,
    wrapped: bool,
    first_wrapped_time: Option<f64>,
}

fn trajectory_rows(r: &EvolutionRecord) -> Vec<Vec<String>> {
    let wrapped = r.wrapped();
    (0..r.len())
        .map(|i| {
            vec![
                num(r.times[i]),
                num(r.mean[i]),
                num(r.variance[i]),
                num(r.norm[i]),
                r.max_bond[i].to_string(),
                num(r.boundary_mass[i]),
                wrapped[i].to_string(),
            ]
        })
        .collect()
}

pub fn run(args: &SolveArgs, s: &Settings) -> Result<()> {
    let method = s.get("method", args.method, Method::Fd)?;
    let d = s.get("D", args.d, 0.1)?;
    let mu = s.get("mu", args.mu, 0.2)?;
    let axis = Axis::new(
        s.get("a", args.a, -10.0)?,
        s.get("b", args.b, 10.0)?,
        s.get("m", args.m, 10)?,
    )?;
    let dt = s.get("dt", args.dt, 0.01)?;
    let t = s.get("t", args.t, 2.0)?;
    let sigma0 = s.get("sigma0", args.sigma0, 1.0)?;
    let x0 = s.get("x0", args.x0, 0.0)?;
    let spec = FokkerPlanckSpec::new(mu, d, axis, dt, t)?;

    let init = sample_1d(
        Distribution::gaussian(sigma0, x0)?.into(),
        &axis,
        Scheme::Riemann,
        Representation::Amplitude,
        &s.truncation,
    )?;
    let (record, last) = match method {
        Method::Fd => {
            let every = s.get("every", args.every, 10)?;
            let mut opts = FdOptions {
                simplify: s.simplify,
                ..FdOptions::default()
            };
            opts.solve.truncation = s.truncation;
            let rec = evolve_fd(
                &spec,
                &init,
                Checkpoints {
                    every,
                    keep_states: true,
                },
                &opts,
            )?;
            let last = final_state(&rec)?;
            (rec, last)
        }
        Method::SplitStep => {
            let default = (1..=10)
                .map(|k| (t * k as f64 / 10.0).to_string())
                .collect::<Vec<_>>()
                .join(",");
            let mut times = s.list("times", args.times.as_deref(), &default, parse_f64)?;
            if times.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
                return Err(anyhow!("output times must be nonnegative"));
            }
            times.insert(0, 0.0);
            times.dedup();
            let opts = SpectralOptions {
                simplify: s.simplify,
            };
            let rec = split_step_record(&spec, &init, &times, true, &opts)?;
            let last = final_state(&rec)?;
            (rec, last)
        }
    };

    let n = record.len() - 1;
    let tf = record.times[n];
    let wrapped = record.wrapped();
    let expected_mean = x0 + mu * tf;
    let expected_variance = sigma0 * sigma0 + 2.0 * d * tf;
    let summary = Summary {
        method: method.to_string(),
        final_time: tf,
        mean: record.mean[n],
        variance: record.variance[n],
        expected_mean,
        expected_variance,
        mean_error: (record.mean[n] - expected_mean).abs(),
        variance_relative_error: (record.variance[n] - expected_variance).abs() / expected_variance,
        retained_mass: record.norm[n],
        max_bond: record.max_bond.iter().copied().max().unwrap_or(0),
        wrapped: wrapped.iter().any(|&w| w),
        first_wrapped_time: wrapped.iter().position(|&w| w).map(|i| record.times[i]),
    };
    if summary.wrapped {
        eprintln!(
            "warning: probability mass reached the grid edge at t = {} (boundary effects contaminate the moments)",
            summary.first_wrapped_time.unwrap_or(tf)
        );
    }
    let mut out = Artifacts::create(&s.output)?;
    out.csv(
        "trajectory.csv",
        &[
            "time",
            "mean",
            "variance",
            "norm",
            "max_bond",
            "boundary_mass",
            "wrapped",
        ],
        &trajectory_rows(&record),
    )?;
    out.json("summary.json", &summary)?;
    out.json("sizes.json", &report_sizes(&last))?;
    out.mps("final.mps", &last)?;
    out.finish("fokker-planck", s)
}

fn final_state(rec: &EvolutionRecord) -> Result<Mps> {
    rec.state_checkpoints
        .as_ref()
        .and_then(|s| s.last().cloned())
        .ok_or_else(|| anyhow!("no states recorded"))
}
