use anyhow::{anyhow, Result};
use clap::Args;
use qregister::encoding::{function_mps, sample_1d, Distribution, Representation, Scheme};
use qregister::mpo::{Derivative, FourierSign};
use qregister::spectral::{
    self, fd_derivative, fourier_interpolate, linear_interpolate, qft_stages, spectral_derivative,
    SpectralOptions,
};
use qregister::{Axis, Mps, SvdTruncation, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{num, Artifacts};
use crate::params::{parse_usize, Settings};

pub const QFT_KEYS: &[&str] = &["dist", "sigma", "mu", "a", "b", "m"];
pub const INTERPOLATE_KEYS: &[&str] = &["sigma", "a", "b", "m-from", "m-to"];
pub const DERIVATIVE_KEYS: &[&str] = &["sigma", "a", "b", "m-values"];

/// Derivatives amplify truncation noise by up to `dx^-2`, so this command truncates tightly by default.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-24;

fn options(s: &Settings) -> SpectralOptions {
    SpectralOptions {
        simplify: s.simplify,
    }
}

fn max_entropy(p: &Mps) -> f64 {
    p.entropy_profile().into_iter().fold(0.0, f64::max)
}

#[derive(Args, Debug)]
pub struct QftArgs {
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Serialize)]
struct QftSummary {
    input_max_entropy: f64,
    max_stage_entropy: f64,
    transformed_max_entropy: f64,
    folded_max_entropy: f64,
}

pub fn run_qft(args: &QftArgs, s: &Settings) -> Result<()> {
    let dist = Distribution::from_name(
        &s.get("dist", args.dist.clone(), "gaussian".to_string())?,
        s.get("sigma", args.sigma, 1.0)?,
        s.get("mu", args.mu, 0.0)?,
    )?;
    let (da, db) = dist.default_interval();
    let axis = Axis::new(
        s.get("a", args.a, da)?,
        s.get("b", args.b, db)?,
        s.get("m", args.m, 15)?,
    )?;
    let opts = options(s);
    let p = sample_1d(
        dist.into(),
        &axis,
        Scheme::GrIntegral,
        Representation::Sqrt,
        &s.truncation,
    )?;
    let stages = qft_stages(&p, FourierSign::Forward, &opts)?;
    let transformed = stages.last().expect("final stage").clone();
    let folded = spectral::twos_complement(&transformed, &opts)?;
    let mut labelled: Vec<(String, &Mps)> = vec![("input".into(), &p)];
    for (i, st) in stages[..stages.len() - 1].iter().enumerate() {
        labelled.push((format!("layer-{}", i + 1), st));
    }
    labelled.push(("fourier".into(), &transformed));
    labelled.push(("twos-complement".into(), &folded));
    let mut rows = Vec::new();
    for (stage, (label, st)) in labelled.iter().enumerate() {
        for (cut, v) in st.entropy_profile().iter().enumerate() {
            rows.push(vec![
                stage.to_string(),
                label.clone(),
                (cut + 1).to_string(),
                num(*v),
            ]);
        }
    }
    let summary = QftSummary {
        input_max_entropy: max_entropy(&p),
        max_stage_entropy: stages[..stages.len() - 1]
            .iter()
            .map(max_entropy)
            .fold(0.0, f64::max),
        transformed_max_entropy: max_entropy(&transformed),
        folded_max_entropy: max_entropy(&folded),
    };
    let mut out = Artifacts::create(&s.output)?;
    out.csv("stages.csv", &["stage", "label", "cut", "entropy"], &rows)?;
    out.json("summary.json", &summary)?;
    out.mps("fourier.mps", &transformed)?;
    out.finish("qft-entropy", s)
}

#[derive(Args, Debug)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long = "m-from")]
    pub m_from: Option<usize>,
    #[arg(long = "m-to")]
    pub m_to: Option<usize>,
}

#[derive(Serialize)]
struct InterpolationSummary {
    peak: f64,
    fourier_max_error: f64,
    linear_max_error: f64,
}

fn gaussian_values(axis: &Axis, sigma: f64, trunc: &SvdTruncation) -> Result<Mps> {
    Ok(function_mps(
        &|x| C64::new((-x * x / (2.0 * sigma * sigma)).exp(), 0.0),
        axis,
        trunc,
    )?)
}

pub fn run_interpolate(args: &InterpolateArgs, s: &Settings) -> Result<()> {
    let sigma = s.get("sigma", args.sigma, 1.0)?;
    let (a, b) = (s.get("a", args.a, -8.0)?, s.get("b", args.b, 8.0)?);
    let (m0, m1) = (
        s.get("m-from", args.m_from, 5)?,
        s.get("m-to", args.m_to, 10)?,
    );
    if m1 < m0 {
        return Err(anyhow!("m-to {m1} is below m-from {m0}"));
    }
    let coarse = Axis::new(a, b, m0)?;
    let fine = coarse.with_qubits(m1)?;
    let opts = options(s);
    let p = gaussian_values(&coarse, sigma, &s.truncation)?;
    let direct = gaussian_values(&fine, sigma, &s.truncation)?.to_dense()?;
    let fourier = fourier_interpolate(&p, m1 - m0, &opts)?.to_dense()?;
    let mut lin = p.clone();
    for _ in m0..m1 {
        lin = linear_interpolate(&lin, &opts)?;
    }
    let linear = lin.to_dense()?;
    let peak = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let err = |v: &[C64]| {
        v.iter()
            .zip(&direct)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    let rows: Vec<Vec<String>> = (0..fine.points())
        .map(|i| {
            vec![
                i.to_string(),
                num(fine.x(i)),
                num(direct[i].re),
                num(fourier[i].re),
                num(linear[i].re),
            ]
        })
        .collect();
    let mut out = Artifacts::create(&s.output)?;
    out.csv(
        "values.csv",
        &["s", "x", "direct", "fourier", "linear"],
        &rows,
    )?;
    out.json(
        "summary.json",
        &InterpolationSummary {
            peak,
            fourier_max_error: err(&fourier),
            linear_max_error: err(&linear),
        },
    )?;
    out.finish("interpolation", s)
}

#[derive(Args, Debug)]
pub struct DerivativeArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Comma-separated qubit counts.
    #[arg(long = "m-values")]
    pub m_values: Option<String>,
}

pub fn run_derivative(args: &DerivativeArgs, s: &Settings) -> Result<()> {
    let sigma = s.get("sigma", args.sigma, 1.0)?;
    let (a, b) = (s.get("a", args.a, -10.0)?, s.get("b", args.b, 10.0)?);
    let ms = s.list(
        "m-values",
        args.m_values.as_deref(),
        "6,8,10,12",
        parse_usize,
    )?;
    let opts = options(s);
    let s2 = sigma * sigma;
    let d1 = |x: f64| -x / s2 * (-x * x / (2.0 * s2)).exp();
    let d2 = |x: f64| (x * x / s2 - 1.0) / s2 * (-x * x / (2.0 * s2)).exp();
    let rows: Vec<Vec<Vec<String>>> = ms
        .par_iter()
        .map(|&m| {
            let axis = Axis::new(a, b, m)?;
            let p = gaussian_values(&axis, sigma, &s.truncation)?;
            let one = C64::new(1.0, 0.0);
            let zero = C64::new(0.0, 0.0);
            let mut out = Vec::new();
            for (order, exact, fd_kind, (sa, sb)) in [
                (
                    1,
                    &d1 as &dyn Fn(f64) -> f64,
                    Derivative::First,
                    (one, zero),
                ),
                (2, &d2, Derivative::Second, (zero, one)),
            ] {
                let fd = fd_derivative(&p, &axis, fd_kind, &opts)?.to_dense()?;
                let sp = spectral_derivative(&p, &axis, sa, sb, &opts)?.to_dense()?;
                let err = |v: &[C64]| {
                    (0..axis.points())
                        .map(|i| (v[i].re - exact(axis.x(i))).abs())
                        .fold(0.0, f64::max)
                };
                out.push(vec![
                    m.to_string(),
                    order.to_string(),
                    num(err(&fd)),
                    num(err(&sp)),
                ]);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = rows.into_iter().flatten().collect();
    let mut out = Artifacts::create(&s.output)?;
    out.csv(
        "errors.csv",
        &["m", "order", "fd_error", "spectral_error"],
        &rows,
    )?;
    out.finish("derivatives", s)
}
