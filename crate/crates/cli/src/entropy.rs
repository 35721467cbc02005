use std::collections::BTreeMap;

use anyhow::{anyhow, Result};
use clap::Args;
use qregister::encoding::{
    covariance_2d, covariance_3d, gaussian_mps_nd, inverse_square, sample_1d, sample_grid,
    verify_entropy_bounds, Distribution, GaussianOptions, Matrix, Representation, Scheme,
};
use qregister::mps::dense_limit;
use qregister::{Axis, Grid, Mps, QubitOrder};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{num, report_sizes, Artifacts};
use crate::params::{parse_angle, parse_f64, Settings};

pub const STUDY_KEYS: &[&str] = &[
    "dist",
    "m-min",
    "m-max",
    "fit-min",
    "fit-max",
    "scheme",
    "representation",
];
pub const MULTI_KEYS: &[&str] = &[
    "ratios",
    "thetas",
    "orders",
    "m",
    "K",
    "method",
    "a",
    "b",
    "sigma-max",
    "representation",
];
pub const BOUNDS_KEYS: &[&str] = &["dist", "m-min", "m-max"];

const ALL_DISTRIBUTIONS: &str = "gaussian,lognormal,lorentzian,nonconvex";

fn distributions(s: &Settings, flag: Option<&str>) -> Result<Vec<Distribution>> {
    let names = s.list("dist", flag, "all", |n| Ok(n.to_string()))?;
    let names: Vec<&str> = names
        .iter()
        .flat_map(|n| {
            if n.eq_ignore_ascii_case("all") {
                ALL_DISTRIBUTIONS.split(',').collect()
            } else {
                vec![n.as_str()]
            }
        })
        .collect();
    names
        .into_iter()
        .map(|n| Ok(Distribution::from_name(n, 1.0, default_mu(n))?))
        .collect()
}

/// Location parameter of the studied densities: the log-normal is centered at `mu = 1`, the others at 0.
fn default_mu(name: &str) -> f64 {
    if name.trim().to_ascii_lowercase().starts_with("log") {
        1.0
    } else {
        0.0
    }
}

fn max_entropy(p: &Mps) -> f64 {
    p.entropy_profile().into_iter().fold(0.0, f64::max)
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    /// Comma-separated distributions, or `all`.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long = "m-min")]
    pub m_min: Option<usize>,
    #[arg(long = "m-max")]
    pub m_max: Option<usize>,
    /// Smallest register size in the decay fit.
    #[arg(long = "fit-min")]
    pub fit_min: Option<usize>,
    /// Largest register size in the decay fit (the added qubit makes it one larger).
    #[arg(long = "fit-max")]
    pub fit_max: Option<usize>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub representation: Option<String>,
}

#[derive(Serialize)]
struct Decay {
    /// Fitted `gamma` in `S ~ 2^(-gamma m)` for the entropy of one added qubit.
    gamma: Option<f64>,
    max_entropy: f64,
}

pub fn run_study(args: &StudyArgs, s: &Settings) -> Result<()> {
    let dists = distributions(s, args.dist.as_deref())?;
    let m_min = s.get("m-min", args.m_min, 2usize)?.max(1);
    let m_max = s.get("m-max", args.m_max, 14usize)?;
    if m_max < m_min {
        return Err(anyhow!("m-max {m_max} is below m-min {m_min}"));
    }
    let fit_min = s.get("fit-min", args.fit_min, 6usize)?.max(1);
    let fit_max = s.get("fit-max", args.fit_max, 13usize)?;
    if fit_max < fit_min + 1 {
        return Err(anyhow!(
            "the decay fit needs at least two sizes, got {fit_min}..={fit_max}"
        ));
    }
    let scheme: Scheme = s
        .get("scheme", args.scheme.clone(), "gr".to_string())?
        .parse()?;
    let rep: Representation = s
        .get(
            "representation",
            args.representation.clone(),
            "sqrt".to_string(),
        )?
        .parse()?;
    let jobs: Vec<(Distribution, usize)> = dists
        .iter()
        .flat_map(|d| (m_min..=m_max).map(move |m| (*d, m)))
        .collect();
    let results: Vec<(Distribution, usize, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(d, m)| {
            let (a, b) = d.default_interval();
            let p = sample_1d(d.into(), &Axis::new(a, b, m)?, scheme, rep, &s.truncation)?;
            Ok((d, m, p.entropy_profile()))
        })
        .collect::<Result<_>>()?;
    let mut profiles = Vec::new();
    let mut summary = Vec::new();
    for (d, m, prof) in &results {
        for (cut, v) in prof.iter().enumerate() {
            profiles.push(vec![
                d.name().to_string(),
                m.to_string(),
                (cut + 1).to_string(),
                num(*v),
            ]);
        }
        summary.push(vec![
            d.name().to_string(),
            m.to_string(),
            num(prof.iter().cloned().fold(0.0, f64::max)),
        ]);
    }
    let decay: BTreeMap<&str, Decay> = dists
        .par_iter()
        .map(|d| {
            let r = verify_entropy_bounds(d, d.default_interval(), fit_min..=fit_max)?;
            let max = results
                .iter()
                .filter(|(e, _, _)| e == d)
                .flat_map(|(_, _, p)| p.iter().cloned())
                .fold(0.0, f64::max);
            Ok((
                d.name(),
                Decay {
                    gamma: r.decay_exponent(),
                    max_entropy: max,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let mut out = Artifacts::create(&s.output)?;
    out.csv(
        "profiles.csv",
        &["distribution", "m", "cut", "entropy"],
        &profiles,
    )?;
    out.csv(
        "summary.csv",
        &["distribution", "m", "max_entropy"],
        &summary,
    )?;
    out.json("decay.json", &decay)?;
    out.finish("entropy-1d", s)
}

#[derive(Args, Debug)]
pub struct MultiArgs {
    /// Comma-separated `sigma_min / sigma_max` values.
    #[arg(long)]
    pub ratios: Option<String>,
    /// Comma-separated rotation angles; `pi/4` style entries are accepted.
    #[arg(long)]
    pub thetas: Option<String>,
    /// Comma-separated qubit orders (A, B).
    #[arg(long)]
    pub orders: Option<String>,
    /// Qubits per dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Refinement steps of the layered construction.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// dense, mps, or auto (dense up to 20 qubits in total).
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long = "sigma-max")]
    pub sigma_max: Option<f64>,
    #[arg(long)]
    pub representation: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Dense,
    Mps,
}

struct MultiResult {
    ratio: f64,
    theta: f64,
    order: QubitOrder,
    method: Method,
    state: Mps,
}

fn dense_gaussian(sigma: &Matrix, grid: &Grid, rep: Representation, s: &Settings) -> Result<Mps> {
    let a = inverse_square(sigma)?;
    let f = |x: &[f64]| {
        let q: f64 = (0..x.len())
            .flat_map(|i| (0..x.len()).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * x[i] * x[j])
            .sum();
        (-0.5 * q).exp()
    };
    Ok(sample_grid(grid, &f, rep, &s.truncation)?)
}

pub fn run_multi(args: &MultiArgs, dims: usize, s: &Settings) -> Result<()> {
    let ratios = s.list("ratios", args.ratios.as_deref(), "1,0.5,0.2,0.1", parse_f64)?;
    let thetas = s.list("thetas", args.thetas.as_deref(), "0,pi/4", parse_angle)?;
    let orders = s.list("orders", args.orders.as_deref(), "A,B", |o| {
        Ok(o.parse::<QubitOrder>()?)
    })?;
    let m = s.get("m", args.m, if dims == 2 { 7 } else { 5 })?;
    let k = s.get("K", args.k, 8usize)?;
    let method = s.get("method", args.method.clone(), "auto".to_string())?;
    let a = s.get("a", args.a, -7.0)?;
    let b = s.get("b", args.b, 7.0)?;
    let sigma_max = s.get("sigma-max", args.sigma_max, 1.0)?;
    let rep: Representation = s
        .get(
            "representation",
            args.representation.clone(),
            "sqrt".to_string(),
        )?
        .parse()?;
    let total = dims * m;
    let method = match method.to_ascii_lowercase().as_str() {
        "dense" => Method::Dense,
        "mps" => Method::Mps,
        "auto" if total <= 20.min(dense_limit()) => Method::Dense,
        "auto" => Method::Mps,
        other => return Err(anyhow!("unknown method '{other}' (dense, mps, auto)")),
    };
    let axis = Axis::new(a, b, m)?;
    let mut jobs = Vec::new();
    for &r in &ratios {
        for &t in &thetas {
            for &o in &orders {
                jobs.push((r, t, o));
            }
        }
    }
    let results: Vec<MultiResult> = jobs
        .par_iter()
        .map(|&(ratio, theta, order)| {
            let sigma = if dims == 2 {
                covariance_2d(sigma_max, ratio * sigma_max, theta)?
            } else {
                covariance_3d(sigma_max, ratio * sigma_max, theta)?
            };
            let grid = Grid::new(vec![axis; dims], order)?;
            let state = match method {
                Method::Dense => dense_gaussian(&sigma, &grid, rep, s)?,
                Method::Mps => {
                    let opts = GaussianOptions {
                        steps: k,
                        representation: rep,
                        simplify: s.simplify,
                        ..Default::default()
                    };
                    gaussian_mps_nd(&sigma, &grid, &opts)?
                }
            };
            Ok(MultiResult {
                ratio,
                theta,
                order,
                method,
                state,
            })
        })
        .collect::<Result<_>>()?;
    let mut summary = Vec::new();
    let mut profiles = Vec::new();
    for r in &results {
        let sz = report_sizes(&r.state);
        let label = [num(r.ratio), num(r.theta), format!("{:?}", r.order)];
        summary.push(
            label
                .iter()
                .cloned()
                .chain([
                    total.to_string(),
                    format!("{:?}", r.method).to_ascii_lowercase(),
                    num(max_entropy(&r.state)),
                    sz.max_bond.to_string(),
                    sz.parameters.to_string(),
                    format!("{}", sz.dense_size),
                ])
                .collect::<Vec<_>>(),
        );
        for (cut, v) in r.state.entropy_profile().iter().enumerate() {
            profiles.push(
                label
                    .iter()
                    .cloned()
                    .chain([(cut + 1).to_string(), num(*v)])
                    .collect::<Vec<_>>(),
            );
        }
    }
    let mut out = Artifacts::create(&s.output)?;
    out.csv(
        "summary.csv",
        &[
            "ratio",
            "theta",
            "order",
            "qubits",
            "method",
            "max_entropy",
            "max_bond",
            "parameters",
            "dense_size",
        ],
        &summary,
    )?;
    out.csv(
        "profiles.csv",
        &["ratio", "theta", "order", "cut", "entropy"],
        &profiles,
    )?;
    out.finish(
        if dims == 2 {
            "entropy-2d"
        } else {
            "entropy-3d"
        },
        s,
    )
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Comma-separated distributions, or `all`.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long = "m-min")]
    pub m_min: Option<usize>,
    #[arg(long = "m-max")]
    pub m_max: Option<usize>,
}

#[derive(Serialize)]
struct BoundSummary {
    all_hold: bool,
    gamma: Option<f64>,
    max_derivative: f64,
    interval: (f64, f64),
}

pub fn run_bounds(args: &BoundsArgs, s: &Settings) -> Result<()> {
    let dists = distributions(s, args.dist.as_deref())?;
    let m_min = s.get("m-min", args.m_min, 6usize)?.max(1);
    let m_max = s.get("m-max", args.m_max, 13usize)?;
    if m_max < m_min {
        return Err(anyhow!("m-max {m_max} is below m-min {m_min}"));
    }
    let reports = dists
        .par_iter()
        .map(|d| {
            Ok(verify_entropy_bounds(
                d,
                d.default_interval(),
                m_min..=m_max,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut summary = BTreeMap::new();
    for r in &reports {
        for row in &r.rows {
            rows.push(vec![
                r.distribution.name().to_string(),
                row.m.to_string(),
                num(row.entropy),
                num(row.entropy_bound),
                num(row.purity),
                num(row.purity_bound),
                (row.entropy_holds() && row.purity_holds()).to_string(),
            ]);
        }
        summary.insert(
            r.distribution.name(),
            BoundSummary {
                all_hold: r.all_hold(),
                gamma: r.decay_exponent(),
                max_derivative: r.max_derivative,
                interval: r.interval,
            },
        );
    }
    let mut out = Artifacts::create(&s.output)?;
    out.csv(
        "bounds.csv",
        &[
            "distribution",
            "m",
            "entropy",
            "entropy_bound",
            "purity",
            "purity_bound",
            "holds",
        ],
        &rows,
    )?;
    out.json("summary.json", &summary)?;
    let ok = reports.iter().all(|r| r.all_hold());
    out.finish("entropy-bounds", s)?;
    if ok {
        Ok(())
    } else {
        Err(anyhow!("a bound was violated; see bounds.csv"))
    }
}
