use anyhow::Result;
use clap::Args;
use qregister::encoding::{sample_1d, Config, EncodingSettings, ENCODING_KEYS};

use crate::artifacts::{num, report_sizes, Artifacts};
use crate::params::Settings;

pub const KEYS: &[&str] = &[
    "dist",
    "sigma",
    "mu",
    "a",
    "b",
    "m",
    "scheme",
    "representation",
];

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// gaussian, lognormal, lorentzian, nonconvex or uniform.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Interval start (defaults depend on the distribution).
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Qubits.
    #[arg(long)]
    pub m: Option<usize>,
    /// gr, riemann or simpson.
    #[arg(long)]
    pub scheme: Option<String>,
    /// amplitude or sqrt.
    #[arg(long)]
    pub representation: Option<String>,
}

pub fn run(args: &EncodeArgs, s: &Settings) -> Result<()> {
    let mut c = Config::default();
    c.set(
        "dist",
        s.get("dist", args.dist.clone(), "gaussian".to_string())?,
    );
    c.set("sigma", s.get("sigma", args.sigma, 1.0)?.to_string());
    c.set("mu", s.get("mu", args.mu, 0.0)?.to_string());
    if let Some(a) = s.get_opt("a", args.a)? {
        c.set("a", a.to_string());
    }
    if let Some(b) = s.get_opt("b", args.b)? {
        c.set("b", b.to_string());
    }
    c.set("m", s.get("m", args.m, 10)?.to_string());
    c.set(
        "scheme",
        s.get("scheme", args.scheme.clone(), "gr".to_string())?,
    );
    c.set(
        "representation",
        s.get(
            "representation",
            args.representation.clone(),
            "sqrt".to_string(),
        )?,
    );
    c.set("tolerance", s.truncation.relative_tolerance.to_string());
    if let Some(r) = s.truncation.max_rank {
        c.set("max_rank", r.to_string());
    }
    debug_assert!(c.entries().all(|(k, _)| ENCODING_KEYS.contains(&k)));
    let e = EncodingSettings::from_config(&c)?;
    let p = sample_1d(
        e.distribution.into(),
        &e.axis,
        e.scheme,
        e.representation,
        &e.truncation,
    )?;
    let mut out = Artifacts::create(&s.output)?;
    out.mps("state.mps", &p)?;
    let rows: Vec<Vec<String>> = p
        .entropy_profile()
        .iter()
        .enumerate()
        .map(|(i, v)| vec![(i + 1).to_string(), num(*v)])
        .collect();
    out.csv("entropy.csv", &["cut", "entropy"], &rows)?;
    out.json("sizes.json", &report_sizes(&p))?;
    out.finish("encoding", s)
}
