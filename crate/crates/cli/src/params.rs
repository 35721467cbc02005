use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Mutex;

use anyhow::{anyhow, Context, Result};
use qregister::encoding::Config;
use qregister::{SimplifyOptions, SvdTruncation};

use crate::GlobalArgs;

/// Keys every configuration file may set.
pub const GLOBAL_KEYS: &[&str] = &["tolerance", "max-rank", "sweeps", "output", "seed"];

/// Resolved global options plus the per-command parameters, in flag > config > default order.
pub struct Settings {
    pub command: &'static str,
    pub truncation: SvdTruncation,
    pub simplify: SimplifyOptions,
    pub output: PathBuf,
    pub seed: u64,
    config: Config,
    resolved: Mutex<BTreeMap<String, String>>,
}

impl Settings {
    pub fn resolve(global: &GlobalArgs, command: &'static str, keys: &[&str]) -> Result<Self> {
        Self::resolve_with(global, command, keys, 1e-10)
    }

    /// As [`Settings::resolve`] with a command-specific default truncation tolerance.
    pub fn resolve_with(
        global: &GlobalArgs,
        command: &'static str,
        keys: &[&str],
        default_tolerance: f64,
    ) -> Result<Self> {
        let allowed: Vec<&str> = GLOBAL_KEYS.iter().chain(keys).copied().collect();
        let config = match &global.config {
            Some(path) => Config::from_file(path, &allowed)?,
            None => Config::default(),
        };
        let mut s = Self {
            command,
            truncation: SvdTruncation::default(),
            simplify: SimplifyOptions::default(),
            output: PathBuf::new(),
            seed: 0,
            config,
            resolved: Mutex::new(BTreeMap::new()),
        };
        let tol = s.get("tolerance", global.tolerance, default_tolerance)?;
        let rank = s.get("max-rank", global.max_rank, 64usize)?;
        let sweeps = s.get("sweeps", global.sweeps, 4usize)?;
        if sweeps == 0 {
            return Err(anyhow!("--sweeps must be at least 1"));
        }
        s.truncation = SvdTruncation::new(tol, Some(rank))?;
        s.simplify = SimplifyOptions {
            max_sweeps: sweeps,
            ..SimplifyOptions::with_truncation(s.truncation)
        };
        let out = global.output.as_ref().map(|p| p.display().to_string());
        s.output = PathBuf::from(s.get("output", out, "qreg-output".to_string())?);
        s.seed = s.get("seed", global.seed, 0u64)?;
        Ok(s)
    }

    /// Command-line value if given, else the configuration entry, else `default`.
    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => match self.config.get(key) {
                Some(raw) => raw
                    .parse::<T>()
                    .map_err(|e| anyhow!("{key} = '{raw}': {e}"))?,
                None => default,
            },
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Like [`Settings::get`] without a default.
    pub fn get_opt<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self
                .config
                .get(key)
                .map(|raw| {
                    raw.parse::<T>()
                        .map_err(|e| anyhow!("{key} = '{raw}': {e}"))
                })
                .transpose()?,
        };
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }

    /// A comma-separated list parameter.
    pub fn list<T>(
        &self,
        key: &str,
        flag: Option<&str>,
        default: &str,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<Vec<T>> {
        let raw = flag
            .map(str::to_string)
            .or_else(|| self.config.get(key).map(str::to_string))
            .unwrap_or(default.into());
        self.record(key, &raw);
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse(s).with_context(|| format!("{key}: bad entry '{s}'")))
            .collect()
    }

    fn record(&self, key: &str, v: &dyn Display) {
        self.resolved
            .lock()
            .expect("parameter log")
            .insert(key.to_string(), v.to_string());
    }

    /// Every parameter resolved so far, including the global options.
    pub fn parameters(&self) -> BTreeMap<String, String> {
        let mut m = self.resolved.lock().expect("parameter log").clone();
        m.insert(
            "tolerance".into(),
            format!("{:e}", self.truncation.relative_tolerance),
        );
        m.insert(
            "max-rank".into(),
            self.truncation
                .max_rank
                .map_or("none".into(), |r| r.to_string()),
        );
        m.insert("sweeps".into(), self.simplify.max_sweeps.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

/// Angles as plain numbers or multiples of pi: `0.3`, `pi`, `pi/4`, `3pi/8`, `-pi/2`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (
            n.trim(),
            d.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad angle '{s}'"))?,
        ),
        None => (t.as_str(), 1.0),
    };
    let coef = match num.strip_suffix("pi").map(str::trim) {
        Some("") => 1.0,
        Some("-") => -1.0,
        Some(c) => c
            .trim_end_matches('*')
            .parse::<f64>()
            .map_err(|_| anyhow!("bad angle '{s}'"))?,
        None => return Err(anyhow!("bad angle '{s}'")),
    };
    Ok(coef * std::f64::consts::PI / den)
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| anyhow!("{e}"))
}

pub fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|e| anyhow!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert!((parse_angle("pi/4").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_angle("3pi/8").unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((parse_angle("-pi").unwrap() + PI).abs() < 1e-15);
        assert!(parse_angle("tau").is_err());
    }
}
