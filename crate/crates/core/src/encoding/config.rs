use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::encoding::distribution::Distribution;
use crate::encoding::sampling::{Representation, Scheme};
use crate::error::{Error, Result};
use crate::grid::{Axis, QubitOrder};
use crate::tensor::SvdTruncation;

/// Keys understood by the encoding settings.
pub const ENCODING_KEYS: &[&str] = &[
    "dist",
    "sigma",
    "mu",
    "a",
    "b",
    "m",
    "scheme",
    "representation",
    "ordering",
    "K",
    "max_rank",
    "tolerance",
];

/// Plain `key = value` settings; `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            let (k, v) = (k.trim(), v.trim());
            check_key(k, allowed)?;
            values.insert(k.to_string(), v.to_string());
        }
        Ok(Self { values })
    }

    pub fn from_file(path: &Path, allowed: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, allowed)
    }

    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, String)>,
        allowed: &[&str],
    ) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in pairs {
            check_key(k, allowed)?;
            c.values.insert(k.to_string(), v);
        }
        Ok(c)
    }

    /// Entries of `other` override entries of `self`.
    pub fn merged(mut self, other: &Config) -> Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Parse(format!("{key} = '{v}': {e}")))
            })
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }
}

fn check_key(key: &str, allowed: &[&str]) -> Result<()> {
    if allowed.contains(&key) {
        Ok(())
    } else {
        Err(Error::Parse(format!(
            "unknown key '{key}'; valid keys: {}",
            allowed.join(", ")
        )))
    }
}

/// One-dimensional sampling settings resolved from a configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodingSettings {
    pub distribution: Distribution,
    pub axis: Axis,
    pub scheme: Scheme,
    pub representation: Representation,
    pub ordering: QubitOrder,
    pub steps: usize,
    pub truncation: SvdTruncation,
}

impl EncodingSettings {
    /// Missing interval bounds fall back to the distribution's default interval.
    pub fn from_config(c: &Config) -> Result<Self> {
        let name = c.get("dist").unwrap_or("gaussian");
        let distribution =
            Distribution::from_name(name, c.parsed_or("sigma", 1.0)?, c.parsed_or("mu", 0.0)?)?;
        let (da, db) = distribution.default_interval();
        let axis = Axis::new(
            c.parsed_or("a", da)?,
            c.parsed_or("b", db)?,
            c.parsed_or("m", 10)?,
        )?;
        let truncation = SvdTruncation::new(
            c.parsed_or("tolerance", 1e-10)?,
            Some(c.parsed_or("max_rank", 64)?),
        )?;
        Ok(Self {
            distribution,
            axis,
            scheme: c.parsed_or("scheme", Scheme::GrIntegral)?,
            representation: c.parsed_or("representation", Representation::Sqrt)?,
            ordering: c.parsed_or("ordering", QubitOrder::A)?,
            steps: c.parsed_or("K", 8)?,
            truncation,
        })
    }
}
