use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qregister::Mps;
use serde::Serialize;

use crate::params::Settings;

/// Bytes per complex double.
const COMPLEX_BYTES: usize = 16;

/// Memory summary of an MPS.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeReport {
    pub qubits: usize,
    /// Complex parameters, `sum_i 2 chi_i chi_{i+1}`.
    pub parameters: usize,
    pub max_bond: usize,
    pub bond_dims: Vec<usize>,
    pub bytes: usize,
    /// Entries of the equivalent dense vector, `2^n`.
    pub dense_size: f64,
    pub dense_bytes: f64,
}

pub fn report_sizes(p: &Mps) -> SizeReport {
    let parameters = p.parameter_count();
    let dense = 2f64.powi(p.len() as i32);
    SizeReport {
        qubits: p.len(),
        parameters,
        max_bond: p.max_bond(),
        bond_dims: p.bond_dims(),
        bytes: parameters * COMPLEX_BYTES,
        dense_size: dense,
        dense_bytes: dense * COMPLEX_BYTES as f64,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    study: &'a str,
    command: &'a str,
    parameters: BTreeMap<String, String>,
    files: &'a [String],
}

/// Output directory of one command run; keeps track of the files written.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn csv<R: AsRef<[String]>>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[R],
    ) -> Result<()> {
        let path = self.path(name);
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let f = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(f), value)?;
        Ok(())
    }

    pub fn mps(&mut self, name: &str, p: &Mps) -> Result<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("writing {}", path.display()))?,
        );
        p.write_to(&mut w)?;
        Ok(())
    }

    /// Write `manifest.json` naming the study and every parameter used.
    pub fn finish(mut self, study: &str, settings: &Settings) -> Result<()> {
        let files = self.files.clone();
        let m = Manifest {
            study,
            command: settings.command,
            parameters: settings.parameters(),
            files: &files,
        };
        self.json("manifest.json", &m)
    }
}

/// Fixed-precision float formatting for CSV bodies.
pub fn num(x: f64) -> String {
    // Adding zero folds -0.0 into 0.0.
    format!("{:.12e}", x + 0.0)
}
