//! Matrix-product states over a register of qubits.
//!
//! Site `i` holds a tensor of shape `[left, 2, right]`. Site 0 is the most
//! significant qubit, so the dense index of `|s_0 s_1 ... s_{n-1}>` is
//! `sum_i s_i 2^(n-1-i)`. The represented vector is `exp(log_prefactor)` times
//! the contraction of the chain.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::tensor::{
    adjoint, frobenius, lq_matrix, mat_from_rows, mat_to_rows, qr_matrix, scale_cols, scale_mat,
    scale_rows, svd_matrix, DenseTensor, Mat, SvdTruncation, C64, ONE, ZERO,
};

const DEFAULT_DENSE_LIMIT: usize = 26;
const MAGIC: &[u8; 6] = b"QRMPS1";

/// Largest register that may be expanded into a dense vector.
///
/// Defaults to 26 qubits and can be overridden with `QRMPS_DENSE_LIMIT`.
pub fn dense_limit() -> usize {
    std::env::var("QRMPS_DENSE_LIMIT")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_LIMIT)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    pub cut: usize,
    pub weights: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Base-2 von Neumann entropy of the weights.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.weights)
    }
}

/// Entropy in bits of a normalized weight distribution, ignoring weights below 1e-15.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 1e-15)
        .map(|&w| -w * w.log2())
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    sites: Vec<DenseTensor>,
    log_prefactor: f64,
    center: Option<usize>,
}

pub(crate) fn site_matrix(t: &DenseTensor, s: usize) -> Mat {
    let (l, r) = (t.shape()[0], t.shape()[2]);
    let d = t.data();
    Mat::from_fn(l, r, |a, b| d[a * 2 * r + s * r + b])
}

impl Mps {
    pub fn new(sites: Vec<DenseTensor>, log_prefactor: f64) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Shape("an MPS needs at least one site".into()));
        }
        if !log_prefactor.is_finite() {
            return Err(Error::Domain("log prefactor must be finite".into()));
        }
        let mut left = 1;
        for (i, t) in sites.iter().enumerate() {
            let sh = t.shape();
            if sh.len() != 3 || sh[1] != 2 {
                return Err(Error::Shape(format!(
                    "site {i} has shape {sh:?}, expected [l, 2, r]"
                )));
            }
            if sh[0] != left {
                return Err(Error::Dimension(format!(
                    "site {i} left bond {} != {left}",
                    sh[0]
                )));
            }
            left = sh[2];
        }
        if left != 1 {
            return Err(Error::Dimension(format!(
                "right boundary bond is {left}, expected 1"
            )));
        }
        Ok(Self {
            sites,
            log_prefactor,
            center: None,
        })
    }

    pub(crate) fn from_parts(
        sites: Vec<DenseTensor>,
        log_prefactor: f64,
        center: Option<usize>,
    ) -> Self {
        Self {
            sites,
            log_prefactor,
            center,
        }
    }

    /// Product state with the given single-qubit vectors.
    pub fn product(states: &[[C64; 2]]) -> Result<Self> {
        let sites = states
            .iter()
            .map(|v| DenseTensor::from_raw(vec![1, 2, 1], v.to_vec()))
            .collect();
        let mut p = Self::new(sites, 0.0)?;
        p.normalize_center_free();
        Ok(p)
    }

    /// Computational basis state `|bits>`.
    pub fn basis(bits: &[u8]) -> Result<Self> {
        let states: Vec<[C64; 2]> = bits
            .iter()
            .map(|&b| if b == 0 { [ONE, ZERO] } else { [ZERO, ONE] })
            .collect();
        Self::product(&states)
    }

    /// Unnormalized all-ones vector (value 1 on every basis state).
    pub fn ones(n: usize) -> Result<Self> {
        Self::product(&vec![[ONE, ONE]; n])
    }

    /// Normalized uniform superposition.
    pub fn uniform(n: usize) -> Result<Self> {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::product(&vec![[h, h]; n])
    }

    /// The zero vector on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let sites = (0..n.max(1))
            .map(|_| DenseTensor::zeros(vec![1, 2, 1]))
            .collect();
        Self {
            sites,
            log_prefactor: 0.0,
            center: None,
        }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[DenseTensor] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &DenseTensor {
        &self.sites[i]
    }

    pub fn log_prefactor(&self) -> f64 {
        self.log_prefactor
    }

    pub fn canonical_center(&self) -> Option<usize> {
        self.center
    }

    pub fn into_sites(self) -> Vec<DenseTensor> {
        self.sites
    }

    /// Bond dimensions including both boundary bonds (length `n + 1`).
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = vec![1];
        dims.extend(self.sites.iter().map(|t| t.shape()[2]));
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Number of complex parameters, `sum_i 2 chi_i chi_{i+1}`.
    pub fn parameter_count(&self) -> usize {
        self.sites.iter().map(|t| t.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.sites
            .iter()
            .any(|t| t.data().iter().all(|z| *z == ZERO))
    }

    /// Sequential Schmidt decomposition of a dense vector of length `2^n`.
    pub fn from_dense(v: &[C64], trunc: &SvdTruncation) -> Result<Self> {
        let len = v.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "vector length {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > dense_limit() {
            return Err(Error::Resource(format!(
                "{n} qubits exceed the dense limit {}",
                dense_limit()
            )));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("non-finite amplitude".into()));
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(Self::zero(n));
        }
        let scaled: Vec<C64> = v.iter().map(|z| z / norm).collect();
        let mut rest = mat_from_rows(2, len / 2, &scaled);
        let mut sites = Vec::with_capacity(n);
        let mut left = 1;
        for _ in 0..n - 1 {
            let svd = svd_matrix(&rest, trunc)?;
            let r = svd.s.len();
            sites.push(DenseTensor::from_matrix(&svd.u, vec![left, 2, r])?);
            let mut sv = svd.vt;
            scale_rows(&mut sv, &svd.s);
            let cols = sv.ncols();
            let flat = mat_to_rows(&sv);
            rest = mat_from_rows(r * 2, cols / 2, &flat);
            left = r;
        }
        sites.push(DenseTensor::from_matrix(&rest, vec![left, 2, 1])?);
        let mut p = Self {
            sites,
            log_prefactor: norm.ln(),
            center: Some(n - 1),
        };
        p.normalize_center();
        Ok(p)
    }

    /// Dense amplitudes of the represented vector.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let n = self.len();
        if n > dense_limit() {
            return Err(Error::Resource(format!(
                "{n} qubits exceed the dense limit {}",
                dense_limit()
            )));
        }
        // acc is a (2^k) x chi matrix, stored row-major.
        let mut acc = vec![ONE];
        let mut chi = 1;
        for t in &self.sites {
            let (l, r) = (t.shape()[0], t.shape()[2]);
            debug_assert_eq!(l, chi);
            let rows = acc.len() / chi;
            let a = mat_from_rows(rows, l, &acc);
            let c = &a * &t.to_matrix(1);
            acc = mat_to_rows(&c);
            chi = r;
        }
        let f = self.log_prefactor.exp();
        Ok(acc.into_iter().map(|z| z * f).collect())
    }

    /// `<self|other>` including both prefactors.
    pub fn inner(&self, other: &Mps) -> Result<C64> {
        let (core, log) = self.inner_parts(other)?;
        Ok(core * log.exp())
    }

    /// Overlap split as `core * exp(log)`, which avoids overflow for large prefactors.
    pub fn inner_parts(&self, other: &Mps) -> Result<(C64, f64)> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "{} vs {} qubits",
                self.len(),
                other.len()
            )));
        }
        let mut env = Mat::from_fn(1, 1, |_, _| ONE);
        let mut log = self.log_prefactor + other.log_prefactor;
        for (a, b) in self.sites.iter().zip(&other.sites) {
            let mut next = Mat::zeros(a.shape()[2], b.shape()[2]);
            for s in 0..2 {
                next += adjoint(&site_matrix(a, s)) * &env * site_matrix(b, s);
            }
            let scale = frobenius(&next);
            if scale == 0.0 {
                return Ok((ZERO, 0.0));
            }
            if !(1e-100..=1e100).contains(&scale) {
                scale_mat(&mut next, C64::new(1.0 / scale, 0.0));
                log += scale.ln();
            }
            env = next;
        }
        Ok((env[(0, 0)], log))
    }

    /// Natural log of the 2-norm; `-inf` for the zero vector.
    pub fn log_norm(&self) -> f64 {
        let mut c = self.clone();
        c.canonicalize(0);
        if c.is_zero() {
            f64::NEG_INFINITY
        } else {
            c.log_prefactor
        }
    }

    pub fn norm(&self) -> f64 {
        self.log_norm().exp()
    }

    /// Copy with unit norm (the zero vector is returned unchanged).
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        if c.center.is_none() {
            c.canonicalize(0);
        }
        if !c.is_zero() {
            c.normalize_center();
            c.log_prefactor = 0.0;
        }
        c
    }

    /// Multiply by a complex scalar.
    pub fn scaled(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero(self.len());
        }
        let mut out = self.clone();
        let mag = c.norm();
        out.log_prefactor += mag.ln();
        let phase = c / mag;
        if phase != ONE {
            let k = out.center.unwrap_or(0);
            out.sites[k] = out.sites[k].scale(phase);
        }
        out
    }

    pub fn with_log_prefactor(mut self, log_prefactor: f64) -> Self {
        self.log_prefactor = log_prefactor;
        self
    }

    /// Rescale the tensor at the canonical center (or site 0) to unit norm, moving the norm into the prefactor.
    fn normalize_center(&mut self) {
        let k = self.center.unwrap_or(0);
        let nrm = self.sites[k].norm();
        if nrm == 0.0 {
            *self = Self::zero(self.len());
        } else if nrm != 1.0 {
            self.sites[k] = self.sites[k].scale(C64::new(1.0 / nrm, 0.0));
            self.log_prefactor += nrm.ln();
        }
    }

    fn normalize_center_free(&mut self) {
        for i in 0..self.len() {
            let nrm = self.sites[i].norm();
            if nrm == 0.0 {
                *self = Self::zero(self.len());
                return;
            }
            self.sites[i] = self.sites[i].scale(C64::new(1.0 / nrm, 0.0));
            self.log_prefactor += nrm.ln();
        }
        self.center = if self.sites.iter().all(|t| t.len() == 2) {
            Some(0)
        } else {
            None
        };
    }

    /// Bring the chain into mixed canonical form around `center`.
    pub fn canonicalize(&mut self, center: usize) {
        assert!(center < self.len(), "center {center} out of range");
        if self.is_zero() {
            *self = Self::zero(self.len());
            self.center = Some(center);
            return;
        }
        let n = self.len();
        match self.center {
            Some(c) => {
                for i in c..center {
                    self.shift_left_to_right(i);
                }
                for i in ((center + 1)..=c).rev() {
                    self.shift_right_to_left(i);
                }
            }
            None => {
                for i in 0..center {
                    self.shift_left_to_right(i);
                }
                for i in ((center + 1)..n).rev() {
                    self.shift_right_to_left(i);
                }
            }
        }
        self.center = Some(center);
        self.normalize_center();
    }

    /// QR at site `i`, pushing R into site `i + 1`.
    fn shift_left_to_right(&mut self, i: usize) {
        let t = &self.sites[i];
        let (l, r) = (t.shape()[0], t.shape()[2]);
        let (q, rm) = qr_matrix(t.to_matrix(2));
        let k = q.ncols();
        self.sites[i] = DenseTensor::from_matrix(&q, vec![l, 2, k]).expect("qr shape");
        let next = &self.sites[i + 1];
        let (nl, nr) = (next.shape()[0], next.shape()[2]);
        debug_assert_eq!(nl, r);
        let mut prod = &rm * &next.to_matrix(1);
        let nrm = frobenius(&prod);
        if nrm > 0.0 {
            scale_mat(&mut prod, C64::new(1.0 / nrm, 0.0));
            self.log_prefactor += nrm.ln();
        }
        self.sites[i + 1] = DenseTensor::from_matrix(&prod, vec![k, 2, nr]).expect("qr shape");
    }

    /// LQ at site `i`, pushing L into site `i - 1`.
    fn shift_right_to_left(&mut self, i: usize) {
        let t = &self.sites[i];
        let (l, r) = (t.shape()[0], t.shape()[2]);
        let (lm, q) = lq_matrix(t.to_matrix(1));
        let k = q.nrows();
        self.sites[i] = DenseTensor::from_matrix(&q, vec![k, 2, r]).expect("lq shape");
        let prev = &self.sites[i - 1];
        let pl = prev.shape()[0];
        debug_assert_eq!(prev.shape()[2], l);
        let mut prod = &prev.to_matrix(2) * &lm;
        let nrm = frobenius(&prod);
        if nrm > 0.0 {
            scale_mat(&mut prod, C64::new(1.0 / nrm, 0.0));
            self.log_prefactor += nrm.ln();
        }
        self.sites[i - 1] = DenseTensor::from_matrix(&prod, vec![pl, 2, k]).expect("lq shape");
    }

    /// Move an existing canonical center (or establish one) at `center`.
    pub fn move_center(&mut self, center: usize) {
        self.canonicalize(center);
    }

    /// SVD-truncate every bond; returns the summed relative discarded weight.
    pub fn compress(&mut self, trunc: &SvdTruncation) -> Result<f64> {
        let n = self.len();
        self.canonicalize(n - 1);
        if self.is_zero() || n == 1 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for i in (1..n).rev() {
            let t = &self.sites[i];
            let r = t.shape()[2];
            let svd = svd_matrix(&t.to_matrix(1), trunc)?;
            total += svd.discarded;
            let k = svd.s.len();
            self.sites[i] = DenseTensor::from_matrix(&svd.vt, vec![k, 2, r])?;
            let mut us = svd.u;
            scale_cols(&mut us, &svd.s);
            let prev = &self.sites[i - 1];
            let pl = prev.shape()[0];
            let prod = &prev.to_matrix(2) * &us;
            self.sites[i - 1] = DenseTensor::from_matrix(&prod, vec![pl, 2, k])?;
            self.center = Some(i - 1);
            self.normalize_center();
        }
        Ok(total)
    }

    /// Exchange qubits `k` and `k + 1`, truncating the new bond; returns the discarded weight.
    pub fn swap_adjacent(&mut self, k: usize, trunc: &SvdTruncation) -> Result<f64> {
        if k + 1 >= self.len() {
            return Err(Error::Argument(format!(
                "swap at {k} needs sites {k} and {}",
                k + 1
            )));
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        self.canonicalize(k);
        let (l, r) = (self.sites[k].shape()[0], self.sites[k + 1].shape()[2]);
        let theta = &self.sites[k].to_matrix(2) * &self.sites[k + 1].to_matrix(1);
        let swapped = Mat::from_fn(2 * l, 2 * r, |row, col| {
            let (a, s2) = (row / 2, row % 2);
            let (s1, b) = (col / r, col % r);
            theta[(a * 2 + s1, s2 * r + b)]
        });
        let svd = svd_matrix(&swapped, trunc)?;
        let d = svd.s.len();
        let mut vt = svd.vt;
        scale_rows(&mut vt, &svd.s);
        self.sites[k] = DenseTensor::from_matrix(&svd.u, vec![l, 2, d])?;
        self.sites[k + 1] = DenseTensor::from_matrix(&vt, vec![d, 2, r])?;
        self.center = Some(k + 1);
        self.normalize_center();
        Ok(svd.discarded)
    }

    /// Schmidt weights for the bipartition into the first `cut` qubits and the rest.
    pub fn schmidt_spectrum(&self, cut: usize) -> Result<SchmidtSpectrum> {
        if cut == 0 || cut >= self.len() {
            return Err(Error::Argument(format!(
                "cut {cut} outside 1..{}",
                self.len()
            )));
        }
        let mut c = self.clone();
        c.canonicalize(cut - 1);
        let s = svd_matrix(&c.sites[cut - 1].to_matrix(2), &SvdTruncation::exact())?.s;
        Ok(SchmidtSpectrum {
            cut,
            weights: normalized_weights(&s),
        })
    }

    /// Entropy in bits at every cut `1..n`, as a vector of length `n - 1`.
    pub fn entropy_profile(&self) -> Vec<f64> {
        self.spectra().iter().map(|w| entropy_bits(w)).collect()
    }

    /// Schmidt weights at every cut, left to right.
    pub fn spectra(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        if n < 2 {
            return Vec::new();
        }
        if self.is_zero() {
            return vec![vec![1.0]; n - 1];
        }
        let mut c = self.clone();
        c.canonicalize(0);
        let mut out = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let t = &c.sites[i];
            let l = t.shape()[0];
            let svd =
                svd_matrix(&t.to_matrix(2), &SvdTruncation::exact()).expect("finite site tensor");
            out.push(normalized_weights(&svd.s));
            let k = svd.s.len();
            c.sites[i] = DenseTensor::from_matrix(&svd.u, vec![l, 2, k]).expect("svd shape");
            let mut sv = svd.vt;
            scale_rows(&mut sv, &svd.s);
            let next = &c.sites[i + 1];
            let nr = next.shape()[2];
            let prod = &sv * &next.to_matrix(1);
            c.sites[i + 1] = DenseTensor::from_matrix(&prod, vec![k, 2, nr]).expect("svd shape");
        }
        out
    }

    /// Reverse the qubit order: `out(s_1..s_n) = in(s_n..s_1)`.
    pub fn reverse(&self) -> Self {
        let n = self.len();
        let sites = self
            .sites
            .iter()
            .rev()
            .map(|t| t.permute(&[2, 1, 0]).expect("rank-3 site"))
            .collect();
        Self {
            sites,
            log_prefactor: self.log_prefactor,
            center: self.center.map(|c| n - 1 - c),
        }
    }

    /// Insert a single-qubit factor `v` so that it becomes qubit `pos`.
    pub fn insert_site(&self, pos: usize, v: [C64; 2]) -> Result<Self> {
        if pos > self.len() {
            return Err(Error::Argument(format!(
                "insert position {pos} beyond {} sites",
                self.len()
            )));
        }
        let chi = if pos == 0 {
            1
        } else {
            self.sites[pos - 1].shape()[2]
        };
        let t = DenseTensor::from_fn(vec![chi, 2, chi], |ix| {
            if ix[0] == ix[2] {
                v[ix[1]]
            } else {
                ZERO
            }
        });
        let mut sites = self.sites.clone();
        sites.insert(pos, t);
        let mut out = Self {
            sites,
            log_prefactor: self.log_prefactor,
            center: None,
        };
        let nrm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if nrm == 0.0 {
            return Ok(Self::zero(out.len()));
        }
        out.sites[pos] = out.sites[pos].scale(C64::new(1.0 / nrm, 0.0));
        out.log_prefactor += nrm.ln();
        Ok(out)
    }

    /// Tensor product `|self> (x) |other>` with `self` occupying the leading qubits.
    pub fn kron(&self, other: &Mps) -> Self {
        let mut sites = self.sites.clone();
        sites.extend(other.sites.iter().cloned());
        Self {
            sites,
            log_prefactor: self.log_prefactor + other.log_prefactor,
            center: None,
        }
    }

    /// Write the binary checkpoint format.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        for d in self.bond_dims() {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for t in &self.sites {
            for z in t.data() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.write_all(&self.log_prefactor.to_le_bytes())?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("missing QRMPS1 header".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut u32buf)?;
        let n = u32::from_le_bytes(u32buf) as usize;
        if n == 0 {
            return Err(Error::Parse("zero-length chain".into()));
        }
        let mut dims = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            r.read_exact(&mut u32buf)?;
            dims.push(u32::from_le_bytes(u32buf) as usize);
        }
        let mut sites = Vec::with_capacity(n);
        for i in 0..n {
            let len = dims[i] * 2 * dims[i + 1];
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut f64buf)?;
                let re = f64::from_le_bytes(f64buf);
                r.read_exact(&mut f64buf)?;
                let im = f64::from_le_bytes(f64buf);
                data.push(C64::new(re, im));
            }
            sites.push(DenseTensor::new(vec![dims[i], 2, dims[i + 1]], data)?);
        }
        r.read_exact(&mut f64buf)?;
        Self::new(sites, f64::from_le_bytes(f64buf))
    }
}

fn normalized_weights(s: &[f64]) -> Vec<f64> {
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return vec![1.0];
    }
    s.iter().map(|x| x * x / total).collect()
}
