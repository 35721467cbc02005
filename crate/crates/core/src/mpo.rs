//! Matrix-product operators and the explicit constructors used by the library.
//!
//! Site tensors have shape `[left, out, in, right]`; the operator element
//! `<s'|O|s>` is the product of the matrices `W_i[:, s'_i, s_i, :]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid};
use crate::mps::{dense_limit, Mps};
use crate::tensor::{
    scale_cols, scale_rows, svd_matrix, DenseTensor, Mat, SvdTruncation, C64, ONE, ZERO,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Mpo {
    sites: Vec<DenseTensor>,
    name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `|s> -> |s + 1>`
    Up,
    /// `|s> -> |s - 1>`
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourierSign {
    /// Kernel `exp(-2 pi i s k / N)`.
    Forward,
    /// Kernel `exp(+2 pi i s k / N)`.
    Inverse,
}

impl FourierSign {
    fn sigma(self) -> f64 {
        match self {
            FourierSign::Forward => -1.0,
            FourierSign::Inverse => 1.0,
        }
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl Mpo {
    pub fn new(sites: Vec<DenseTensor>, name: impl Into<String>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Shape("an MPO needs at least one site".into()));
        }
        let mut left = 1;
        for (i, t) in sites.iter().enumerate() {
            let sh = t.shape();
            if sh.len() != 4 || sh[1] != 2 || sh[2] != 2 {
                return Err(Error::Shape(format!(
                    "site {i} has shape {sh:?}, expected [l, 2, 2, r]"
                )));
            }
            if sh[0] != left {
                return Err(Error::Dimension(format!(
                    "site {i} left bond {} != {left}",
                    sh[0]
                )));
            }
            left = sh[3];
        }
        if left != 1 {
            return Err(Error::Dimension(format!(
                "right boundary bond is {left}, expected 1"
            )));
        }
        Ok(Self {
            sites,
            name: name.into(),
        })
    }

    /// Build from per-site matrix-valued functions `f(i)(l, out, in, r)`.
    fn from_fn(
        n: usize,
        bonds: &[usize],
        name: &str,
        mut f: impl FnMut(usize, usize, usize, usize, usize) -> C64,
    ) -> Self {
        debug_assert_eq!(bonds.len(), n + 1);
        let sites = (0..n)
            .map(|i| {
                DenseTensor::from_fn(vec![bonds[i], 2, 2, bonds[i + 1]], |ix| {
                    f(i, ix[0], ix[1], ix[2], ix[3])
                })
            })
            .collect();
        Self {
            sites,
            name: name.into(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, &vec![1; n + 1], "identity", |_, _, o, i, _| {
            if o == i {
                ONE
            } else {
                ZERO
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
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

    pub fn bond_dims(&self) -> Vec<usize> {
        let mut d = vec![1];
        d.extend(self.sites.iter().map(|t| t.shape()[3]));
        d
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Multiply the operator by a scalar (absorbed in the first site).
    pub fn scaled(&self, k: C64) -> Self {
        let mut out = self.clone();
        out.sites[0] = out.sites[0].scale(k);
        out
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        let sites = self
            .sites
            .iter()
            .map(|t| t.permute(&[0, 2, 1, 3]).expect("rank-4 site").conj())
            .collect();
        Self {
            sites,
            name: format!("{}^dagger", self.name),
        }
    }

    /// `diag(p)` built from the cores of `p`; the prefactor `exp(log_prefactor)` is left out.
    pub fn from_diagonal(p: &Mps, name: impl Into<String>) -> Self {
        let sites = p
            .sites()
            .iter()
            .map(|a| {
                let (l, r) = (a.shape()[0], a.shape()[2]);
                DenseTensor::from_fn(vec![l, 2, 2, r], |ix| {
                    if ix[1] == ix[2] {
                        a.get(&[ix[0], ix[1], ix[3]])
                    } else {
                        ZERO
                    }
                })
            })
            .collect();
        Self {
            sites,
            name: name.into(),
        }
    }

    /// Exact operator-state product; bond dimensions multiply.
    pub fn apply_exact(&self, p: &Mps) -> Result<Mps> {
        if self.len() != p.len() {
            return Err(Error::Shape(format!(
                "operator on {} qubits applied to {} qubits",
                self.len(),
                p.len()
            )));
        }
        let sites = self
            .sites
            .iter()
            .zip(p.sites())
            .map(|(w, a)| {
                let (bl, br) = (w.shape()[0], w.shape()[3]);
                let (al, ar) = (a.shape()[0], a.shape()[2]);
                let wd = w.data();
                let ad = a.data();
                DenseTensor::from_fn(vec![bl * al, 2, br * ar], |ix| {
                    let (b, x) = (ix[0] / al, ix[0] % al);
                    let (bb, y) = (ix[2] / ar, ix[2] % ar);
                    let o = ix[1];
                    let mut acc = ZERO;
                    for s in 0..2 {
                        let wv = wd[((b * 2 + o) * 2 + s) * br + bb];
                        if wv != ZERO {
                            acc += wv * ad[(x * 2 + s) * ar + y];
                        }
                    }
                    acc
                })
            })
            .collect();
        Mps::new(sites, p.log_prefactor())
    }

    /// Operator product `self * other` (apply `other` first), exact.
    pub fn compose(&self, other: &Mpo) -> Result<Mpo> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "{} vs {} qubits",
                self.len(),
                other.len()
            )));
        }
        let sites = self
            .sites
            .iter()
            .zip(&other.sites)
            .map(|(a, b)| {
                let (al, ar) = (a.shape()[0], a.shape()[3]);
                let (bl, br) = (b.shape()[0], b.shape()[3]);
                DenseTensor::from_fn(vec![al * bl, 2, 2, ar * br], |ix| {
                    let (x, y) = (ix[0] / bl, ix[0] % bl);
                    let (xx, yy) = (ix[3] / br, ix[3] % br);
                    (0..2)
                        .map(|m| a.get(&[x, ix[1], m, xx]) * b.get(&[y, m, ix[2], yy]))
                        .sum()
                })
            })
            .collect();
        Mpo::new(sites, format!("{}*{}", self.name, other.name))
    }

    /// SVD-compressed copy; bonds are cut where the squared singular-value weight falls below `trunc`.
    pub fn compressed(&self, trunc: &SvdTruncation) -> Result<Mpo> {
        let n = self.len();
        let mut sites = self.sites.clone();
        if n < 2 {
            return Ok(self.clone());
        }
        // Exact left-orthogonalization first, so the truncating sweep sees canonical environments.
        for i in 0..n - 1 {
            let l = sites[i].shape()[0];
            let svd = svd_matrix(&sites[i].to_matrix(3), &SvdTruncation::exact())?;
            let k = svd.s.len();
            sites[i] = DenseTensor::from_matrix(&svd.u, vec![l, 2, 2, k])?;
            let mut svt = svd.vt;
            scale_rows(&mut svt, &svd.s);
            let next = &sites[i + 1];
            let nr = next.shape()[3];
            let prod = &svt * &next.to_matrix(1);
            sites[i + 1] = DenseTensor::from_matrix(&prod, vec![k, 2, 2, nr])?;
        }
        for i in (1..n).rev() {
            let r = sites[i].shape()[3];
            let svd = svd_matrix(&sites[i].to_matrix(1), trunc)?;
            let k = svd.s.len();
            sites[i] = DenseTensor::from_matrix(&svd.vt, vec![k, 2, 2, r])?;
            let mut us = svd.u;
            scale_cols(&mut us, &svd.s);
            let prev = &sites[i - 1];
            let pl = prev.shape()[0];
            let prod = &prev.to_matrix(3) * &us;
            sites[i - 1] = DenseTensor::from_matrix(&prod, vec![pl, 2, 2, k])?;
        }
        Mpo::new(sites, self.name.clone())
    }

    /// Dense `2^n x 2^n` matrix, row index = output basis state.
    pub fn to_dense(&self) -> Result<Mat> {
        let n = self.len();
        if 2 * n > dense_limit() {
            return Err(Error::Resource(format!(
                "a {n}-qubit operator is too large to densify"
            )));
        }
        // blocks[l][r] holds the partial product as a (2^k x 2^k) matrix per bond pair
        let mut acc: Vec<Mat> = vec![Mat::from_fn(1, 1, |_, _| ONE)];
        let mut chi = 1;
        for t in &self.sites {
            let (l, r) = (t.shape()[0], t.shape()[3]);
            debug_assert_eq!(l, chi);
            let dim = acc[0].nrows();
            let mut next = vec![Mat::zeros(dim * 2, dim * 2); r];
            for (rr, blk) in next.iter_mut().enumerate() {
                for (ll, prev) in acc.iter().enumerate() {
                    for o in 0..2 {
                        for i in 0..2 {
                            let w = t.get(&[ll, o, i, rr]);
                            if w == ZERO {
                                continue;
                            }
                            for a in 0..dim {
                                for b in 0..dim {
                                    blk[(2 * a + o, 2 * b + i)] += w * prev[(a, b)];
                                }
                            }
                        }
                    }
                }
            }
            acc = next;
            chi = r;
        }
        Ok(acc.into_iter().next().expect("boundary bond"))
    }

    /// Diagonal of a diagonal operator, read off without densifying the matrix.
    pub fn diagonal(&self) -> Result<Vec<C64>> {
        let n = self.len();
        if n > dense_limit() {
            return Err(Error::Resource(format!(
                "{n} qubits exceed the dense limit"
            )));
        }
        let mut acc: Vec<Vec<C64>> = vec![vec![ONE]];
        for t in &self.sites {
            let (l, r) = (t.shape()[0], t.shape()[3]);
            let len = acc[0].len();
            let mut next = vec![vec![ZERO; len * 2]; r];
            for (rr, out) in next.iter_mut().enumerate() {
                for ll in 0..l {
                    for s in 0..2 {
                        let w = t.get(&[ll, s, s, rr]);
                        if w != ZERO {
                            for a in 0..len {
                                out[2 * a + s] += w * acc[ll][a];
                            }
                        }
                    }
                }
            }
            acc = next;
        }
        Ok(acc.into_iter().next().expect("boundary bond"))
    }
}

/// Increment (`Up`) or decrement (`Down`) of the register, annihilating the overflow state.
///
/// The bond carries the carry (or borrow) bit from the less significant neighbour.
pub fn shift(n: usize, direction: ShiftDirection) -> Result<Mpo> {
    if n == 0 {
        return Err(Error::Argument("shift needs at least one qubit".into()));
    }
    let bulk = |l: usize, o: usize, i: usize, r: usize| -> C64 {
        let out = i ^ r;
        let carry = match direction {
            ShiftDirection::Up => i & r,
            ShiftDirection::Down => (1 - i) & r,
        };
        if o == out && l == carry {
            ONE
        } else {
            ZERO
        }
    };
    let mut bonds = vec![2; n + 1];
    bonds[0] = 1;
    bonds[n] = 1;
    let name = match direction {
        ShiftDirection::Up => "shift+",
        ShiftDirection::Down => "shift-",
    };
    Ok(Mpo::from_fn(n, &bonds, name, |site, l, o, i, r| {
        // Left boundary requires no outgoing carry; right boundary injects one.
        let r = if site == n - 1 { 1 } else { r };
        bulk(l, o, i, r)
    }))
}

/// `diag * I + up * S+ + down * S-` with a bond dimension of three.
pub fn tridiagonal(n: usize, diag: C64, up: C64, down: C64) -> Result<Mpo> {
    if n == 0 {
        return Err(Error::Argument("operator needs at least one qubit".into()));
    }
    // Bond channels from the right: 0 nothing pending, 1 carry, 2 borrow.
    let bulk = |l: usize, o: usize, i: usize, r: usize| -> C64 {
        let hit = match r {
            0 => l == 0 && o == i,
            1 => (i == 0 && o == 1 && l == 0) || (i == 1 && o == 0 && l == 1),
            _ => (i == 1 && o == 0 && l == 0) || (i == 0 && o == 1 && l == 2),
        };
        if hit {
            ONE
        } else {
            ZERO
        }
    };
    let weights = [diag, up, down];
    let mut bonds = vec![3; n + 1];
    bonds[0] = 1;
    bonds[n] = 1;
    Ok(Mpo::from_fn(
        n,
        &bonds,
        "tridiagonal",
        |site, l, o, i, r| {
            if site == n - 1 {
                (0..3).map(|ch| weights[ch] * bulk(l, o, i, ch)).sum()
            } else {
                bulk(l, o, i, r)
            }
        },
    ))
}

/// Diagonal operator `c * (offset + sum_k w_k s_k)` with bond dimension 2.
pub fn diagonal_linear(weights: &[f64], offset: f64, coeff: C64) -> Result<Mpo> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::Argument("operator needs at least one qubit".into()));
    }
    if n == 1 {
        return Ok(Mpo::from_fn(1, &[1, 1], "linear", |_, _, o, i, _| {
            if o == i {
                coeff * (offset + weights[0] * i as f64)
            } else {
                ZERO
            }
        }));
    }
    let mut bonds = vec![2; n + 1];
    bonds[0] = 1;
    bonds[n] = 1;
    Ok(Mpo::from_fn(n, &bonds, "linear", |site, l, o, i, r| {
        if o != i {
            return ZERO;
        }
        let t = weights[site] * i as f64 + if site == 0 { offset } else { 0.0 };
        // Transfer matrix [[1, c t], [0, 1]] with boundary vectors (1, 0) and (0, 1).
        let l = if site == 0 { 0 } else { l };
        let r = if site == n - 1 { 1 } else { r };
        match (l, r) {
            (0, 0) | (1, 1) => ONE,
            (0, 1) => coeff * t,
            _ => ZERO,
        }
    }))
}

/// Diagonal operator `c1 x + c2 x^2` with `x = offset + sum_k w_k s_k`, bond dimension 3.
pub fn diagonal_quadratic(weights: &[f64], offset: f64, c1: C64, c2: C64) -> Result<Mpo> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::Argument("operator needs at least one qubit".into()));
    }
    let mut bonds = vec![3; n + 1];
    bonds[0] = 1;
    bonds[n] = 1;
    Ok(Mpo::from_fn(n, &bonds, "quadratic", |site, l, o, i, r| {
        if o != i {
            return ZERO;
        }
        let t = weights[site] * i as f64 + if site == 0 { offset } else { 0.0 };
        // Channels: 0 identity, 1 running sum of x, 2 completed value.
        let m = |l: usize, r: usize| -> C64 {
            match (l, r) {
                (0, 0) | (1, 1) | (2, 2) => ONE,
                (0, 1) => c(t),
                (0, 2) => c1 * t + c2 * (t * t),
                (1, 2) => c2 * (2.0 * t),
                _ => ZERO,
            }
        };
        let l = if site == 0 { 0 } else { l };
        let r = if site == n - 1 { 2 } else { r };
        m(l, r)
    }))
}

/// Diagonal operator `exp(c (offset + sum_k w_k s_k))` as a product of single-site factors.
pub fn diagonal_exp(weights: &[f64], offset: f64, coeff: C64) -> Result<Mpo> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::Argument("operator needs at least one qubit".into()));
    }
    let mut sites = Vec::with_capacity(n);
    for (k, &w) in weights.iter().enumerate() {
        let base = if k == 0 { offset } else { 0.0 };
        let f0 = (coeff * base).exp();
        let f1 = (coeff * (base + w)).exp();
        for f in [f0, f1] {
            if !(f.re.is_finite() && f.im.is_finite()) {
                return Err(Error::Range(format!(
                    "site factor exp({coeff} * {}) overflows; build the exponential in stages instead",
                    base + w
                )));
            }
        }
        sites.push(DenseTensor::from_raw(
            vec![1, 2, 2, 1],
            vec![f0, ZERO, ZERO, f1],
        ));
    }
    Mpo::new(sites, "exp-linear")
}

fn axis_weights(axis: &Axis) -> Vec<f64> {
    (0..axis.qubits).map(|k| axis.bit_weight(k)).collect()
}

/// Bit weights and offset of a grid coordinate, expressed on the full register.
pub fn coordinate_weights(grid: &Grid, dim: usize) -> Result<(Vec<f64>, f64)> {
    if dim >= grid.dims() {
        return Err(Error::Argument(format!(
            "dimension {dim} not in a {}-dimensional grid",
            grid.dims()
        )));
    }
    let map = grid.ordering_map();
    let axis = grid.axis(dim);
    let mut w = vec![0.0; grid.total_qubits()];
    for k in 0..axis.qubits {
        w[map.position(dim, k)] = axis.bit_weight(k);
    }
    Ok((w, axis.start))
}

/// `c * x` on a one-dimensional grid.
pub fn position(axis: &Axis, coeff: C64) -> Result<Mpo> {
    Ok(diagonal_linear(&axis_weights(axis), axis.start, coeff)?.with_name("position"))
}

/// `c * x^2` on a one-dimensional grid.
pub fn position_squared(axis: &Axis, coeff: C64) -> Result<Mpo> {
    Ok(diagonal_quadratic(&axis_weights(axis), axis.start, ZERO, coeff)?.with_name("position^2"))
}

/// `exp(c x)` on a one-dimensional grid.
pub fn exp_linear(axis: &Axis, coeff: C64) -> Result<Mpo> {
    Ok(diagonal_exp(&axis_weights(axis), axis.start, coeff)?.with_name("exp(position)"))
}

/// `c * x_dim` on a multivariate grid.
pub fn position_on(grid: &Grid, dim: usize, coeff: C64) -> Result<Mpo> {
    let (w, off) = coordinate_weights(grid, dim)?;
    diagonal_linear(&w, off, coeff)
}

/// Signed bit weights of the momentum register: `-2^(m-1), 2^(m-2), ..., 1`.
pub fn signed_bit_weights(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let w = 2f64.powi((m - 1 - k) as i32);
            if k == 0 {
                -w
            } else {
                w
            }
        })
        .collect()
}

/// Signed integer value of `s` read as an `m`-bit two's-complement number.
pub fn twos_complement_value(s: usize, m: usize) -> i64 {
    let s = s as i64;
    if m < 64 && s >= 1 << (m - 1) {
        s - (1 << m)
    } else {
        s
    }
}

/// Diagonal momentum operator `k = (2 pi / L) sbar` (power 1) or `k^2` (power 2).
pub fn momentum(axis: &Axis, power: u32) -> Result<Mpo> {
    let scale = 2.0 * PI / axis.length();
    let w: Vec<f64> = signed_bit_weights(axis.qubits)
        .into_iter()
        .map(|x| x * scale)
        .collect();
    match power {
        1 => Ok(diagonal_linear(&w, 0.0, ONE)?.with_name("momentum")),
        2 => Ok(diagonal_quadratic(&w, 0.0, ZERO, ONE)?.with_name("momentum^2")),
        p => Err(Error::Argument(format!(
            "momentum power {p} not supported (1 or 2)"
        ))),
    }
}

/// Permutation `|s1, s2, ..., sn> -> |s1, s1^s2, ..., s1^sn>`.
pub fn twos_complement(n: usize) -> Result<Mpo> {
    if n == 0 {
        return Err(Error::Argument("operator needs at least one qubit".into()));
    }
    if n == 1 {
        return Ok(Mpo::identity(1).with_name("twos-complement"));
    }
    let mut bonds = vec![2; n + 1];
    bonds[0] = 1;
    bonds[n] = 1;
    Ok(Mpo::from_fn(
        n,
        &bonds,
        "twos-complement",
        |site, l, o, i, r| {
            let hit = if site == 0 {
                o == i && r == i
            } else if site == n - 1 {
                o == (i ^ l)
            } else {
                o == (i ^ l) && r == l
            };
            if hit {
                ONE
            } else {
                ZERO
            }
        },
    ))
}

/// Finite-difference stencils with absorbing boundaries.
///
/// `First` returns `(p(s+1) - p(s-1)) / 2dx`, `Second` returns `(p(s+1) + p(s-1) - 2 p(s)) / dx^2`.
pub fn finite_difference(axis: &Axis, order: Derivative) -> Result<Mpo> {
    let dx = axis.spacing();
    let n = axis.qubits;
    // (S+ p)(s) = p(s - 1) and (S- p)(s) = p(s + 1).
    match order {
        Derivative::First => Ok(tridiagonal(n, ZERO, c(-0.5 / dx), c(0.5 / dx))?.with_name("d/dx")),
        Derivative::Second => Ok(tridiagonal(
            n,
            c(-2.0 / (dx * dx)),
            c(1.0 / (dx * dx)),
            c(1.0 / (dx * dx)),
        )?
        .with_name("d2/dx2")),
    }
}

/// Diagonal quadratic form `exp(scale * sum_ij Q_ij s_i s_j)` over register bits.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboForm {
    q: Vec<Vec<f64>>,
    scale: C64,
}

impl QuboForm {
    pub fn new(q: Vec<Vec<f64>>, scale: C64) -> Result<Self> {
        let k = q.len();
        if k == 0 || q.iter().any(|row| row.len() != k) {
            return Err(Error::Shape(
                "QUBO matrix must be square and non-empty".into(),
            ));
        }
        let amax = q.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..k {
            for j in 0..i {
                if (q[i][j] - q[j][i]).abs() > 1e-14 * amax.max(1.0) {
                    return Err(Error::Argument(format!(
                        "QUBO matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if q.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Range("non-finite QUBO coupling".into()));
        }
        Ok(Self { q, scale })
    }

    pub fn size(&self) -> usize {
        self.q.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn scale(&self) -> C64 {
        self.scale
    }

    /// `scale * sum_ij Q_ij s_i s_j` for the basis state with bits `bits`.
    pub fn energy(&self, bits: &[u8]) -> C64 {
        let mut e = 0.0;
        for (i, row) in self.q.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                e += v * (bits[i] * bits[j]) as f64;
            }
        }
        self.scale * e
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            q: self.q.clone(),
            scale: self.scale * k,
        }
    }
}

/// One MPO layer per bit; their product is `exp(scale * s^T Q s)`.
///
/// Layer `k` places `exp(scale Q_kk s_k)` on site `k`, copies `s_k` into the bond and
/// multiplies `exp(2 scale Q_kn s_k s_n)` on every later site `n`.
pub fn qubo_exponential_layers(form: &QuboForm) -> Result<Vec<Mpo>> {
    let n = form.size();
    let q = form.matrix();
    let sc = form.scale();
    let check = |v: C64, what: &str| -> Result<C64> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Range(format!(
                "{what} overflows; split the exponential into more refinement steps"
            )))
        }
    };
    let mut layers = Vec::with_capacity(n);
    for k in 0..n {
        let mut sites = Vec::with_capacity(n);
        let last_coupled = (k + 1..n).rev().find(|&j| q[k][j] != 0.0);
        for site in 0..n {
            let t = if site < k
                || last_coupled.is_none() && site > k
                || last_coupled.is_some_and(|j| site > j)
            {
                DenseTensor::from_raw(vec![1, 2, 2, 1], vec![ONE, ZERO, ZERO, ONE])
            } else if site == k {
                let f1 = check((sc * q[k][k]).exp(), "diagonal factor")?;
                if last_coupled.is_none() {
                    DenseTensor::from_raw(vec![1, 2, 2, 1], vec![ONE, ZERO, ZERO, f1])
                } else {
                    let mut t = DenseTensor::zeros(vec![1, 2, 2, 2]);
                    t.set(&[0, 0, 0, 0], ONE);
                    t.set(&[0, 1, 1, 1], f1);
                    t
                }
            } else {
                let f = check((sc * (2.0 * q[k][site])).exp(), "coupling factor")?;
                let end = Some(site) == last_coupled;
                let mut t = DenseTensor::zeros(vec![2, 2, 2, if end { 1 } else { 2 }]);
                for a in 0..2 {
                    for s in 0..2 {
                        let v = if a == 1 && s == 1 { f } else { ONE };
                        t.set(&[a, s, s, if end { 0 } else { a }], v);
                    }
                }
                t
            };
            sites.push(t);
        }
        layers.push(Mpo::new(sites, format!("qubo-layer-{k}"))?);
    }
    Ok(layers)
}

/// Diagonal Ising form `exp(scale * (sum_i h_i z_i + sum_{i != j} J_ij z_i z_j))` with spins `z = 2 s - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingForm {
    fields: Vec<f64>,
    couplings: Vec<Vec<f64>>,
    scale: C64,
}

impl IsingForm {
    /// The diagonal of `couplings` is ignored (`z_i^2 = 1`).
    pub fn new(fields: Vec<f64>, couplings: Vec<Vec<f64>>, scale: C64) -> Result<Self> {
        let n = fields.len();
        if n == 0 || couplings.len() != n || couplings.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(
                "Ising couplings must be square and match the fields".into(),
            ));
        }
        let amax = couplings
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                if (couplings[i][j] - couplings[j][i]).abs() > 1e-14 * amax.max(1.0) {
                    return Err(Error::Argument(format!(
                        "Ising couplings not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if fields
            .iter()
            .chain(couplings.iter().flatten())
            .any(|x| !x.is_finite())
        {
            return Err(Error::Range("non-finite Ising coefficient".into()));
        }
        let mut couplings = couplings;
        for (i, row) in couplings.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        Ok(Self {
            fields,
            couplings,
            scale,
        })
    }

    pub fn size(&self) -> usize {
        self.fields.len()
    }

    pub fn energy(&self, bits: &[u8]) -> C64 {
        let z: Vec<f64> = bits.iter().map(|&b| 2.0 * b as f64 - 1.0).collect();
        let mut e: f64 = self.fields.iter().zip(&z).map(|(h, z)| h * z).sum();
        for i in 0..z.len() {
            for j in 0..z.len() {
                e += self.couplings[i][j] * z[i] * z[j];
            }
        }
        self.scale * e
    }

    /// Bound on `|log|` of any partial product of layer factors.
    pub fn exponent_range(&self) -> f64 {
        let h: f64 = self.fields.iter().map(|v| v.abs()).sum();
        let j: f64 = self.couplings.iter().flatten().map(|v| v.abs()).sum();
        self.scale.norm() * (h + j)
    }
}

/// Layered MPOs for an Ising exponential: layer `k` applies the field on spin `k`
/// and its couplings to every later spin, with bond dimension 2.
pub fn ising_exponential_layers(form: &IsingForm) -> Result<Vec<Mpo>> {
    let n = form.size();
    let sc = form.scale;
    let z = |s: usize| 2.0 * s as f64 - 1.0;
    let check = |v: C64| -> Result<C64> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Range(
                "Ising layer factor overflows; use more refinement steps".into(),
            ))
        }
    };
    let mut layers = Vec::with_capacity(n);
    for k in 0..n {
        let last = (k + 1..n).rev().find(|&j| form.couplings[k][j] != 0.0);
        let mut sites = Vec::with_capacity(n);
        for site in 0..n {
            let t = if site < k || last.map_or(site > k, |j| site > j) {
                DenseTensor::from_raw(vec![1, 2, 2, 1], vec![ONE, ZERO, ZERO, ONE])
            } else if site == k {
                let f = [
                    check((sc * (form.fields[k] * z(0))).exp())?,
                    check((sc * (form.fields[k] * z(1))).exp())?,
                ];
                let r = if last.is_some() { 2 } else { 1 };
                DenseTensor::from_fn(vec![1, 2, 2, r], |ix| {
                    if ix[1] == ix[2] && (r == 1 || ix[3] == ix[1]) {
                        f[ix[1]]
                    } else {
                        ZERO
                    }
                })
            } else {
                let end = Some(site) == last;
                let jv = form.couplings[k][site];
                let mut g = [[ONE; 2]; 2];
                for (a, row) in g.iter_mut().enumerate() {
                    for (s, v) in row.iter_mut().enumerate() {
                        *v = check((sc * (2.0 * jv * z(a) * z(s))).exp())?;
                    }
                }
                DenseTensor::from_fn(vec![2, 2, 2, if end { 1 } else { 2 }], |ix| {
                    let (a, o, s, r) = (ix[0], ix[1], ix[2], ix[3]);
                    if o != s || (!end && r != a) {
                        ZERO
                    } else {
                        g[a][s]
                    }
                })
            };
            sites.push(t);
        }
        layers.push(Mpo::new(sites, format!("ising-layer-{k}"))?);
    }
    Ok(layers)
}

/// The `n` layers of the quantum Fourier transform; apply in order, then reverse the chain.
///
/// Layer `i` is a Hadamard on qubit `i` followed by controlled phases
/// `exp(sigma 2 pi i s_i s_j / 2^(j - i + 1))` on every later qubit `j`.
pub fn qft_layers(n: usize, sign: FourierSign) -> Result<Vec<Mpo>> {
    if n == 0 {
        return Err(Error::Argument("QFT needs at least one qubit".into()));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sigma = sign.sigma();
    let mut layers = Vec::with_capacity(n);
    for i in 0..n {
        let mut sites = Vec::with_capacity(n);
        for j in 0..n {
            let t = if j < i {
                DenseTensor::from_raw(vec![1, 2, 2, 1], vec![ONE, ZERO, ZERO, ONE])
            } else if j == i {
                let had = |o: usize, s: usize| if o == 1 && s == 1 { c(-h) } else { c(h) };
                if i == n - 1 {
                    DenseTensor::from_fn(vec![1, 2, 2, 1], |ix| had(ix[1], ix[2]))
                } else {
                    // The bond carries the output bit of the Hadamard.
                    DenseTensor::from_fn(vec![1, 2, 2, 2], |ix| {
                        if ix[3] == ix[1] {
                            had(ix[1], ix[2])
                        } else {
                            ZERO
                        }
                    })
                }
            } else {
                let theta = sigma * 2.0 * PI / 2f64.powi((j - i + 1) as i32);
                let phase = C64::from_polar(1.0, theta);
                let end = j == n - 1;
                DenseTensor::from_fn(vec![2, 2, 2, if end { 1 } else { 2 }], |ix| {
                    let (a, o, s, r) = (ix[0], ix[1], ix[2], ix[3]);
                    if o != s || (!end && r != a) {
                        ZERO
                    } else if a == 1 && s == 1 {
                        phase
                    } else {
                        ONE
                    }
                })
            };
            sites.push(t);
        }
        layers.push(Mpo::new(sites, format!("qft-layer-{i}"))?);
    }
    Ok(layers)
}
