//! Dense complex tensors, pairwise contraction and truncated SVD.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Column-major dense matrix used by the factorization routines.
pub type Mat = faer::Mat<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense tensor of complex doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if shape.contains(&0) {
            return Err(Error::Shape(format!("zero-length axis in shape {shape:?}")));
        }
        if expected != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} entries, got {}",
                data.len()
            )));
        }
        if let Some(i) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Domain(format!("non-finite entry at flat index {i}")));
        }
        Ok(Self { shape, data })
    }

    /// Construction without validation, for internal use where the invariants hold by design.
    pub(crate) fn from_raw(shape: Vec<usize>, data: Vec<C64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![ZERO; n],
        }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let n: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self { shape, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(vec![n, n], |ix| if ix[0] == ix[1] { ONE } else { ZERO })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[cfg(test)]
    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    fn strides(&self) -> Vec<usize> {
        let mut st = vec![1usize; self.shape.len()];
        for ax in (0..self.shape.len().saturating_sub(1)).rev() {
            st[ax] = st[ax + 1] * self.shape[ax + 1];
        }
        st
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: C64) {
        let i = self.flat(idx);
        self.data[i] = v;
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() || shape.contains(&0) {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(Self {
            shape,
            data: self.data.clone(),
        })
    }

    /// Axis permutation: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r
            || perm
                .iter()
                .any(|&p| p >= r || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Argument(format!(
                "{perm:?} is not a permutation of {r} axes"
            )));
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let in_strides = self.strides();
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let n = self.data.len();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; r];
        let mut off = 0usize;
        for _ in 0..n {
            data.push(self.data[off]);
            for ax in (0..r).rev() {
                idx[ax] += 1;
                off += src_strides[ax];
                if idx[ax] < shape[ax] {
                    break;
                }
                off -= src_strides[ax] * shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Self { shape, data })
    }

    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Entrywise `self + c * other`.
    pub fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    /// View as a matrix whose rows are the first `row_axes` axes.
    pub fn to_matrix(&self, row_axes: usize) -> Mat {
        let rows: usize = self.shape[..row_axes].iter().product();
        let cols: usize = self.shape[row_axes..].iter().product();
        mat_from_rows(rows, cols, &self.data)
    }

    pub fn from_matrix(m: &Mat, shape: Vec<usize>) -> Result<Self> {
        if shape.iter().product::<usize>() != m.nrows() * m.ncols() {
            return Err(Error::Shape(format!(
                "{}x{} matrix cannot fill shape {shape:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self {
            shape,
            data: mat_to_rows(m),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn mat_from_rows(rows: usize, cols: usize, data: &[C64]) -> Mat {
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

pub(crate) fn mat_to_rows(m: &Mat) -> Vec<C64> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub(crate) fn frobenius(m: &Mat) -> f64 {
    m.norm_l2()
}

pub(crate) fn scale_rows(m: &mut Mat, f: &[f64]) {
    for j in 0..m.ncols() {
        for (i, &fi) in f.iter().enumerate() {
            m[(i, j)] *= fi;
        }
    }
}

pub(crate) fn scale_cols(m: &mut Mat, f: &[f64]) {
    for (j, &fj) in f.iter().enumerate() {
        for i in 0..m.nrows() {
            m[(i, j)] *= fj;
        }
    }
}

pub(crate) fn scale_mat(m: &mut Mat, c: C64) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= c;
        }
    }
}

pub(crate) fn adjoint(m: &Mat) -> Mat {
    m.adjoint().to_owned()
}

/// Contract axes `a_axes` of `a` with axes `b_axes` of `b`.
///
/// The result carries the free axes of `a` (in order) followed by the free axes of `b`.
pub fn contract(
    a: &DenseTensor,
    a_axes: &[usize],
    b: &DenseTensor,
    b_axes: &[usize],
) -> Result<DenseTensor> {
    if a_axes.len() != b_axes.len() {
        return Err(Error::Dimension(format!(
            "{} axes paired with {} axes",
            a_axes.len(),
            b_axes.len()
        )));
    }
    for (&i, &j) in a_axes.iter().zip(b_axes) {
        if i >= a.rank() || j >= b.rank() {
            return Err(Error::Dimension(format!(
                "axis pair ({i}, {j}) out of range"
            )));
        }
        if a.shape[i] != b.shape[j] {
            return Err(Error::Dimension(format!(
                "axis {i} of length {} paired with axis {j} of length {}",
                a.shape[i], b.shape[j]
            )));
        }
    }
    let a_free: Vec<usize> = (0..a.rank()).filter(|x| !a_axes.contains(x)).collect();
    let b_free: Vec<usize> = (0..b.rank()).filter(|x| !b_axes.contains(x)).collect();
    if a_free.len() + a_axes.len() != a.rank() || b_free.len() + b_axes.len() != b.rank() {
        return Err(Error::Argument("repeated contraction axis".into()));
    }

    let pa: Vec<usize> = a_free.iter().chain(a_axes).copied().collect();
    let pb: Vec<usize> = b_axes.iter().chain(&b_free).copied().collect();
    let at = a.permute(&pa)?;
    let bt = b.permute(&pb)?;

    let m: usize = a_free.iter().map(|&x| a.shape[x]).product();
    let k: usize = a_axes.iter().map(|&x| a.shape[x]).product();
    let n: usize = b_free.iter().map(|&x| b.shape[x]).product();

    let am = mat_from_rows(m, k, &at.data);
    let bm = mat_from_rows(k, n, &bt.data);
    let c = &am * &bm;

    let mut shape: Vec<usize> = a_free.iter().map(|&x| a.shape[x]).collect();
    shape.extend(b_free.iter().map(|&x| b.shape[x]));
    Ok(DenseTensor {
        shape,
        data: mat_to_rows(&c),
    })
}

/// Truncation policy for singular value decompositions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvdTruncation {
    /// Maximum discarded squared weight, relative to the total.
    pub relative_tolerance: f64,
    pub max_rank: Option<usize>,
}

impl SvdTruncation {
    pub fn new(relative_tolerance: f64, max_rank: Option<usize>) -> Result<Self> {
        if !(0.0..1.0).contains(&relative_tolerance) {
            return Err(Error::Argument(format!(
                "relative tolerance {relative_tolerance} outside [0, 1)"
            )));
        }
        if max_rank == Some(0) {
            return Err(Error::Argument("max_rank must be positive".into()));
        }
        Ok(Self {
            relative_tolerance,
            max_rank,
        })
    }

    /// Keep everything except exact zeros.
    pub fn exact() -> Self {
        Self {
            relative_tolerance: 0.0,
            max_rank: None,
        }
    }

    pub fn with_tolerance(relative_tolerance: f64) -> Self {
        Self::new(relative_tolerance, None).expect("tolerance in [0, 1)")
    }

    /// Number of singular values to keep and the resulting discarded relative weight.
    pub fn select(&self, s: &[f64]) -> (usize, f64) {
        if s.is_empty() {
            return (0, 0.0);
        }
        let total: f64 = s.iter().map(|x| x * x).sum();
        if total == 0.0 {
            return (1, 0.0);
        }
        let budget = self.relative_tolerance * total;
        // tail[i] = sum of s_j^2 for j >= i
        let mut tail = vec![0.0; s.len() + 1];
        for i in (0..s.len()).rev() {
            tail[i] = tail[i + 1] + s[i] * s[i];
        }
        let mut r = (1..=s.len())
            .find(|&r| tail[r] <= budget)
            .unwrap_or(s.len());
        let tie = 1e-12 * s[0];
        while r < s.len() && (s[r - 1] - s[r]).abs() <= tie && s[r] > 0.0 {
            r += 1;
        }
        if let Some(cap) = self.max_rank {
            r = r.min(cap);
        }
        let r = r.max(1);
        (r, tail[r] / total)
    }
}

impl Default for SvdTruncation {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            max_rank: None,
        }
    }
}

/// Output of [`truncated_svd`].
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseTensor,
    pub singular_values: Vec<f64>,
    pub vt: DenseTensor,
    pub discarded_weight: f64,
}

pub(crate) struct MatSvd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub vt: Mat,
    pub discarded: f64,
}

pub(crate) fn svd_matrix(m: &Mat, trunc: &SvdTruncation) -> Result<MatSvd> {
    if !m.is_all_finite() {
        return Err(Error::Numerical(format!(
            "non-finite entries in {}x{} matrix passed to SVD",
            m.nrows(),
            m.ncols()
        )));
    }
    // Strongly rectangular inputs are first reduced to their square triangular factor.
    let (rows, cols) = m.shape();
    if cols > 2 * rows && rows > 0 {
        let (l, q) = lq_matrix(m.clone());
        let inner = svd_matrix(&l, trunc)?;
        return Ok(MatSvd {
            vt: inner.vt * q,
            ..inner
        });
    }
    if rows > 2 * cols && cols > 0 {
        let (q, r) = qr_matrix(m.clone());
        let inner = svd_matrix(&r, trunc)?;
        return Ok(MatSvd {
            u: q * inner.u,
            ..inner
        });
    }
    let svd = m.thin_svd().map_err(|e| {
        Error::Numerical(format!(
            "SVD did not converge for {rows}x{cols} matrix with Frobenius norm {:.3e}: {e:?}",
            frobenius(m)
        ))
    })?;
    let raw: Vec<f64> = (0..svd.S().dim()).map(|i| svd.S()[i].re.max(0.0)).collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let s: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let (r, discarded) = trunc.select(&s);
    let (uf, vf) = (svd.U(), svd.V());
    let u = Mat::from_fn(rows, r, |i, j| uf[(i, order[j])]);
    let vt = Mat::from_fn(r, cols, |i, j| vf[(j, order[i])].conj());
    Ok(MatSvd {
        u,
        s: s[..r].to_vec(),
        vt,
        discarded,
    })
}

/// Thin QR decomposition `m = q r` with `q` having orthonormal columns.
pub(crate) fn qr_matrix(m: Mat) -> (Mat, Mat) {
    let qr = m.qr();
    (qr.compute_thin_Q(), qr.thin_R().to_owned())
}

/// Thin LQ decomposition `m = l q` with `q` having orthonormal rows.
pub(crate) fn lq_matrix(m: Mat) -> (Mat, Mat) {
    let (q, r) = qr_matrix(adjoint(&m));
    (adjoint(&r), adjoint(&q))
}

/// Truncated singular value decomposition of a rank-2 tensor.
pub fn truncated_svd(matrix: &DenseTensor, trunc: &SvdTruncation) -> Result<Svd> {
    if matrix.rank() != 2 {
        return Err(Error::Shape(format!(
            "SVD needs a matrix, got shape {:?}",
            matrix.shape
        )));
    }
    let m = matrix.to_matrix(1);
    let MatSvd {
        u,
        s,
        vt,
        discarded,
    } = svd_matrix(&m, trunc)?;
    let r = s.len();
    Ok(Svd {
        u: DenseTensor::from_matrix(&u, vec![matrix.shape[0], r])?,
        singular_values: s,
        vt: DenseTensor::from_matrix(&vt, vec![r, matrix.shape[1]])?,
        discarded_weight: discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: Vec<usize>, rng: &mut impl Rng) -> DenseTensor {
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        DenseTensor::new(shape, data).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(DenseTensor::new(vec![2, 2], vec![ONE; 3]).is_err());
        assert!(DenseTensor::new(vec![1], vec![C64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn identity_contraction() {
        let v = DenseTensor::new(vec![2], vec![C64::new(0.3, -1.0), C64::new(2.0, 0.5)]).unwrap();
        let out = contract(&DenseTensor::identity(2), &[1], &v, &[0]).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn row_vector_picks_first_row() {
        let e0 = DenseTensor::new(vec![2], vec![ONE, ZERO]).unwrap();
        let m = DenseTensor::new(
            vec![2, 2],
            (1..=4).map(|k| C64::new(k as f64, 0.0)).collect(),
        )
        .unwrap();
        let out = contract(&e0, &[0], &m, &[0]).unwrap();
        assert_eq!(out.data(), &[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
    }

    #[test]
    fn matches_loop_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(vec![2, 3, 4], &mut rng);
        let b = random(vec![4, 5], &mut rng);
        let c = contract(&a, &[2], &b, &[0]).unwrap();
        assert_eq!(c.shape(), &[2, 3, 5]);
        for i in 0..2 {
            for j in 0..3 {
                for l in 0..5 {
                    let mut acc = ZERO;
                    for k in 0..4 {
                        acc += a.get(&[i, j, k]) * b.get(&[k, l]);
                    }
                    assert!((acc - c.get(&[i, j, l])).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn multi_axis_contraction_matches_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random(vec![3, 2, 4], &mut rng);
        let b = random(vec![4, 5, 3], &mut rng);
        let c = contract(&a, &[0, 2], &b, &[2, 0]).unwrap();
        assert_eq!(c.shape(), &[2, 5]);
        for j in 0..2 {
            for l in 0..5 {
                let mut acc = ZERO;
                for i in 0..3 {
                    for k in 0..4 {
                        acc += a.get(&[i, j, k]) * b.get(&[k, l, i]);
                    }
                }
                assert!((acc - c.get(&[j, l])).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn mismatched_axes_error() {
        let a = DenseTensor::zeros(vec![2, 3]);
        let b = DenseTensor::zeros(vec![2, 3]);
        assert!(matches!(
            contract(&a, &[1], &b, &[0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn permute_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(vec![2, 3, 4, 5], &mut rng);
        let p = a.permute(&[2, 0, 3, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 5, 3]);
        assert_eq!(p.get(&[3, 1, 4, 2]), a.get(&[1, 2, 3, 4]));
        let back = p.permute(&[1, 3, 0, 2]).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn svd_identity() {
        let svd = truncated_svd(&DenseTensor::identity(2), &SvdTruncation::exact()).unwrap();
        assert!((svd.singular_values[0] - 1.0).abs() < 1e-15);
        assert!((svd.singular_values[1] - 1.0).abs() < 1e-15);
        assert_eq!(svd.discarded_weight, 0.0);
    }

    #[test]
    fn svd_rank_one() {
        let u = [C64::new(1.0, 1.0), C64::new(-2.0, 0.0), C64::new(0.0, 0.5)];
        let v = [C64::new(0.5, 0.0), C64::new(0.0, -3.0)];
        let m = DenseTensor::from_fn(vec![3, 2], |ix| u[ix[0]] * v[ix[1]].conj());
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let svd = truncated_svd(&m, &SvdTruncation::with_tolerance(1e-3)).unwrap();
        assert_eq!(svd.singular_values.len(), 1);
        let d = (svd.singular_values[0] - nu * nv).abs();
        assert!(
            d < 1e-13 * nu * nv,
            "{d} {:?} {}",
            svd.singular_values,
            nu * nv
        );
    }

    #[test]
    fn svd_forced_truncation() {
        let m = DenseTensor::new(vec![2, 2], vec![ONE, ZERO, ZERO, C64::new(1e-16, 0.0)]).unwrap();
        let svd = truncated_svd(&m, &SvdTruncation::with_tolerance(1e-12)).unwrap();
        assert_eq!(svd.singular_values.len(), 1);
        assert!((svd.discarded_weight - 1e-32).abs() < 1e-40);
    }

    #[test]
    fn ties_at_cut_are_kept() {
        let t = SvdTruncation::new(0.3, None).unwrap();
        let (r, w) = t.select(&[1.0, 0.5, 0.5]);
        assert_eq!(r, 3);
        assert_eq!(w, 0.0);
        let capped = SvdTruncation::new(0.3, Some(2)).unwrap();
        assert_eq!(capped.select(&[1.0, 0.5, 0.5]).0, 2);
    }

    #[test]
    fn truncation_validation() {
        assert!(SvdTruncation::new(1.0, None).is_err());
        assert!(SvdTruncation::new(-0.1, None).is_err());
        assert!(SvdTruncation::new(0.1, Some(0)).is_err());
    }

    fn reconstruct(svd: &Svd) -> DenseTensor {
        let r = svd.singular_values.len();
        let mut us = svd.u.clone();
        let cols = us.shape()[1];
        for (i, z) in us.data_mut().iter_mut().enumerate() {
            *z *= svd.singular_values[i % cols];
        }
        debug_assert_eq!(cols, r);
        contract(&us, &[1], &svd.vt, &[0]).unwrap()
    }

    proptest! {
        #[test]
        fn svd_error_bounded_by_tolerance(rows in 1usize..9, cols in 1usize..9, tol in 0.0f64..0.5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random(vec![rows, cols], &mut rng);
            let svd = truncated_svd(&m, &SvdTruncation::new(tol, None).unwrap()).unwrap();
            let rec = reconstruct(&svd);
            let err = rec.axpy(-ONE, &m).unwrap().norm_sqr() / m.norm_sqr();
            prop_assert!(err <= tol + 1e-14);
            prop_assert!(svd.discarded_weight <= tol);
            prop_assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(svd.singular_values.iter().all(|&s| s >= 0.0));

            let u = svd.u.to_matrix(1);
            let vt = svd.vt.to_matrix(1);
            let r = svd.singular_values.len();
            let uu = adjoint(&u) * &u;
            let vv = &vt * adjoint(&vt);
            for i in 0..r {
                for j in 0..r {
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((uu[(i, j)] - e).norm() < 1e-12);
                    prop_assert!((vv[(i, j)] - e).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn contraction_is_bilinear(seed in any::<u64>(), ar in -2.0f64..2.0, ai in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a1 = random(vec![3, 2, 4], &mut rng);
            let a2 = random(vec![3, 2, 4], &mut rng);
            let b = random(vec![4, 3], &mut rng);
            let alpha = C64::new(ar, ai);
            let beta = C64::new(0.7, -0.2);
            let lhs = contract(&a1.scale(alpha).axpy(beta, &a2).unwrap(), &[2, 0], &b, &[0, 1]).unwrap();
            let rhs = contract(&a1, &[2, 0], &b, &[0, 1]).unwrap().scale(alpha)
                .axpy(beta, &contract(&a2, &[2, 0], &b, &[0, 1]).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        }
    }
}
