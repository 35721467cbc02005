//! Two-site alternating least squares for Hermitian positive-definite systems `A x = b`.
//!
//! With `x` in mixed canonical form around sites `(k, k+1)`, minimizing
//! `<x|A|x> - 2 Re <x|b>` over the two-site tensor is the local system
//! `H theta = f`, solved matrix-free by conjugate gradients.

use super::{true_residual, Solution};
use crate::error::{Error, Result};
use crate::mpo::Mpo;
use crate::mps::Mps;
use crate::tensor::{
    scale_cols, scale_rows, svd_matrix, DenseTensor, Mat, SvdTruncation, C64, ONE, ZERO,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlsOptions {
    pub truncation: SvdTruncation,
    pub max_sweeps: usize,
    /// Target for `||A x - b|| / ||b||`; checked after every sweep.
    pub residual_tolerance: f64,
    /// Relative residual of the local CG solves.
    pub local_tolerance: f64,
    pub local_iterations: usize,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self {
            truncation: SvdTruncation {
                relative_tolerance: 1e-24,
                max_rank: Some(128),
            },
            max_sweeps: 8,
            residual_tolerance: 1e-11,
            local_tolerance: 1e-13,
            local_iterations: 200,
        }
    }
}

/// Operator environment `E[a', w, a]` stored flat.
#[derive(Clone)]
struct OpEnv {
    w: usize,
    ket: usize,
    data: Vec<C64>,
}

impl OpEnv {
    fn unit() -> Self {
        Self {
            w: 1,
            ket: 1,
            data: vec![ONE],
        }
    }

    fn at(&self, a: usize, w: usize, b: usize) -> C64 {
        self.data[(a * self.w + w) * self.ket + b]
    }
}

/// Overlap environment `E[a', beta]` between `x` (bra) and `b` (ket).
#[derive(Clone)]
struct VecEnv {
    bra: usize,
    ket: usize,
    data: Vec<C64>,
}

impl VecEnv {
    fn unit() -> Self {
        Self {
            bra: 1,
            ket: 1,
            data: vec![ONE],
        }
    }
}

fn dims3(t: &DenseTensor) -> (usize, usize) {
    (t.shape()[0], t.shape()[2])
}

fn dims4(t: &DenseTensor) -> (usize, usize) {
    (t.shape()[0], t.shape()[3])
}

/// `L'[a', w', a] = sum conj(X[b', s', a']) L[b', w, b] W[w, s', s, w'] X[b, s, a]`.
fn grow_op_left(env: &OpEnv, x: &DenseTensor, w: &DenseTensor) -> OpEnv {
    let (xl, xr) = dims3(x);
    let (wl, wr) = dims4(w);
    let (xd, wd) = (x.data(), w.data());
    // t1[b', w, s, a] = sum_b L[b', w, b] X[b, s, a]
    let mut t1 = vec![ZERO; xl * wl * 2 * xr];
    for bp in 0..xl {
        for wi in 0..wl {
            for b in 0..xl {
                let e = env.at(bp, wi, b);
                if e == ZERO {
                    continue;
                }
                for s in 0..2 {
                    for a in 0..xr {
                        t1[((bp * wl + wi) * 2 + s) * xr + a] += e * xd[(b * 2 + s) * xr + a];
                    }
                }
            }
        }
    }
    // t2[b', s', w', a] = sum_{w, s} t1[b', w, s, a] W[w, s', s, w']
    let mut t2 = vec![ZERO; xl * 2 * wr * xr];
    for bp in 0..xl {
        for wi in 0..wl {
            for sp in 0..2 {
                for s in 0..2 {
                    for wo in 0..wr {
                        let c = wd[((wi * 2 + sp) * 2 + s) * wr + wo];
                        if c == ZERO {
                            continue;
                        }
                        let src = ((bp * wl + wi) * 2 + s) * xr;
                        let dst = ((bp * 2 + sp) * wr + wo) * xr;
                        for a in 0..xr {
                            t2[dst + a] += c * t1[src + a];
                        }
                    }
                }
            }
        }
    }
    let mut out = vec![ZERO; xr * wr * xr];
    for bp in 0..xl {
        for sp in 0..2 {
            for ap in 0..xr {
                let c = xd[(bp * 2 + sp) * xr + ap].conj();
                if c == ZERO {
                    continue;
                }
                for wo in 0..wr {
                    let src = ((bp * 2 + sp) * wr + wo) * xr;
                    let dst = (ap * wr + wo) * xr;
                    for a in 0..xr {
                        out[dst + a] += c * t2[src + a];
                    }
                }
            }
        }
    }
    OpEnv {
        w: wr,
        ket: xr,
        data: out,
    }
}

/// `R'[b', w, b] = sum conj(X[b', s', a']) W[w, s', s, w'] X[b, s, a] R[a', w', a]`.
fn grow_op_right(env: &OpEnv, x: &DenseTensor, w: &DenseTensor) -> OpEnv {
    let (xl, xr) = dims3(x);
    let (wl, wr) = dims4(w);
    let (xd, wd) = (x.data(), w.data());
    // t1[a', w', b, s] = sum_a R[a', w', a] X[b, s, a]
    let mut t1 = vec![ZERO; xr * wr * xl * 2];
    for ap in 0..xr {
        for wo in 0..wr {
            for a in 0..xr {
                let e = env.at(ap, wo, a);
                if e == ZERO {
                    continue;
                }
                for b in 0..xl {
                    for s in 0..2 {
                        t1[((ap * wr + wo) * xl + b) * 2 + s] += e * xd[(b * 2 + s) * xr + a];
                    }
                }
            }
        }
    }
    // t2[a', s', w, b] = sum_{w', s} W[w, s', s, w'] t1[a', w', b, s]
    let mut t2 = vec![ZERO; xr * 2 * wl * xl];
    for ap in 0..xr {
        for wi in 0..wl {
            for sp in 0..2 {
                for s in 0..2 {
                    for wo in 0..wr {
                        let c = wd[((wi * 2 + sp) * 2 + s) * wr + wo];
                        if c == ZERO {
                            continue;
                        }
                        for b in 0..xl {
                            t2[((ap * 2 + sp) * wl + wi) * xl + b] +=
                                c * t1[((ap * wr + wo) * xl + b) * 2 + s];
                        }
                    }
                }
            }
        }
    }
    let mut out = vec![ZERO; xl * wl * xl];
    for bp in 0..xl {
        for sp in 0..2 {
            for ap in 0..xr {
                let c = xd[(bp * 2 + sp) * xr + ap].conj();
                if c == ZERO {
                    continue;
                }
                for wi in 0..wl {
                    let src = ((ap * 2 + sp) * wl + wi) * xl;
                    let dst = (bp * wl + wi) * xl;
                    for b in 0..xl {
                        out[dst + b] += c * t2[src + b];
                    }
                }
            }
        }
    }
    OpEnv {
        w: wl,
        ket: xl,
        data: out,
    }
}

/// `L'[a', g] = sum conj(X[b', s, a']) L[b', beta] B[beta, s, g]`.
fn grow_vec_left(env: &VecEnv, x: &DenseTensor, b: &DenseTensor) -> VecEnv {
    let (xl, xr) = dims3(x);
    let (bl, br) = dims3(b);
    let (xd, bd) = (x.data(), b.data());
    let mut t = vec![ZERO; xl * 2 * br];
    for bp in 0..xl {
        for be in 0..bl {
            let e = env.data[bp * env.ket + be];
            for s in 0..2 {
                for g in 0..br {
                    t[(bp * 2 + s) * br + g] += e * bd[(be * 2 + s) * br + g];
                }
            }
        }
    }
    let mut out = vec![ZERO; xr * br];
    for bp in 0..xl {
        for s in 0..2 {
            for ap in 0..xr {
                let c = xd[(bp * 2 + s) * xr + ap].conj();
                for g in 0..br {
                    out[ap * br + g] += c * t[(bp * 2 + s) * br + g];
                }
            }
        }
    }
    VecEnv {
        bra: xr,
        ket: br,
        data: out,
    }
}

/// `R'[b', beta] = sum conj(X[b', s, a']) B[beta, s, g] R[a', g]`.
fn grow_vec_right(env: &VecEnv, x: &DenseTensor, b: &DenseTensor) -> VecEnv {
    let (xl, xr) = dims3(x);
    let (bl, br) = dims3(b);
    let (xd, bd) = (x.data(), b.data());
    let mut t = vec![ZERO; xr * bl * 2];
    for ap in 0..xr {
        for g in 0..br {
            let e = env.data[ap * env.ket + g];
            for be in 0..bl {
                for s in 0..2 {
                    t[(ap * bl + be) * 2 + s] += e * bd[(be * 2 + s) * br + g];
                }
            }
        }
    }
    let mut out = vec![ZERO; xl * bl];
    for bp in 0..xl {
        for s in 0..2 {
            for ap in 0..xr {
                let c = xd[(bp * 2 + s) * xr + ap].conj();
                for be in 0..bl {
                    out[bp * bl + be] += c * t[(ap * bl + be) * 2 + s];
                }
            }
        }
    }
    VecEnv {
        bra: xl,
        ket: bl,
        data: out,
    }
}

/// Effective two-site operator `L W1 W2 R`.
struct Local<'a> {
    left: &'a OpEnv,
    right: &'a OpEnv,
    w1: &'a DenseTensor,
    w2: &'a DenseTensor,
}

impl Local<'_> {
    /// `y[l', s1', s2', r'] = sum L[l', w0, l] W1[w0, s1', s1, w1] W2[w1, s2', s2, w2] R[r', w2, r] x[l, s1, s2, r]`.
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let (l, r) = (self.left.ket, self.right.ket);
        let (w0n, w1n, w2n) = (self.left.w, self.w1.shape()[3], self.right.w);
        let (w1d, w2d) = (self.w1.data(), self.w2.data());
        let q = 4 * r;
        // t1[l', w0, (s1 s2 r)]
        let mut t1 = vec![ZERO; l * w0n * q];
        for lp in 0..l {
            for w0 in 0..w0n {
                for li in 0..l {
                    let e = self.left.at(lp, w0, li);
                    if e == ZERO {
                        continue;
                    }
                    let dst = (lp * w0n + w0) * q;
                    let src = li * q;
                    for j in 0..q {
                        t1[dst + j] += e * x[src + j];
                    }
                }
            }
        }
        // t2[l', s1', w1, s2, r]
        let q2 = 2 * r;
        let mut t2 = vec![ZERO; l * 2 * w1n * q2];
        for lp in 0..l {
            for w0 in 0..w0n {
                for s1p in 0..2 {
                    for s1 in 0..2 {
                        for w1 in 0..w1n {
                            let c = w1d[((w0 * 2 + s1p) * 2 + s1) * w1n + w1];
                            if c == ZERO {
                                continue;
                            }
                            let src = (lp * w0n + w0) * q + s1 * q2;
                            let dst = ((lp * 2 + s1p) * w1n + w1) * q2;
                            for j in 0..q2 {
                                t2[dst + j] += c * t1[src + j];
                            }
                        }
                    }
                }
            }
        }
        // t3[l', s1', s2', w2, r]
        let mut t3 = vec![ZERO; l * 2 * 2 * w2n * r];
        for ls in 0..l * 2 {
            for w1 in 0..w1n {
                for s2p in 0..2 {
                    for s2 in 0..2 {
                        for w2 in 0..w2n {
                            let c = w2d[((w1 * 2 + s2p) * 2 + s2) * w2n + w2];
                            if c == ZERO {
                                continue;
                            }
                            let src = (ls * w1n + w1) * q2 + s2 * r;
                            let dst = ((ls * 2 + s2p) * w2n + w2) * r;
                            for j in 0..r {
                                t3[dst + j] += c * t2[src + j];
                            }
                        }
                    }
                }
            }
        }
        let mut y = vec![ZERO; l * 4 * r];
        for lss in 0..l * 4 {
            for rp in 0..r {
                let mut acc = ZERO;
                for w2 in 0..w2n {
                    let src = (lss * w2n + w2) * r;
                    for ri in 0..r {
                        acc += self.right.at(rp, w2, ri) * t3[src + ri];
                    }
                }
                y[lss * r + rp] = acc;
            }
        }
        y
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Local CG from `x`; returns the solution and the number of iterations.
fn local_cg(
    op: &Local<'_>,
    f: &[C64],
    mut x: Vec<C64>,
    tol: f64,
    max_it: usize,
) -> (Vec<C64>, usize) {
    let fnorm = norm2(f).sqrt();
    if fnorm == 0.0 {
        return (vec![ZERO; f.len()], 0);
    }
    let ax = op.apply(&x);
    let mut r: Vec<C64> = f.iter().zip(&ax).map(|(a, b)| a - b).collect();
    let mut p = r.clone();
    let mut rr = norm2(&r);
    let mut it = 0;
    while it < max_it && rr.sqrt() > tol * fnorm {
        let ap = op.apply(&p);
        let curv = dot(&p, &ap).re;
        if !(curv > 0.0) {
            break;
        }
        let alpha = rr / curv;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = norm2(&r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
        it += 1;
    }
    (x, it)
}

/// Local right-hand side `f[l', s1, s2, r'] = sum Lb[l', beta] B1[beta, s1, g] B2[g, s2, d] Rb[r', d]`.
fn local_rhs(lb: &VecEnv, rb: &VecEnv, b1: &DenseTensor, b2: &DenseTensor) -> Vec<C64> {
    let (l, r) = (lb.bra, rb.bra);
    let (bl, bm) = dims3(b1);
    let br = b2.shape()[2];
    let (b1d, b2d) = (b1.data(), b2.data());
    // t[l', s1, g]
    let mut t = vec![ZERO; l * 2 * bm];
    for lp in 0..l {
        for be in 0..bl {
            let e = lb.data[lp * lb.ket + be];
            for s in 0..2 {
                for g in 0..bm {
                    t[(lp * 2 + s) * bm + g] += e * b1d[(be * 2 + s) * bm + g];
                }
            }
        }
    }
    // u[l', s1, s2, d]
    let mut u = vec![ZERO; l * 4 * br];
    for ls in 0..l * 2 {
        for g in 0..bm {
            let e = t[ls * bm + g];
            for s2 in 0..2 {
                for d in 0..br {
                    u[(ls * 2 + s2) * br + d] += e * b2d[(g * 2 + s2) * br + d];
                }
            }
        }
    }
    let mut f = vec![ZERO; l * 4 * r];
    for lss in 0..l * 4 {
        for rp in 0..r {
            let mut acc = ZERO;
            for d in 0..br {
                acc += rb.data[rp * rb.ket + d] * u[lss * br + d];
            }
            f[lss * r + rp] = acc;
        }
    }
    f
}

/// Solve `A x = b` for Hermitian positive-definite `A` by two-site sweeps from `x0`.
pub fn als_solve(a: &Mpo, b: &Mps, x0: Option<&Mps>, opts: &AlsOptions) -> Result<Solution> {
    let n = b.len();
    if a.len() != n {
        return Err(Error::Shape(format!(
            "operator on {} qubits, right-hand side on {n}",
            a.len()
        )));
    }
    let zero_solution = || Solution {
        state: Mps::zero(n),
        residual: 0.0,
        iterations: 0,
        converged: true,
        residual_history: vec![],
        used_normal_equations: false,
    };
    if b.is_zero() {
        return Ok(zero_solution());
    }
    let b_norm = b.norm();
    if n == 1 {
        return Err(Error::Argument(
            "two-site sweeps need at least two qubits".into(),
        ));
    }
    // Work with b scaled to unit prefactor; the solution carries b's prefactor at the end.
    let lb = b.log_prefactor();
    let bs = b.clone().with_log_prefactor(0.0);
    let mut x = match x0 {
        Some(g) if g.len() == n && !g.is_zero() => g.clone(),
        _ => bs.clone(),
    };
    x.canonicalize(0);
    let lx = x.log_prefactor();
    let mut xs: Vec<DenseTensor> = x.sites().to_vec();
    xs[0] = xs[0].scale(C64::new((lx - lb).exp(), 0.0));
    let ws = a.sites();
    let bsites = bs.sites();

    let mut lop = vec![OpEnv::unit(); n + 1];
    let mut rop = vec![OpEnv::unit(); n + 1];
    let mut lvec = vec![VecEnv::unit(); n + 1];
    let mut rvec = vec![VecEnv::unit(); n + 1];
    for k in (2..n).rev() {
        rop[k] = grow_op_right(&rop[k + 1], &xs[k], &ws[k]);
        rvec[k] = grow_vec_right(&rvec[k + 1], &xs[k], &bsites[k]);
    }

    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    let solve_pair = |k: usize,
                      xs: &mut Vec<DenseTensor>,
                      lop: &[OpEnv],
                      rop: &[OpEnv],
                      lvec: &[VecEnv],
                      rvec: &[VecEnv],
                      right: bool|
     -> Result<()> {
        let (l, r) = (xs[k].shape()[0], xs[k + 1].shape()[2]);
        let op = Local {
            left: &lop[k],
            right: &rop[k + 2],
            w1: &ws[k],
            w2: &ws[k + 1],
        };
        let f = local_rhs(&lvec[k], &rvec[k + 2], &bsites[k], &bsites[k + 1]);
        let m = xs[k].shape()[2];
        // Current two-site tensor as the starting point.
        let mut th = vec![ZERO; l * 4 * r];
        let (d1, d2) = (xs[k].data(), xs[k + 1].data());
        for a in 0..l {
            for s1 in 0..2 {
                for g in 0..m {
                    let c = d1[(a * 2 + s1) * m + g];
                    if c == ZERO {
                        continue;
                    }
                    for s2 in 0..2 {
                        for bb in 0..r {
                            th[((a * 2 + s1) * 2 + s2) * r + bb] += c * d2[(g * 2 + s2) * r + bb];
                        }
                    }
                }
            }
        }
        let (th, _) = local_cg(&op, &f, th, opts.local_tolerance, opts.local_iterations);
        let mat = Mat::from_fn(l * 2, 2 * r, |i, j| th[i * 2 * r + j]);
        let svd = svd_matrix(&mat, &opts.truncation)?;
        let d = svd.s.len();
        let (mut u, mut vt) = (svd.u, svd.vt);
        if right {
            scale_rows(&mut vt, &svd.s);
        } else {
            scale_cols(&mut u, &svd.s);
        }
        xs[k] = DenseTensor::from_matrix(&u, vec![l, 2, d])?;
        xs[k + 1] = DenseTensor::from_matrix(&vt, vec![d, 2, r])?;
        Ok(())
    };
    while sweeps < opts.max_sweeps {
        for k in 0..n - 1 {
            solve_pair(k, &mut xs, &lop, &rop, &lvec, &rvec, true)?;
            if k + 1 < n - 1 {
                lop[k + 1] = grow_op_left(&lop[k], &xs[k], &ws[k]);
                lvec[k + 1] = grow_vec_left(&lvec[k], &xs[k], &bsites[k]);
            }
        }
        for k in (0..n - 1).rev() {
            solve_pair(k, &mut xs, &lop, &rop, &lvec, &rvec, false)?;
            if k > 0 {
                rop[k + 1] = grow_op_right(&rop[k + 2], &xs[k + 1], &ws[k + 1]);
                rvec[k + 1] = grow_vec_right(&rvec[k + 2], &xs[k + 1], &bsites[k + 1]);
            }
        }
        sweeps += 1;
        let cur = Mps::from_parts(xs.clone(), lb, Some(0));
        residual = true_residual(a, &cur, b, b_norm)?;
        history.push(residual);
        if residual <= opts.residual_tolerance {
            break;
        }
        // Stop once a sweep no longer helps.
        if history.len() >= 2 && residual > 0.5 * history[history.len() - 2] {
            break;
        }
    }
    let mut state = Mps::from_parts(xs, lb, Some(0));
    state.canonicalize(0);
    Ok(Solution {
        state,
        residual,
        iterations: sweeps,
        converged: residual <= opts.residual_tolerance,
        residual_history: history,
        used_normal_equations: false,
    })
}
