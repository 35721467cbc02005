//! Variational simplification of MPS, linear combinations, and CG solves.
//!
//! The fitting engine approximates a target `sum_i c_i |p_i>` by an MPS with
//! smaller bonds using two-site sweeps: with the rest of the chain in
//! canonical form, the optimal two-site tensor is the projection of the
//! target, which is then split and truncated by SVD.

mod als;

pub use als::{als_solve, AlsOptions};

use crate::error::{Error, Result};
use crate::mpo::Mpo;
use crate::mps::{site_matrix, Mps};
use crate::tensor::{
    adjoint, scale_cols, scale_rows, svd_matrix, DenseTensor, Mat, SvdTruncation, C64, ONE, ZERO,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplifyOptions {
    pub truncation: SvdTruncation,
    pub max_sweeps: usize,
    /// Stop when the squared distance changes by less than this fraction of the target's squared norm.
    pub convergence_tolerance: f64,
}

impl Default for SimplifyOptions {
    fn default() -> Self {
        Self {
            truncation: SvdTruncation::default(),
            max_sweeps: 4,
            convergence_tolerance: 1e-12,
        }
    }
}

impl SimplifyOptions {
    pub fn new(
        truncation: SvdTruncation,
        max_sweeps: usize,
        convergence_tolerance: f64,
    ) -> Result<Self> {
        if max_sweeps == 0 {
            return Err(Error::Argument("max_sweeps must be at least 1".into()));
        }
        if !(convergence_tolerance >= 0.0) {
            return Err(Error::Argument(
                "convergence tolerance must be nonnegative".into(),
            ));
        }
        Ok(Self {
            truncation,
            max_sweeps,
            convergence_tolerance,
        })
    }

    pub fn with_truncation(truncation: SvdTruncation) -> Self {
        Self {
            truncation,
            ..Self::default()
        }
    }
}

/// Result of a variational fit.
#[derive(Clone, Debug)]
pub struct Fit {
    pub state: Mps,
    /// `||phi - target|| / ||target||`, or the absolute residual when the target vanishes.
    pub error: f64,
    /// Number of full (left-right-left) sweeps performed.
    pub sweeps: usize,
    /// Relative distance after the initial compression and after every sweep.
    pub history: Vec<f64>,
}

struct Target {
    coeffs: Vec<C64>,
    cores: Vec<Mps>,
    log_scale: f64,
}

impl Target {
    fn new(coeffs: &[C64], states: &[&Mps]) -> Result<Self> {
        if coeffs.is_empty() || states.is_empty() {
            return Err(Error::Argument("linear combination of zero states".into()));
        }
        if coeffs.len() != states.len() {
            return Err(Error::Argument(format!(
                "{} coefficients for {} states",
                coeffs.len(),
                states.len()
            )));
        }
        let n = states[0].len();
        if let Some(s) = states.iter().find(|s| s.len() != n) {
            return Err(Error::Shape(format!(
                "states on {} and {} qubits",
                n,
                s.len()
            )));
        }
        let logs: Vec<f64> = coeffs
            .iter()
            .zip(states)
            .map(|(c, s)| {
                if *c == ZERO || s.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    c.norm().ln() + s.log_prefactor()
                }
            })
            .collect();
        let log_scale = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut kept_c = Vec::new();
        let mut kept_s = Vec::new();
        if log_scale.is_finite() {
            for ((c, s), l) in coeffs.iter().zip(states).zip(&logs) {
                if l.is_finite() {
                    kept_c.push(c * (s.log_prefactor() - log_scale).exp());
                    kept_s.push((*s).clone().with_log_prefactor(0.0));
                }
            }
        }
        if kept_s.is_empty() {
            kept_c.push(ZERO);
            kept_s.push(Mps::zero(n));
        }
        Ok(Self {
            coeffs: kept_c,
            cores: kept_s,
            log_scale: if log_scale.is_finite() {
                log_scale
            } else {
                0.0
            },
        })
    }

    fn len(&self) -> usize {
        self.cores[0].len()
    }
}

/// Direct-sum MPS representing `sum_i c_i |core_i>` exactly (log prefactors ignored).
fn direct_sum(coeffs: &[C64], states: &[&Mps]) -> Mps {
    let n = states[0].len();
    if states.len() == 1 {
        let s = states[0];
        let mut sites = s.sites().to_vec();
        sites[0] = sites[0].scale(coeffs[0]);
        return Mps::from_parts(sites, 0.0, None);
    }
    if n == 1 {
        let data = (0..2)
            .map(|x| {
                coeffs
                    .iter()
                    .zip(states)
                    .map(|(c, s)| c * s.site(0).data()[x])
                    .sum()
            })
            .collect();
        return Mps::from_parts(vec![DenseTensor::from_raw(vec![1, 2, 1], data)], 0.0, None);
    }
    let mut sites = Vec::with_capacity(n);
    for k in 0..n {
        let lefts: Vec<usize> = states.iter().map(|s| s.site(k).shape()[0]).collect();
        let rights: Vec<usize> = states.iter().map(|s| s.site(k).shape()[2]).collect();
        let (lt, rt) = if k == 0 {
            (1, rights.iter().sum())
        } else if k == n - 1 {
            (lefts.iter().sum(), 1)
        } else {
            (lefts.iter().sum(), rights.iter().sum())
        };
        let mut t = DenseTensor::zeros(vec![lt, 2, rt]);
        let (mut lo, mut ro) = (0, 0);
        for (i, s) in states.iter().enumerate() {
            let src = s.site(k);
            let (l, r) = (lefts[i], rights[i]);
            let f = if k == 0 { coeffs[i] } else { ONE };
            for a in 0..l {
                for x in 0..2 {
                    for b in 0..r {
                        let la = if k == 0 { 0 } else { lo + a };
                        let rb = if k == n - 1 { 0 } else { ro + b };
                        t.set(&[la, x, rb], f * src.get(&[a, x, b]));
                    }
                }
            }
            lo += l;
            ro += r;
        }
        sites.push(t);
    }
    Mps::from_parts(sites, 0.0, None)
}

/// Norm of `sum_i c_i |core_i>`, evaluated by orthogonalizing the direct sum (no cancellation).
fn combination_norm(coeffs: &[C64], states: &[&Mps]) -> f64 {
    let ds = direct_sum(coeffs, states);
    if ds.is_zero() {
        0.0
    } else {
        ds.norm()
    }
}

/// Left environment update: `sum_s F(s)^dagger L T(s)`.
fn grow_left(env: &Mat, f: &DenseTensor, t: &DenseTensor) -> Mat {
    let mut next = Mat::zeros(f.shape()[2], t.shape()[2]);
    for s in 0..2 {
        next += adjoint(&site_matrix(f, s)) * env * site_matrix(t, s);
    }
    next
}

/// Right environment update: `sum_s conj(F(s)) R T(s)^T`.
fn grow_right(env: &Mat, f: &DenseTensor, t: &DenseTensor) -> Mat {
    let mut next = Mat::zeros(f.shape()[0], t.shape()[0]);
    for s in 0..2 {
        let fc = site_matrix(f, s).conjugate().to_owned();
        next += fc * env * site_matrix(t, s).transpose();
    }
    next
}

struct Sweeper<'a> {
    target: &'a Target,
    phi: Vec<DenseTensor>,
    left: Vec<Vec<Mat>>,
    right: Vec<Vec<Mat>>,
    trunc: SvdTruncation,
}

impl<'a> Sweeper<'a> {
    /// `phi` must be right-canonical from site 1 onwards.
    fn new(target: &'a Target, phi: Vec<DenseTensor>, trunc: SvdTruncation) -> Self {
        let n = phi.len();
        let m = target.cores.len();
        let one = Mat::from_fn(1, 1, |_, _| ONE);
        let mut left = vec![vec![Mat::zeros(0, 0); n + 1]; m];
        let mut right = vec![vec![Mat::zeros(0, 0); n + 1]; m];
        for i in 0..m {
            left[i][0] = one.clone();
            right[i][n] = one.clone();
            for k in (2..n).rev() {
                right[i][k] = grow_right(&right[i][k + 1], &phi[k], target.cores[i].site(k));
            }
        }
        Self {
            target,
            phi,
            left,
            right,
            trunc,
        }
    }

    /// Projected two-site tensor at bonds (k, k+1) as a `(l*2) x (2*r)` matrix.
    fn theta(&self, k: usize) -> Mat {
        let l = self.phi[k].shape()[0];
        let r = self.phi[k + 1].shape()[2];
        let mut th = Mat::zeros(l * 2, 2 * r);
        for (i, core) in self.target.cores.iter().enumerate() {
            let c = self.target.coeffs[i];
            let (ta, tb) = (core.site(k), core.site(k + 1));
            let rt = self.right[i][k + 2].transpose().to_owned();
            for s1 in 0..2 {
                let la = &self.left[i][k] * site_matrix(ta, s1);
                for s2 in 0..2 {
                    let blk = &la * site_matrix(tb, s2) * &rt;
                    for a in 0..l {
                        for b in 0..r {
                            th[(a * 2 + s1, s2 * r + b)] += c * blk[(a, b)];
                        }
                    }
                }
            }
        }
        th
    }

    fn split(&mut self, k: usize, th: &Mat, center_right: bool) -> Result<()> {
        let l = self.phi[k].shape()[0];
        let r = self.phi[k + 1].shape()[2];
        let svd = svd_matrix(th, &self.trunc)?;
        let d = svd.s.len();
        let (mut u, mut vt) = (svd.u, svd.vt);
        if center_right {
            scale_rows(&mut vt, &svd.s);
        } else {
            scale_cols(&mut u, &svd.s);
        }
        self.phi[k] = DenseTensor::from_matrix(&u, vec![l, 2, d])?;
        self.phi[k + 1] = DenseTensor::from_matrix(&vt, vec![d, 2, r])?;
        Ok(())
    }

    fn sweep(&mut self) -> Result<()> {
        let n = self.phi.len();
        let m = self.target.cores.len();
        for k in 0..n - 1 {
            let th = self.theta(k);
            self.split(k, &th, true)?;
            if k + 1 < n - 1 {
                for i in 0..m {
                    self.left[i][k + 1] =
                        grow_left(&self.left[i][k], &self.phi[k], self.target.cores[i].site(k));
                }
            }
        }
        for k in (0..n - 1).rev() {
            let th = self.theta(k);
            self.split(k, &th, false)?;
            if k > 0 {
                for i in 0..m {
                    self.right[i][k + 1] = grow_right(
                        &self.right[i][k + 2],
                        &self.phi[k + 1],
                        self.target.cores[i].site(k + 1),
                    );
                }
            }
        }
        Ok(())
    }
}

fn distance(phi: &[DenseTensor], target: &Target) -> f64 {
    let phi_mps = Mps::from_parts(phi.to_vec(), 0.0, None);
    let mut coeffs = vec![ONE];
    coeffs.extend(target.coeffs.iter().map(|c| -c));
    let mut states: Vec<&Mps> = vec![&phi_mps];
    states.extend(target.cores.iter());
    combination_norm(&coeffs, &states)
}

fn fit(target: &Target, opts: &SimplifyOptions) -> Result<Fit> {
    let n = target.len();
    let refs: Vec<&Mps> = target.cores.iter().collect();
    // Orthogonalizing the exact combination gives its norm without cancellation.
    let mut guess = direct_sum(&target.coeffs, &refs);
    guess.canonicalize(n - 1);
    let target_norm = if guess.is_zero() {
        0.0
    } else {
        guess.log_prefactor().exp()
    };
    // Cancellation below round-off relative to the summands means a zero target.
    let scale: f64 = if refs.len() == 1 {
        target_norm
    } else {
        target
            .coeffs
            .iter()
            .zip(&refs)
            .map(|(c, s)| c.norm() * s.inner(s).map_or(0.0, |z| z.re.max(0.0).sqrt()))
            .sum()
    };
    if target_norm <= 1e-12 * scale || target_norm == 0.0 {
        let abs = target_norm * target.log_scale.exp();
        return Ok(Fit {
            state: Mps::zero(n),
            error: abs,
            sweeps: 0,
            history: vec![abs],
        });
    }

    // Initial guess: canonical SVD compression of the exact combination.
    let discarded = guess.compress(&opts.truncation)?;
    if n == 1 {
        // A single site is represented exactly.
        let lp = guess.log_prefactor() + target.log_scale;
        let state = guess.with_log_prefactor(lp);
        return Ok(Fit {
            state,
            error: 0.0,
            sweeps: 0,
            history: vec![0.0],
        });
    }
    // Sequential truncation error is bounded by the summed discarded weight, and no sweep can gain
    // more than the current squared error.
    if discarded <= opts.convergence_tolerance {
        let error = discarded.sqrt();
        let lp = guess.log_prefactor() + target.log_scale;
        return Ok(Fit {
            state: guess.with_log_prefactor(lp),
            error,
            sweeps: 0,
            history: vec![error],
        });
    }
    // Absorb the prefactor into the center tensor (site 0) so that phi is directly comparable.
    let mut phi = guess.sites().to_vec();
    phi[0] = phi[0].scale(C64::new(guess.log_prefactor().exp(), 0.0));

    let mut best_d = distance(&phi, target);
    let mut history = vec![best_d / target_norm];
    let mut sweeps = 0;
    let mut sweeper = Sweeper::new(target, phi.clone(), opts.truncation);
    while sweeps < opts.max_sweeps && best_d > 0.0 {
        sweeper.sweep()?;
        sweeps += 1;
        let d = distance(&sweeper.phi, target);
        history.push(d / target_norm);
        let improvement = best_d * best_d - d * d;
        if d > best_d {
            // Keep the better previous state.
            break;
        }
        phi = sweeper.phi.clone();
        best_d = d;
        if improvement <= opts.convergence_tolerance * target_norm * target_norm {
            break;
        }
    }
    let mut state = Mps::from_parts(phi, target.log_scale, Some(0));
    state.canonicalize(0);
    Ok(Fit {
        state,
        error: best_d / target_norm,
        sweeps,
        history,
    })
}

/// Closest MPS to `p` within the truncation budget.
pub fn simplify(p: &Mps, opts: &SimplifyOptions) -> Result<Fit> {
    fit(&Target::new(&[ONE], &[p])?, opts)
}

/// Best MPS approximation of `sum_i coeffs[i] |states[i]>`.
pub fn combine(coeffs: &[C64], states: &[Mps], opts: &SimplifyOptions) -> Result<Fit> {
    let refs: Vec<&Mps> = states.iter().collect();
    fit(&Target::new(coeffs, &refs)?, opts)
}

/// `combine` over borrowed states.
pub fn combine_refs(coeffs: &[C64], states: &[&Mps], opts: &SimplifyOptions) -> Result<Fit> {
    fit(&Target::new(coeffs, states)?, opts)
}

/// Exact norm of a linear combination without densifying or fitting.
pub fn combination_distance(coeffs: &[C64], states: &[&Mps]) -> Result<f64> {
    let t = Target::new(coeffs, states)?;
    let refs: Vec<&Mps> = t.cores.iter().collect();
    Ok(combination_norm(&t.coeffs, &refs) * t.log_scale.exp())
}

/// `op |p>` followed by simplification under `trunc` with default sweep settings.
pub fn apply(op: &Mpo, p: &Mps, trunc: &SvdTruncation) -> Result<Mps> {
    Ok(apply_with(op, p, &SimplifyOptions::with_truncation(*trunc))?.state)
}

pub fn apply_with(op: &Mpo, p: &Mps, opts: &SimplifyOptions) -> Result<Fit> {
    simplify(&op.apply_exact(p)?, opts)
}

/// Apply a sequence of operators in order, simplifying after each.
pub fn apply_all(ops: &[Mpo], p: &Mps, opts: &SimplifyOptions) -> Result<Mps> {
    let mut cur = p.clone();
    for op in ops {
        cur = apply_with(op, &cur, opts)?.state;
    }
    Ok(cur)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Target for `||A x - b|| / ||b||`.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    pub inner_simplify: SimplifyOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            residual_tolerance: 1e-10,
            max_iterations: 200,
            inner_simplify: SimplifyOptions {
                truncation: SvdTruncation {
                    relative_tolerance: 1e-14,
                    max_rank: Some(128),
                },
                max_sweeps: 2,
                convergence_tolerance: 1e-12,
            },
        }
    }
}

impl SolveOptions {
    pub fn new(
        residual_tolerance: f64,
        max_iterations: usize,
        inner_simplify: SimplifyOptions,
    ) -> Result<Self> {
        if !(residual_tolerance > 0.0) {
            return Err(Error::Argument(
                "residual tolerance must be positive".into(),
            ));
        }
        if max_iterations == 0 {
            return Err(Error::Argument("max_iterations must be positive".into()));
        }
        Ok(Self {
            residual_tolerance,
            max_iterations,
            inner_simplify,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub state: Mps,
    /// Final relative residual `||A x - b|| / ||b||`, evaluated without recursion.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Recursive relative residual after each iteration.
    pub residual_history: Vec<f64>,
    /// Whether the solver switched to the normal equations.
    pub used_normal_equations: bool,
}

/// CG breakdown, carrying the last iterate.
#[derive(Clone, Debug)]
pub struct SolveFailure {
    pub message: String,
    pub iterate: Mps,
    pub residual: f64,
    pub iterations: usize,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} after {} iterations (relative residual {:.3e})",
            self.message, self.iterations, self.residual
        )
    }
}

impl From<SolveFailure> for Error {
    fn from(e: SolveFailure) -> Self {
        Error::Numerical(e.to_string())
    }
}

/// `||A x - b||` computed from the exact product, relative to `||b||`.
pub fn true_residual(a: &Mpo, x: &Mps, b: &Mps, b_norm: f64) -> Result<f64> {
    let ax = a.apply_exact(x)?;
    Ok(combination_distance(&[ONE, -ONE], &[&ax, b])? / b_norm)
}

/// Conjugate gradients started from the zero vector.
pub fn cg_solve(
    a: &Mpo,
    b: &Mps,
    opts: &SolveOptions,
) -> std::result::Result<Solution, SolveFailure> {
    cg_solve_from(a, b, None, opts)
}

/// Conjugate gradients with an optional initial guess.
///
/// The operator should be Hermitian positive definite. If the residual stops
/// decreasing for 50 iterations the solver continues on the normal equations
/// `A^dagger A x = A^dagger b`.
pub fn cg_solve_from(
    a: &Mpo,
    b: &Mps,
    x0: Option<&Mps>,
    opts: &SolveOptions,
) -> std::result::Result<Solution, SolveFailure> {
    let fail = |message: String, iterate: Mps, residual: f64, iterations: usize| SolveFailure {
        message,
        iterate,
        residual,
        iterations,
    };
    let n = b.len();
    let wrap = |e: Error, it: &Mps, res: f64, k: usize| fail(e.to_string(), it.clone(), res, k);
    if a.len() != n {
        return Err(fail(
            format!("operator on {} qubits, right-hand side on {n}", a.len()),
            Mps::zero(n),
            f64::NAN,
            0,
        ));
    }
    let b_norm = if b.is_zero() { 0.0 } else { b.norm() };
    if b_norm == 0.0 {
        return Ok(Solution {
            state: Mps::zero(n),
            residual: 0.0,
            iterations: 0,
            converged: true,
            residual_history: vec![],
            used_normal_equations: false,
        });
    }
    let inner = &opts.inner_simplify;
    let mut op = a.clone();
    let mut rhs = b.clone();
    let mut rhs_norm = b_norm;
    let mut x = x0.cloned().unwrap_or_else(|| Mps::zero(n));
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut normal = false;
    let mut residual = f64::INFINITY;
    // Each outer pass restarts from the true residual of the current iterate.
    for _restart in 0..4 {
        let mut r = if x.is_zero() {
            rhs.clone()
        } else {
            let ax = op
                .apply_exact(&x)
                .map_err(|e| wrap(e, &x, residual, iterations))?;
            combine_refs(&[ONE, -ONE], &[&rhs, &ax], inner)
                .map_err(|e| wrap(e, &x, residual, iterations))?
                .state
        };
        let mut rr = r
            .inner(&r)
            .map_err(|e| wrap(e, &x, residual, iterations))?
            .re;
        let mut p = r.clone();
        let mut best = rr.sqrt() / rhs_norm;
        let mut stagnant = 0;
        while iterations < opts.max_iterations {
            if rr.sqrt() / rhs_norm <= opts.residual_tolerance {
                break;
            }
            let ap = apply_with(&op, &p, inner)
                .map_err(|e| wrap(e, &x, residual, iterations))?
                .state;
            let curv = p
                .inner(&ap)
                .map_err(|e| wrap(e, &x, residual, iterations))?;
            if curv.norm() <= 1e-300 || !curv.re.is_finite() {
                let res = true_residual(a, &x, b, b_norm).unwrap_or(f64::NAN);
                return Err(fail(
                    "zero-curvature search direction".into(),
                    x,
                    res,
                    iterations,
                ));
            }
            let alpha = C64::new(rr, 0.0) / curv;
            x = combine_refs(&[ONE, alpha], &[&x, &p], inner)
                .map_err(|e| wrap(e, &x, residual, iterations))?
                .state;
            r = combine_refs(&[ONE, -alpha], &[&r, &ap], inner)
                .map_err(|e| wrap(e, &x, residual, iterations))?
                .state;
            let rr_new = r
                .inner(&r)
                .map_err(|e| wrap(e, &x, residual, iterations))?
                .re;
            iterations += 1;
            let rel = rr_new.max(0.0).sqrt() / rhs_norm;
            history.push(rel);
            if rel < best * (1.0 - 1e-12) {
                best = rel;
                stagnant = 0;
            } else {
                stagnant += 1;
            }
            let beta = rr_new / rr;
            rr = rr_new;
            if rel <= opts.residual_tolerance {
                break;
            }
            p = combine_refs(&[ONE, C64::new(beta, 0.0)], &[&r, &p], inner)
                .map_err(|e| wrap(e, &x, residual, iterations))?
                .state;
            if stagnant >= 50 && !normal {
                // Continue on the normal equations from the current iterate.
                let adj = a.adjoint();
                op = adj
                    .compose(a)
                    .map_err(|e| wrap(e, &x, residual, iterations))?;
                rhs = apply_with(&adj, b, inner)
                    .map_err(|e| wrap(e, &x, residual, iterations))?
                    .state;
                rhs_norm = rhs.norm();
                normal = true;
                break;
            }
        }
        residual =
            true_residual(a, &x, b, b_norm).map_err(|e| wrap(e, &x, residual, iterations))?;
        if residual <= opts.residual_tolerance || iterations >= opts.max_iterations {
            break;
        }
    }
    Ok(Solution {
        converged: residual <= opts.residual_tolerance,
        state: x,
        residual,
        iterations,
        residual_history: history,
        used_normal_equations: normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mps(n: usize, chi: usize, rng: &mut impl Rng) -> Mps {
        let mut sites = Vec::new();
        for k in 0..n {
            let l = if k == 0 { 1 } else { chi };
            let r = if k == n - 1 { 1 } else { chi };
            let data = (0..l * 2 * r)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            sites.push(DenseTensor::new(vec![l, 2, r], data).unwrap());
        }
        Mps::new(sites, 0.0).unwrap()
    }

    fn dense_dist(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn product_state_unchanged() {
        let p = Mps::basis(&[1, 0, 1, 1]).unwrap();
        let fit = simplify(&p, &SimplifyOptions::default()).unwrap();
        assert!(fit.error < 1e-14);
        assert_eq!(fit.state.max_bond(), 1);
        assert!(dense_dist(&fit.state.to_dense().unwrap(), &p.to_dense().unwrap()) < 1e-14);
    }

    #[test]
    fn lossless_simplify() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_mps(10, 6, &mut rng);
        let opts = SimplifyOptions::with_truncation(SvdTruncation::exact());
        let fit = simplify(&p, &opts).unwrap();
        assert!(fit.error < 1e-12, "{}", fit.error);
        let pd = p.to_dense().unwrap();
        let nrm = pd.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(dense_dist(&fit.state.to_dense().unwrap(), &pd) / nrm < 1e-12);
    }

    #[test]
    fn combine_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_mps(8, 4, &mut rng);
        let q = random_mps(8, 4, &mut rng);
        let opts = SimplifyOptions::with_truncation(SvdTruncation::exact());
        let same = combine(&[ONE], std::slice::from_ref(&p), &opts).unwrap();
        assert!(dense_dist(&same.state.to_dense().unwrap(), &p.to_dense().unwrap()) < 1e-10);
        let zero = combine(&[ONE, -ONE], &[p.clone(), p.clone()], &opts).unwrap();
        assert!(zero.state.is_zero());
        assert!(
            zero.error <= 1e-13 * p.norm(),
            "{} {}",
            zero.error,
            p.norm()
        );
        let half = C64::new(0.5, 0.0);
        let avg = combine(&[half, half], &[p.clone(), q.clone()], &opts).unwrap();
        let want: Vec<C64> = p
            .to_dense()
            .unwrap()
            .iter()
            .zip(q.to_dense().unwrap())
            .map(|(a, b)| half * (a + b))
            .collect();
        assert!(dense_dist(&avg.state.to_dense().unwrap(), &want) < 1e-10);
        assert!(combine(&[], &[], &opts).is_err());
    }

    #[test]
    fn history_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_mps(10, 12, &mut rng);
        let opts = SimplifyOptions {
            truncation: SvdTruncation::new(0.0, Some(4)).unwrap(),
            max_sweeps: 6,
            convergence_tolerance: 0.0,
        };
        let fit = simplify(&p, &opts).unwrap();
        for w in fit.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{:?}", fit.history);
        }
        assert!(fit.state.max_bond() <= 4);
    }

    #[test]
    fn identity_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_mps(6, 3, &mut rng);
        let sol = cg_solve(&Mpo::identity(6), &b, &SolveOptions::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.residual < 1e-12);
        let zero = cg_solve(&Mpo::identity(6), &Mps::zero(6), &SolveOptions::default()).unwrap();
        assert_eq!(zero.iterations, 0);
        assert!(zero.state.is_zero());
    }

    #[test]
    fn shifted_identity_solve_matches_dense() {
        // A = 3 - S+ - S-, a strictly diagonally dominant Hermitian matrix.
        let n = 6;
        let a = crate::mpo::tridiagonal(n, C64::new(3.0, 0.0), -ONE, -ONE).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_mps(n, 2, &mut rng);
        let sol = cg_solve(&a, &b, &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        let ax = a.apply_exact(&sol.state).unwrap().to_dense().unwrap();
        assert!(dense_dist(&ax, &b.to_dense().unwrap()) / b.norm() < 1e-9);
    }
}
