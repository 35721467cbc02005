//! Fokker-Planck evolution `dp/dt = -mu dp/dx + D d2p/dx2` of a density table on a register.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::mpo::{
    self, ising_exponential_layers, qubo_exponential_layers, FourierSign, IsingForm, Mpo, QuboForm,
};
use crate::mps::Mps;
use crate::spectral::{qft, twos_complement, SpectralOptions};
use crate::tensor::{SvdTruncation, C64, ONE, ZERO};
use crate::variational::{als_solve, apply_with, AlsOptions, SimplifyOptions, SolveFailure};

/// Constant drift and diffusion on a one-dimensional grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FokkerPlanckSpec {
    pub mu: f64,
    pub d: f64,
    pub axis: Axis,
    pub dt: f64,
    pub t_final: f64,
}

impl FokkerPlanckSpec {
    pub fn new(mu: f64, d: f64, axis: Axis, dt: f64, t_final: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) || !mu.is_finite() {
            return Err(Error::Argument(format!(
                "need finite drift and nonnegative diffusion, got mu={mu}, D={d}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Argument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::Argument(format!(
                "final time must be nonnegative, got {t_final}"
            )));
        }
        Ok(Self {
            mu,
            d,
            axis,
            dt,
            t_final,
        })
    }

    /// Number of implicit steps to reach `t_final` (the last one may overshoot by less than `dt / 2`).
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Stencil weights `(diag, up, down)` of the generator, where `up` multiplies `p(s - 1)`.
    fn stencil(&self) -> (f64, f64, f64) {
        let dx = self.axis.spacing();
        let (drift, diff) = (self.mu / (2.0 * dx), self.d / (dx * dx));
        (-2.0 * diff, drift + diff, diff - drift)
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `G = -mu D1 + D D2` with central differences and absorbing boundaries.
pub fn fp_generator_mpo(spec: &FokkerPlanckSpec) -> Result<Mpo> {
    let (diag, up, down) = spec.stencil();
    Ok(mpo::tridiagonal(spec.axis.qubits, c(diag), c(up), c(down))?.with_name("fokker-planck"))
}

/// `1 + f G` as a single tridiagonal MPO.
fn shifted_generator(spec: &FokkerPlanckSpec, f: f64) -> Result<Mpo> {
    let (diag, up, down) = spec.stencil();
    mpo::tridiagonal(spec.axis.qubits, c(1.0 + f * diag), c(f * up), c(f * down))
}

/// Settings of the implicit finite-difference solver.
#[derive(Clone, Copy, Debug)]
pub struct FdOptions {
    /// Sweeps on the normal equations of each implicit step.
    pub solve: AlsOptions,
    /// Used for the right-hand side `(1 + dt/2 G) p`.
    pub simplify: SimplifyOptions,
}

impl Default for FdOptions {
    fn default() -> Self {
        // Squared-weight tolerances: 1e-24 keeps per-cut norm errors near 1e-12.
        let solve = AlsOptions::default();
        Self {
            solve,
            simplify: SimplifyOptions::with_truncation(solve.truncation),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ImplicitStep {
    pub state: Mps,
    pub residual: f64,
    pub iterations: usize,
}

/// Crank-Nicolson step `(1 - dt/2 G)^-1 (1 + dt/2 G) p`.
///
/// The system is solved through the normal equations, since `1 - dt/2 G` is not Hermitian when `mu != 0`.
pub fn step_implicit(
    state: &Mps,
    spec: &FokkerPlanckSpec,
    opts: &FdOptions,
) -> std::result::Result<ImplicitStep, SolveFailure> {
    let to_failure = |e: Error| SolveFailure {
        message: e.to_string(),
        iterate: state.clone(),
        residual: f64::NAN,
        iterations: 0,
    };
    if spec.mu == 0.0 && spec.d == 0.0 {
        return Ok(ImplicitStep {
            state: state.clone(),
            residual: 0.0,
            iterations: 0,
        });
    }
    let h = 0.5 * spec.dt;
    let a = shifted_generator(spec, -h).map_err(to_failure)?;
    let b = shifted_generator(spec, h).map_err(to_failure)?;
    let ah = a.adjoint();
    let normal = ah
        .compose(&a)
        .and_then(|n| n.compressed(&SvdTruncation::new(1e-28, None)?))
        .map_err(to_failure)?;
    let rhs = apply_with(&b, state, &opts.simplify)
        .map_err(to_failure)?
        .state;
    let rhs = apply_with(&ah, &rhs, &opts.simplify)
        .map_err(to_failure)?
        .state;
    let sol = als_solve(&normal, &rhs, Some(state), &opts.solve).map_err(to_failure)?;
    Ok(ImplicitStep {
        state: sol.state,
        residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// Trajectory of the observables at the checkpoints.
#[derive(Clone, Debug, Default)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Retained probability mass relative to the initial mass, before renormalization.
    pub norm: Vec<f64>,
    pub max_bond: Vec<usize>,
    /// Fraction of the mass in the outer 1/32 of the grid on either side.
    pub boundary_mass: Vec<f64>,
    pub state_checkpoints: Option<Vec<Mps>>,
}

/// Boundary mass above which a checkpoint counts as wrapped (or leaking).
pub const WRAP_THRESHOLD: f64 = 1e-6;

impl EvolutionRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn wrapped(&self) -> Vec<bool> {
        self.boundary_mass
            .iter()
            .map(|&m| m > WRAP_THRESHOLD)
            .collect()
    }

    fn push(&mut self, t: f64, m: &Moments, norm: f64, max_bond: usize) {
        self.times.push(t);
        self.mean.push(m.mean);
        self.variance.push(m.variance);
        self.norm.push(norm);
        self.max_bond.push(max_bond);
        self.boundary_mass.push(m.boundary);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,mean,variance,norm,max_bond\n");
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                self.times[i], self.mean[i], self.variance[i], self.norm[i], self.max_bond[i]
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Mass, mean and variance of a density table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
    pub boundary: f64,
}

/// Linear functionals `<1|`, `<x|`, `<x^2|` and the edge indicators on one axis.
pub struct Observables {
    ones: Mps,
    x: Mps,
    x2: Mps,
    edges: [Mps; 2],
}

impl Observables {
    pub fn new(axis: &Axis) -> Result<Self> {
        let n = axis.qubits;
        let ones = Mps::ones(n)?;
        let x = mpo::position(axis, ONE)?.apply_exact(&ones)?;
        let x2 = mpo::position_squared(axis, ONE)?.apply_exact(&ones)?;
        let k = n.min(5);
        let edge = |bit: usize| -> Result<Mps> {
            let sites: Vec<[C64; 2]> = (0..n)
                .map(|i| {
                    if i < k {
                        if bit == 0 {
                            [ONE, ZERO]
                        } else {
                            [ZERO, ONE]
                        }
                    } else {
                        [ONE, ONE]
                    }
                })
                .collect();
            Mps::product(&sites)
        };
        Ok(Self {
            ones,
            x,
            x2,
            edges: [edge(0)?, edge(1)?],
        })
    }

    pub fn measure(&self, p: &Mps) -> Result<Moments> {
        let mass = self.ones.inner(p)?.re;
        if mass == 0.0 || !mass.is_finite() {
            return Err(Error::Numerical(format!(
                "cannot take moments of a state with mass {mass}"
            )));
        }
        let mean = self.x.inner(p)?.re / mass;
        let variance = self.x2.inner(p)?.re / mass - mean * mean;
        let boundary = (self.edges[0].inner(p)?.re + self.edges[1].inner(p)?.re) / mass;
        Ok(Moments {
            mass,
            mean,
            variance,
            boundary,
        })
    }
}

/// How often the finite-difference solver records observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoints {
    pub every: usize,
    pub keep_states: bool,
}

impl Default for Checkpoints {
    fn default() -> Self {
        Self {
            every: 10,
            keep_states: false,
        }
    }
}

/// Repeated implicit steps up to `spec.t_final`, renormalizing the mass after every step.
pub fn evolve_fd(
    spec: &FokkerPlanckSpec,
    init: &Mps,
    checkpoints: Checkpoints,
    opts: &FdOptions,
) -> Result<EvolutionRecord> {
    if init.len() != spec.axis.qubits {
        return Err(Error::Shape(format!(
            "state on {} qubits, grid has {}",
            init.len(),
            spec.axis.qubits
        )));
    }
    let every = checkpoints.every.max(1);
    let obs = Observables::new(&spec.axis)?;
    let m0 = obs.measure(init)?;
    let mut rec = EvolutionRecord {
        state_checkpoints: checkpoints.keep_states.then(Vec::new),
        ..Default::default()
    };
    let mut retained = 1.0;
    let mut p = init.clone();
    rec.push(0.0, &m0, retained, p.max_bond());
    if let Some(s) = rec.state_checkpoints.as_mut() {
        s.push(p.clone());
    }
    let steps = spec.steps();
    for step in 1..=steps {
        let next = step_implicit(&p, spec, opts)?.state;
        let mass = obs.ones.inner(&next)?.re;
        let prev = obs.ones.inner(&p)?.re;
        retained *= mass / prev;
        p = next.scaled(c(m0.mass / mass));
        if step % every == 0 || step == steps {
            let m = obs.measure(&p)?;
            rec.push(step as f64 * spec.dt, &m, retained, p.max_bond());
            if let Some(s) = rec.state_checkpoints.as_mut() {
                s.push(p.clone());
            }
        }
    }
    Ok(rec)
}

/// Physical momenta `2 pi / L` times the signed bit weights.
fn momentum_weights(axis: &Axis) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / axis.length();
    mpo::signed_bit_weights(axis.qubits)
        .into_iter()
        .map(|w| w * scale)
        .collect()
}

/// `exp(-beta k^2)` in the folded basis where bit 0 flags negative momenta and the rest count from there.
///
/// After two's complement, `|k| / (2 pi / L) = t_0 + sum_{j>0} 2^(m-1-j) t_j`, so all QUBO entries are nonnegative.
fn folded_k2_layers(axis: &Axis, beta: C64) -> Result<Vec<Mpo>> {
    let m = axis.qubits;
    let scale = 2.0 * std::f64::consts::PI / axis.length();
    let w: Vec<f64> = (0..m)
        .map(|j| {
            if j == 0 {
                1.0
            } else {
                2f64.powi((m - 1 - j) as i32)
            }
        })
        .collect();
    let q = (0..m)
        .map(|i| (0..m).map(|j| w[i] * w[j]).collect())
        .collect();
    qubo_exponential_layers(&QuboForm::new(q, -beta * scale * scale)?)
}

/// Running maximum of bond dimensions within a pipeline.
struct Tracker(usize);

impl Tracker {
    fn see(&mut self, p: Mps) -> Mps {
        self.0 = self.0.max(p.max_bond());
        p
    }
}

/// `F^-1 exp[(a (ik) + b (ik)^2) t] F p` on a periodic axis; also returns the largest bond seen.
pub fn exp_symbol(
    p: &Mps,
    axis: &Axis,
    a: C64,
    b: C64,
    t: f64,
    opts: &SpectralOptions,
) -> Result<(Mps, usize)> {
    if p.len() != axis.qubits {
        return Err(Error::Shape(format!(
            "state on {} qubits, grid has {}",
            p.len(),
            axis.qubits
        )));
    }
    let mut tr = Tracker(p.max_bond());
    if t == 0.0 || (a == ZERO && b == ZERO) {
        return Ok((p.clone(), tr.0));
    }
    let mut cur = tr.see(qft(p, FourierSign::Forward, opts)?);
    if a != ZERO {
        let phase = mpo::diagonal_exp(&momentum_weights(axis), 0.0, C64::i() * a * t)?;
        cur = tr.see(apply_with(&phase, &cur, &opts.simplify)?.state);
    }
    if b != ZERO {
        cur = tr.see(twos_complement(&cur, opts)?);
        for layer in folded_k2_layers(axis, b * t)? {
            cur = tr.see(apply_with(&layer, &cur, &opts.simplify)?.state);
        }
        cur = tr.see(twos_complement(&cur, opts)?);
    }
    let out = tr.see(qft(&cur, FourierSign::Inverse, opts)?);
    Ok((out, tr.0))
}

/// Exact evolution to time `t` in a single spectral step, with periodic boundaries.
pub fn evolve_split_step(
    spec: &FokkerPlanckSpec,
    init: &Mps,
    t: f64,
    opts: &SpectralOptions,
) -> Result<Mps> {
    Ok(evolve_split_step_traced(spec, init, t, opts)?.0)
}

/// As [`evolve_split_step`], also returning the largest bond dimension of any intermediate state.
pub fn evolve_split_step_traced(
    spec: &FokkerPlanckSpec,
    init: &Mps,
    t: f64,
    opts: &SpectralOptions,
) -> Result<(Mps, usize)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Argument(format!(
            "evolution time must be nonnegative, got {t}"
        )));
    }
    // G(ik) = -mu (ik) + D (ik)^2
    exp_symbol(init, &spec.axis, c(-spec.mu), c(spec.d), t, opts)
}

/// Observables of spectral evolution from `init` to each of `times`.
pub fn split_step_record(
    spec: &FokkerPlanckSpec,
    init: &Mps,
    times: &[f64],
    keep_states: bool,
    opts: &SpectralOptions,
) -> Result<EvolutionRecord> {
    let obs = Observables::new(&spec.axis)?;
    let m0 = obs.measure(init)?;
    let mut rec = EvolutionRecord {
        state_checkpoints: keep_states.then(Vec::new),
        ..Default::default()
    };
    for &t in times {
        let (p, bond) = evolve_split_step_traced(spec, init, t, opts)?;
        let m = obs.measure(&p)?;
        rec.push(t, &m, m.mass / m0.mass, bond);
        if let Some(s) = rec.state_checkpoints.as_mut() {
            s.push(p);
        }
    }
    Ok(rec)
}

/// Potential `V(x) = c0 + c1 x + c2 x^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticPotential {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl QuadraticPotential {
    pub fn value(&self, x: f64) -> f64 {
        self.c0 + x * (self.c1 + x * self.c2)
    }

    /// Layered MPO factors of `exp(tau V)` and the constant `log` factor they leave out.
    pub fn exponential(&self, axis: &Axis, tau: f64) -> Result<(Vec<Mpo>, f64)> {
        let m = axis.qubits;
        let w: Vec<f64> = (0..m).map(|k| axis.bit_weight(k)).collect();
        // x = center + sum_k (w_k / 2) z_k with spins z = 2 s - 1.
        let center = axis.start + 0.5 * w.iter().sum::<f64>();
        let slope = self.c1 + 2.0 * self.c2 * center;
        let h: Vec<f64> = w.iter().map(|wk| 0.5 * slope * wk).collect();
        let j: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| {
                        if i == k {
                            0.0
                        } else {
                            0.25 * self.c2 * w[i] * w[k]
                        }
                    })
                    .collect()
            })
            .collect();
        let constant = self.value(center) + 0.25 * self.c2 * w.iter().map(|v| v * v).sum::<f64>();
        let layers = ising_exponential_layers(&IsingForm::new(h, j, c(tau))?)?;
        Ok((layers, tau * constant))
    }
}

/// Symbol `G(ik) = a (ik) + b (ik)^2` of a constant-coefficient generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSymbol {
    pub a: C64,
    pub b: C64,
}

/// Strang splitting `e^{V dt/2} F^-1 e^{G dt} F e^{V dt/2}` for a single step.
pub fn split_step_with_potential(
    g: SpectralSymbol,
    v: &QuadraticPotential,
    axis: &Axis,
    dt: f64,
    state: &Mps,
    opts: &SpectralOptions,
) -> Result<Mps> {
    let (layers, log_c) = v.exponential(axis, 0.5 * dt)?;
    if !log_c.is_finite() {
        return Err(Error::Range("potential exponential overflows".into()));
    }
    let half = |p: &Mps| -> Result<Mps> {
        let mut cur = p.clone();
        for layer in &layers {
            cur = apply_with(layer, &cur, &opts.simplify)?.state;
        }
        let lp = cur.log_prefactor() + log_c;
        Ok(cur.with_log_prefactor(lp))
    };
    let p = half(state)?;
    let (p, _) = exp_symbol(&p, axis, g.a, g.b, dt, opts)?;
    half(&p)
}
