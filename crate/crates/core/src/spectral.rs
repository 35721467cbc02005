//! Fourier transforms, interpolation and differentiation of register states.
//!
//! Momentum registers use two's-complement labels: after a transform, bit
//! string `s` stands for the signed integer `sbar` with `k = 2 pi sbar / L`.

use crate::error::Result;
use crate::grid::Axis;
use crate::mpo::{self, momentum, qft_layers, Derivative, FourierSign, ShiftDirection};
use crate::mps::Mps;
use crate::tensor::{SvdTruncation, C64, ONE, ZERO};
use crate::variational::{apply_with, combine_refs, SimplifyOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    /// Truncation and sweep settings used after every MPO application.
    pub simplify: SimplifyOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self::with_truncation(SvdTruncation::new(1e-14, None).expect("valid tolerance"))
    }
}

impl SpectralOptions {
    pub fn with_truncation(truncation: SvdTruncation) -> Self {
        Self {
            simplify: SimplifyOptions {
                truncation,
                max_sweeps: 2,
                convergence_tolerance: 1e-12,
            },
        }
    }

    pub fn truncation(&self) -> SvdTruncation {
        self.simplify.truncation
    }
}

/// Unitary DFT of the register, with `Forward` using `exp(-2 pi i k s / N)`.
pub fn qft(p: &Mps, sign: FourierSign, opts: &SpectralOptions) -> Result<Mps> {
    Ok(qft_stages(p, sign, opts)?
        .pop()
        .expect("at least one stage"))
}

/// The state after every QFT layer, followed by the final (bit-reversed) result.
pub fn qft_stages(p: &Mps, sign: FourierSign, opts: &SpectralOptions) -> Result<Vec<Mps>> {
    let mut cur = p.clone();
    let mut out = Vec::with_capacity(p.len() + 1);
    for layer in qft_layers(p.len(), sign)? {
        cur = apply_with(&layer, &cur, &opts.simplify)?.state;
        out.push(cur.clone());
    }
    out.push(cur.reverse());
    Ok(out)
}

/// Flip every bit after the sign bit when the sign bit is set.
pub fn twos_complement(p: &Mps, opts: &SpectralOptions) -> Result<Mps> {
    Ok(apply_with(&mpo::twos_complement(p.len())?, p, &opts.simplify)?.state)
}

/// Resample `p` on a grid with `2^extra` times more points by zero-padding high frequencies.
///
/// Function values are preserved: the result is scaled by `2^(extra/2)`.
pub fn fourier_interpolate(p: &Mps, extra: usize, opts: &SpectralOptions) -> Result<Mps> {
    let folded = twos_complement(&qft(p, FourierSign::Forward, opts)?, opts)?;
    let mut padded = folded;
    for _ in 0..extra {
        padded = padded.insert_site(1, [ONE, ZERO])?;
    }
    let unfolded = twos_complement(&padded, opts)?;
    let out = qft(&unfolded, FourierSign::Inverse, opts)?;
    Ok(out.scaled(C64::new(2f64.powf(extra as f64 / 2.0), 0.0)))
}

/// Add one least significant qubit; new odd points hold the average of their neighbours.
///
/// The point past the end of the grid is taken as zero.
pub fn linear_interpolate(p: &Mps, opts: &SpectralOptions) -> Result<Mps> {
    let n = p.len();
    let next = apply_with(&mpo::shift(n, ShiftDirection::Down)?, p, &opts.simplify)?.state;
    let half = C64::new(0.5, 0.0);
    let avg = combine_refs(&[half, half], &[p, &next], &opts.simplify)?.state;
    let even = p.insert_site(n, [ONE, ZERO])?;
    let odd = avg.insert_site(n, [ZERO, ONE])?;
    Ok(combine_refs(&[ONE, ONE], &[&even, &odd], &opts.simplify)?.state)
}

/// `F^-1 G(ik) F p` with `G(ik) = a (ik) + b (ik)^2`, periodic on the axis.
pub fn spectral_derivative(
    p: &Mps,
    axis: &Axis,
    a: C64,
    b: C64,
    opts: &SpectralOptions,
) -> Result<Mps> {
    if a == ZERO && b == ZERO {
        return Ok(Mps::zero(p.len()));
    }
    let k1 = momentum(axis, 1)?;
    let w: Vec<f64> = mpo::signed_bit_weights(axis.qubits)
        .into_iter()
        .map(|x| x * 2.0 * std::f64::consts::PI / axis.length())
        .collect();
    // a (ik) + b (ik)^2 = i a k - b k^2
    let g = if b == ZERO {
        k1.scaled(C64::i() * a)
    } else {
        mpo::diagonal_quadratic(&w, 0.0, C64::i() * a, -b)?
    };
    let fp = qft(p, FourierSign::Forward, opts)?;
    let gp = apply_with(&g, &fp, &opts.simplify)?.state;
    qft(&gp, FourierSign::Inverse, opts)
}

/// Central finite differences with absorbing boundaries.
pub fn fd_derivative(
    p: &Mps,
    axis: &Axis,
    order: Derivative,
    opts: &SpectralOptions,
) -> Result<Mps> {
    Ok(apply_with(&mpo::finite_difference(axis, order)?, p, &opts.simplify)?.state)
}
