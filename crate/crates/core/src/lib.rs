//! Matrix-product-state simulation of quantum registers for numerical analysis.
//!
//! Functions sampled on a uniform grid of `2^m` points are stored as the
//! amplitudes of an `m`-qubit register, compressed as a matrix-product state.
//! Operators acting on those functions (shifts, coordinate multiplications,
//! Fourier transforms, exponentials of quadratic forms) are matrix-product
//! operators. On top of this sit integration, interpolation, differentiation
//! and Fokker-Planck time evolution.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod encoding;
pub mod error;
pub mod grid;
pub mod mpo;
pub mod mps;
pub mod pde;
pub mod spectral;
pub mod tensor;
pub mod variational;

pub use error::{Error, Result};
pub use grid::{Axis, Grid, OrderingMap, QubitOrder};
pub use mpo::{IsingForm, Mpo, QuboForm};
pub use mps::{Mps, SchmidtSpectrum};
pub use tensor::{contract, truncated_svd, DenseTensor, SvdTruncation, C64};
pub use variational::{
    apply, cg_solve, combine, simplify, Fit, SimplifyOptions, Solution, SolveOptions,
};
