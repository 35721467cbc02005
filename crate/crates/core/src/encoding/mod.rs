//! Turning analytic densities into register states.

mod bounds;
mod config;
mod distribution;
mod gaussian;
mod sampling;

pub use bounds::{
    fit_slope, max_derivative, verify_entropy_bounds, BoundReport, RefinementRow, DERIVATIVE_GRID,
};
pub use config::{Config, EncodingSettings, ENCODING_KEYS};
pub use distribution::{adaptive_simpson, Distribution};
pub use gaussian::{
    covariance_2d, covariance_3d, gaussian_mps_nd, inverse_square, ising_form_bits,
    quadratic_form_bits, GaussianOptions, Matrix,
};
pub use sampling::{
    dense_grid_values, function_mps, gr_weights, sample_1d, sample_grid, simpson_theta, weights,
    Representation, Scheme, Source,
};

use crate::error::{Error, Result};
use crate::grid::OrderingMap;
use crate::mps::Mps;
use crate::tensor::{SvdTruncation, C64};

/// `<f|p>` including prefactors; with `p` holding quadrature weights this approximates `integral f p dx`.
pub fn expect_value(f: &Mps, p: &Mps) -> Result<C64> {
    if f.len() != p.len() {
        return Err(Error::Shape(format!(
            "observable on {} qubits, state on {}",
            f.len(),
            p.len()
        )));
    }
    f.inner(p)
}

/// Move every bit from its position under `from` to its position under `to` with adjacent swaps.
pub fn reorder(
    p: &Mps,
    from: &OrderingMap,
    to: &OrderingMap,
    trunc: &SvdTruncation,
) -> Result<Mps> {
    if from.total_qubits() != p.len() {
        return Err(Error::Shape(format!(
            "ordering covers {} bits, state has {}",
            from.total_qubits(),
            p.len()
        )));
    }
    let mut dest = from.permutation_to(to)?;
    let mut out = p.clone();
    // Bubble sort by destination; each exchange is a local swap with truncation.
    let n = dest.len();
    for pass in 0..n.saturating_sub(1) {
        let mut swapped = false;
        for k in 0..n - 1 - pass {
            if dest[k] > dest[k + 1] {
                out.swap_adjacent(k, trunc)?;
                dest.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, Grid, QubitOrder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reorder_matches_dense_permutation() {
        let ax = Axis::new(-2.0, 2.0, 3).unwrap();
        let ga = Grid::new(vec![ax, ax], QubitOrder::A).unwrap();
        let gb = ga.with_order(QubitOrder::B).unwrap();
        let f = |x: &[f64]| (-(x[0] * x[0] + x[0] * x[1] + 2.0 * x[1] * x[1])).exp() + 0.1 * x[0];
        let exact = SvdTruncation::exact();
        let pa = Mps::from_dense(
            &dense_grid_values(&ga, &f)
                .unwrap()
                .iter()
                .map(|&v| C64::new(v, 0.0))
                .collect::<Vec<_>>(),
            &exact,
        )
        .unwrap();
        let want = dense_grid_values(&gb, &f).unwrap();
        let pb = reorder(&pa, &ga.ordering_map(), &gb.ordering_map(), &exact).unwrap();
        let got = pb.to_dense().unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g.re - w).abs() < 1e-12 && g.im.abs() < 1e-12);
        }
    }

    #[test]
    fn reorder_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: Vec<C64> = (0..256)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let exact = SvdTruncation::exact();
        let p = Mps::from_dense(&v, &exact).unwrap();
        let a = OrderingMap::new(&[4, 4], QubitOrder::A);
        let b = OrderingMap::new(&[4, 4], QubitOrder::B);
        let same = reorder(&p, &a, &a, &exact).unwrap();
        assert_eq!(same, p);
        let back = reorder(&reorder(&p, &a, &b, &exact).unwrap(), &b, &a, &exact).unwrap();
        let d = back.to_dense().unwrap();
        assert!(d.iter().zip(&v).all(|(x, y)| (x - y).norm() < 1e-10));
    }

    #[test]
    fn expectation_length_mismatch() {
        assert!(matches!(
            expect_value(&Mps::ones(3).unwrap(), &Mps::ones(4).unwrap()),
            Err(Error::Shape(_))
        ));
    }
}
