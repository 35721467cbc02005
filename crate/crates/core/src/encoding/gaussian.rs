use faer::linalg::solvers::DenseSolveCore;
use faer::Side;

use crate::encoding::reorder;
use crate::encoding::sampling::Representation;
use crate::error::{Error, Result};
use crate::grid::{Grid, QubitOrder};
use crate::mpo::{coordinate_weights, ising_exponential_layers, IsingForm, Mpo};
use crate::mps::Mps;
use crate::tensor::C64;
use crate::variational::{simplify, SimplifyOptions};

pub type Matrix = Vec<Vec<f64>>;

fn rot2(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    vec![vec![c, s], vec![-s, c]]
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

fn transpose(a: &Matrix) -> Matrix {
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

fn conjugate_diag(o: &Matrix, diag: &[f64]) -> Matrix {
    let d: Matrix = (0..diag.len())
        .map(|i| {
            (0..diag.len())
                .map(|j| if i == j { diag[i] } else { 0.0 })
                .collect()
        })
        .collect();
    matmul(&matmul(o, &d), &transpose(o))
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite() && *v > 0.0) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "widths must be positive, got {values:?}"
        )))
    }
}

/// `O(theta) diag(s_max, s_min) O(theta)^T` with `O = [[cos, sin], [-sin, cos]]`.
pub fn covariance_2d(sigma_max: f64, sigma_min: f64, theta: f64) -> Result<Matrix> {
    check_positive(&[sigma_max, sigma_min])?;
    Ok(conjugate_diag(&rot2(theta), &[sigma_max, sigma_min]))
}

/// Equal rotations by `theta` about the z and then the x axis of `diag(s_max, s_min, s_min)`.
pub fn covariance_3d(sigma_max: f64, sigma_min: f64, theta: f64) -> Result<Matrix> {
    check_positive(&[sigma_max, sigma_min])?;
    let (s, c) = theta.sin_cos();
    let ox = vec![vec![1.0, 0.0, 0.0], vec![0.0, c, s], vec![0.0, -s, c]];
    let oz = vec![vec![c, s, 0.0], vec![-s, c, 0.0], vec![0.0, 0.0, 1.0]];
    Ok(conjugate_diag(
        &matmul(&ox, &oz),
        &[sigma_max, sigma_min, sigma_min],
    ))
}

/// `Sigma^-2` for a symmetric positive-definite width matrix.
pub fn inverse_square(sigma: &Matrix) -> Result<Matrix> {
    let n = sigma.len();
    if n == 0 || sigma.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(
            "width matrix must be square and nonempty".into(),
        ));
    }
    let amax = sigma.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..n {
            if !sigma[i][j].is_finite() || (sigma[i][j] - sigma[j][i]).abs() > 1e-12 * amax {
                return Err(Error::Argument(
                    "width matrix must be finite and symmetric".into(),
                ));
            }
        }
    }
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| sigma[i][j]);
    let llt = m
        .llt(Side::Lower)
        .map_err(|_| Error::Argument("width matrix is not positive definite".into()))?;
    let inv = llt.inverse();
    let inv2 = &inv * &inv;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.5 * (inv2[(i, j)] + inv2[(j, i)]))
                .collect()
        })
        .collect())
}

/// Bit expansion of `x^T A x` on the grid: returns the QUBO matrix over chain positions and the constant.
pub fn quadratic_form_bits(grid: &Grid, a: &Matrix) -> Result<(Matrix, f64)> {
    let dims = grid.dims();
    if a.len() != dims || a.iter().any(|r| r.len() != dims) {
        return Err(Error::Shape(format!(
            "{}x{} form for a {dims}-dimensional grid",
            a.len(),
            a.len()
        )));
    }
    let n = grid.total_qubits();
    let mut w = vec![0.0; n];
    let mut dim_of = vec![0; n];
    let mut offsets = vec![0.0; dims];
    for d in 0..dims {
        let (wd, off) = coordinate_weights(grid, d)?;
        offsets[d] = off;
        for i in 0..n {
            if wd[i] != 0.0 {
                w[i] = wd[i];
                dim_of[i] = d;
            }
        }
    }
    let aa: Vec<f64> = (0..dims)
        .map(|d| (0..dims).map(|e| a[d][e] * offsets[e]).sum())
        .collect();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = a[dim_of[i]][dim_of[j]] * w[i] * w[j];
        }
        q[i][i] += 2.0 * aa[dim_of[i]] * w[i];
    }
    let constant = (0..dims).map(|d| offsets[d] * aa[d]).sum();
    Ok((q, constant))
}

/// Spin expansion of `x^T A x` with `z_i = 2 s_i - 1`: returns fields, couplings and the constant.
///
/// Coordinates are centered on each axis, so the fields stay small for grids centered on the origin.
pub fn ising_form_bits(grid: &Grid, a: &Matrix) -> Result<(Vec<f64>, Matrix, f64)> {
    let dims = grid.dims();
    if a.len() != dims || a.iter().any(|r| r.len() != dims) {
        return Err(Error::Shape(format!(
            "{}x{} form for a {dims}-dimensional grid",
            a.len(),
            a.len()
        )));
    }
    let n = grid.total_qubits();
    let mut w = vec![0.0; n];
    let mut dim_of = vec![0; n];
    let mut center = vec![0.0; dims];
    for d in 0..dims {
        let (wd, off) = coordinate_weights(grid, d)?;
        center[d] = off + 0.5 * wd.iter().sum::<f64>();
        for i in 0..n {
            if wd[i] != 0.0 {
                w[i] = wd[i];
                dim_of[i] = d;
            }
        }
    }
    let ac: Vec<f64> = (0..dims)
        .map(|d| (0..dims).map(|e| a[d][e] * center[e]).sum())
        .collect();
    let h: Vec<f64> = (0..n).map(|i| ac[dim_of[i]] * w[i]).collect();
    let mut j = vec![vec![0.0; n]; n];
    let mut constant: f64 = (0..dims).map(|d| center[d] * ac[d]).sum();
    for i in 0..n {
        for k in 0..n {
            let v = 0.25 * a[dim_of[i]][dim_of[k]] * w[i] * w[k];
            if i == k {
                constant += v;
            } else {
                j[i][k] = v;
            }
        }
    }
    Ok((h, j, constant))
}

/// Options for the layered Gaussian construction.
#[derive(Clone, Copy, Debug)]
pub struct GaussianOptions {
    /// Number of refinement steps `K`; each applies `Z(beta / K)`.
    pub steps: usize,
    pub representation: Representation,
    pub simplify: SimplifyOptions,
    /// Largest exponent any partial product of one layer group may reach.
    ///
    /// When `beta / K` exceeds it, `Z(beta / K)` is itself assembled from finer layer groups.
    pub max_exponent: f64,
}

impl Default for GaussianOptions {
    fn default() -> Self {
        Self {
            steps: 8,
            representation: Representation::Amplitude,
            simplify: SimplifyOptions::default(),
            max_exponent: 4.0,
        }
    }
}

fn apply_layers(layers: &[Mpo], state: &mut Mps, opts: &SimplifyOptions) -> Result<()> {
    for layer in layers {
        *state = layer.apply_exact(state)?;
        state.compress(&opts.truncation)?;
    }
    Ok(())
}

/// Zero-mean Gaussian `exp(-x^T Sigma^-2 x / 2)` as `Z(beta/K)^K` applied to the uniform state.
///
/// The result is normalized like a Riemann sample: amplitudes sum to one
/// (amplitude representation) or have unit 2-norm (square-root representation).
pub fn gaussian_mps_nd(sigma: &Matrix, grid: &Grid, opts: &GaussianOptions) -> Result<Mps> {
    if opts.steps == 0 {
        return Err(Error::Argument(
            "at least one refinement step is required".into(),
        ));
    }
    if !(opts.max_exponent.is_finite() && opts.max_exponent > 0.0) {
        return Err(Error::Argument("max_exponent must be positive".into()));
    }
    let dims = grid.dims();
    if dims > 1
        && grid.order() == QubitOrder::A
        && grid
            .axes()
            .iter()
            .all(|ax| ax.qubits == grid.axis(0).qubits)
    {
        // Interleaved order keeps the bond dimension small during the layered products; permute afterwards.
        let interleaved = grid.with_order(QubitOrder::B)?;
        let p = gaussian_mps_nd(sigma, &interleaved, opts)?;
        let out = reorder(
            &p,
            &interleaved.ordering_map(),
            &grid.ordering_map(),
            &opts.simplify.truncation,
        )?;
        return Ok(match opts.representation {
            Representation::Amplitude => out,
            Representation::Sqrt => out.normalized(),
        });
    }
    let a = inverse_square(sigma)?;
    let (h, j, _) = ising_form_bits(grid, &a)?;
    let f = match opts.representation {
        Representation::Amplitude => -0.5,
        Representation::Sqrt => -0.25,
    };
    let k = opts.steps as f64;
    let range = IsingForm::new(h.clone(), j.clone(), C64::new(f / k, 0.0))?.exponent_range();
    // Each refinement step is split into `sub` layer groups so that no partial product strays far from one.
    let sub = (range / opts.max_exponent).ceil().max(1.0) as usize;
    let layers =
        ising_exponential_layers(&IsingForm::new(h, j, C64::new(f / (k * sub as f64), 0.0))?)?;
    let ones = Mps::ones(grid.total_qubits())?;
    let mut state = ones.clone();
    for _ in 0..opts.steps {
        for _ in 0..sub {
            apply_layers(&layers, &mut state, &opts.simplify)?;
        }
        state = simplify(&state, &opts.simplify)?.state;
    }
    Ok(match opts.representation {
        Representation::Amplitude => {
            let total = ones.inner(&state)?;
            state.scaled(C64::new(1.0, 0.0) / total)
        }
        Representation::Sqrt => state.normalized(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    #[test]
    fn covariance_examples() {
        let c = covariance_2d(2.0, 0.5, 0.0).unwrap();
        assert_eq!(c, vec![vec![2.0, 0.0], vec![0.0, 0.5]]);
        let r = covariance_2d(2.0, 0.5, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((r[0][1].abs() - 0.75).abs() < 1e-15 && (r[0][1] - r[1][0]).abs() < 1e-15);
        assert!((r[0][0] - 1.25).abs() < 1e-15);
        let c3 = covariance_3d(2.0, 0.5, 0.0).unwrap();
        assert_eq!(
            c3,
            vec![
                vec![2.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0],
                vec![0.0, 0.0, 0.5]
            ]
        );
        let r3 = covariance_3d(2.0, 0.5, 0.3).unwrap();
        let tr: f64 = (0..3).map(|i| r3[i][i]).sum();
        assert!((tr - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_of_diagonal() {
        let a = inverse_square(&vec![vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(
            (a[0][0] - 0.25).abs() < 1e-15
                && (a[1][1] - 4.0).abs() < 1e-14
                && a[0][1].abs() < 1e-15
        );
        assert!(inverse_square(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(inverse_square(&vec![vec![1.0, 0.1], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn bit_expansion_matches_quadratic_form() {
        let ax = Axis::new(-3.0, 2.0, 3).unwrap();
        let ay = Axis::new(-1.0, 4.0, 3).unwrap();
        let a = vec![vec![1.3, -0.4], vec![-0.4, 0.7]];
        for order in [QubitOrder::A, QubitOrder::B] {
            let grid = Grid::new(vec![ax, ay], order).unwrap();
            let (q, c) = quadratic_form_bits(&grid, &a).unwrap();
            let vals = crate::encoding::dense_grid_values(&grid, &|x: &[f64]| {
                a[0][0] * x[0] * x[0] + 2.0 * a[0][1] * x[0] * x[1] + a[1][1] * x[1] * x[1]
            })
            .unwrap();
            for (code, v) in vals.iter().enumerate() {
                let bits: Vec<usize> = (0..6).map(|i| (code >> (5 - i)) & 1).collect();
                let e: f64 = (0..6)
                    .flat_map(|i| (0..6).map(move |j| (i, j)))
                    .map(|(i, j)| q[i][j] * (bits[i] * bits[j]) as f64)
                    .sum();
                assert!((e + c - v).abs() < 1e-12, "{order:?} {code}");
            }
        }
    }
    #[test]
    fn spin_expansion_matches_quadratic_form() {
        let ax = Axis::new(-3.0, 2.0, 3).unwrap();
        let ay = Axis::new(-1.0, 4.0, 3).unwrap();
        let a = vec![vec![1.3, -0.4], vec![-0.4, 0.7]];
        let grid = Grid::new(vec![ax, ay], QubitOrder::B).unwrap();
        let (h, j, c) = ising_form_bits(&grid, &a).unwrap();
        let form = IsingForm::new(h, j, C64::new(1.0, 0.0)).unwrap();
        let vals = crate::encoding::dense_grid_values(&grid, &|x: &[f64]| {
            a[0][0] * x[0] * x[0] + 2.0 * a[0][1] * x[0] * x[1] + a[1][1] * x[1] * x[1]
        })
        .unwrap();
        for (code, v) in vals.iter().enumerate() {
            let bits: Vec<u8> = (0..6).map(|i| ((code >> (5 - i)) & 1) as u8).collect();
            assert!((form.energy(&bits).re + c - v).abs() < 1e-12, "{code}");
        }
    }
}
