use crate::encoding::distribution::{adaptive_simpson, Distribution};
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid};
use crate::mps::{dense_limit, Mps};
use crate::tensor::{SvdTruncation, C64};

/// How a density is turned into per-point weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Probability mass of every cell `[x_s, x_{s+1})`.
    GrIntegral,
    /// `dx p(x_s)`, normalized.
    Riemann,
    /// Composite Simpson weights `1, 4, 2, 4, ..., 2, 4, 1` times `p(x_s)`, normalized.
    Simpson,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gr" | "gr-integral" | "integral" => Ok(Scheme::GrIntegral),
            "riemann" | "uniform" => Ok(Scheme::Riemann),
            "simpson" => Ok(Scheme::Simpson),
            other => Err(Error::Parse(format!(
                "unknown sampling scheme '{other}' (gr, riemann, simpson)"
            ))),
        }
    }
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::GrIntegral => "gr",
            Scheme::Riemann => "riemann",
            Scheme::Simpson => "simpson",
        }
    }
}

/// Whether amplitudes carry the weights themselves or their square roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    Amplitude,
    Sqrt,
}

impl std::str::FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "amplitude" | "linear" | "wavefunction" => Ok(Representation::Amplitude),
            "sqrt" | "probability" => Ok(Representation::Sqrt),
            other => Err(Error::Parse(format!(
                "unknown representation '{other}' (amplitude, sqrt)"
            ))),
        }
    }
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::Amplitude => "amplitude",
            Representation::Sqrt => "sqrt",
        }
    }
}

/// A density given either by name or as a closure.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    Named(Distribution),
    Function(&'a dyn Fn(f64) -> f64),
}

impl<'a> Source<'a> {
    fn pdf(&self, x: f64) -> f64 {
        match self {
            Source::Named(d) => d.pdf(x),
            Source::Function(f) => f(x),
        }
    }

    fn cell(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Source::Named(d) => d
                .cell_mass(lo, hi)
                .unwrap_or_else(|| adaptive_simpson(&|x| d.pdf(x), lo, hi, 1e-12))
                .max(0.0),
            Source::Function(f) => adaptive_simpson(*f, lo, hi, 1e-12),
        }
    }
}

impl From<Distribution> for Source<'static> {
    fn from(d: Distribution) -> Self {
        Source::Named(d)
    }
}

/// Classical composite Simpson weight of point `s` out of `n`.
pub fn simpson_theta(s: usize, n: usize) -> f64 {
    if s == 0 || s + 1 == n {
        1.0
    } else if s % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Cell masses `CDF(x_{s+1}) - CDF(x_s)` (not renormalized).
pub fn gr_weights(source: Source<'_>, axis: &Axis) -> Vec<f64> {
    (0..axis.points())
        .map(|s| source.cell(axis.x(s), axis.x(s + 1)))
        .collect()
}

/// Sampling weights of `scheme`, normalized to sum to one when the total is positive.
pub fn weights(source: Source<'_>, axis: &Axis, scheme: Scheme) -> Vec<f64> {
    let n = axis.points();
    let mut w: Vec<f64> = match scheme {
        Scheme::GrIntegral => gr_weights(source, axis),
        Scheme::Riemann => (0..n)
            .map(|s| axis.spacing() * source.pdf(axis.x(s)))
            .collect(),
        Scheme::Simpson => (0..n)
            .map(|s| simpson_theta(s, n) * source.pdf(axis.x(s)))
            .collect(),
    };
    let total: f64 = w.iter().sum();
    if total != 0.0 && total.is_finite() {
        w.iter_mut().for_each(|x| *x /= total);
    }
    w
}

fn check_dense(qubits: usize) -> Result<()> {
    if qubits > dense_limit() {
        return Err(Error::Resource(format!(
            "{qubits} qubits exceed the dense construction limit of {}",
            dense_limit()
        )));
    }
    Ok(())
}

fn amplitudes(w: &[f64], rep: Representation) -> Result<Vec<C64>> {
    match rep {
        Representation::Amplitude => Ok(w.iter().map(|&x| C64::new(x, 0.0)).collect()),
        Representation::Sqrt => w
            .iter()
            .map(|&x| {
                if x < 0.0 {
                    Err(Error::Domain(format!(
                        "negative weight {x} under square-root representation"
                    )))
                } else {
                    Ok(C64::new(x.sqrt(), 0.0))
                }
            })
            .collect(),
    }
}

/// Sample a one-dimensional density into a register MPS through the dense vector.
pub fn sample_1d(
    source: Source<'_>,
    axis: &Axis,
    scheme: Scheme,
    rep: Representation,
    trunc: &SvdTruncation,
) -> Result<Mps> {
    check_dense(axis.qubits)?;
    let w = weights(source, axis, scheme);
    Mps::from_dense(&amplitudes(&w, rep)?, trunc)
}

/// Raw function table `f(x_s)` as an MPS (no weighting or normalization).
pub fn function_mps(f: &dyn Fn(f64) -> C64, axis: &Axis, trunc: &SvdTruncation) -> Result<Mps> {
    check_dense(axis.qubits)?;
    let v: Vec<C64> = axis.coordinates().into_iter().map(f).collect();
    Mps::from_dense(&v, trunc)
}

/// Dense register vector of `f` on a multivariate grid, indexed in the grid's qubit order.
pub fn dense_grid_values(grid: &Grid, f: &dyn Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
    let n = grid.total_qubits();
    check_dense(n)?;
    let map = grid.ordering_map();
    let inv = map.inverse();
    let dims = grid.dims();
    let mut x = vec![0.0; dims];
    let mut idx = vec![0usize; dims];
    let mut out = Vec::with_capacity(1 << n);
    for code in 0..1usize << n {
        idx.iter_mut().for_each(|v| *v = 0);
        for (pos, &(d, k)) in inv.iter().enumerate() {
            let bit = (code >> (n - 1 - pos)) & 1;
            idx[d] |= bit << (grid.axis(d).qubits - 1 - k);
        }
        for d in 0..dims {
            x[d] = grid.axis(d).x(idx[d]);
        }
        out.push(f(&x));
    }
    Ok(out)
}

/// Riemann sampling of a multivariate density (dense construction, limited register size).
pub fn sample_grid(
    grid: &Grid,
    f: &dyn Fn(&[f64]) -> f64,
    rep: Representation,
    trunc: &SvdTruncation,
) -> Result<Mps> {
    let mut w = dense_grid_values(grid, f)?;
    let total: f64 = w.iter().sum();
    if total != 0.0 && total.is_finite() {
        w.iter_mut().for_each(|x| *x /= total);
    }
    Mps::from_dense(&amplitudes(&w, rep)?, trunc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_has_equal_cells() {
        let ax = Axis::new(0.0, 1.0, 6).unwrap();
        let w = gr_weights(Distribution::Uniform.into(), &ax);
        assert!(w.iter().all(|&x| (x - 1.0 / 64.0).abs() < 1e-15));
        for scheme in [Scheme::GrIntegral, Scheme::Riemann] {
            let p = sample_1d(
                Distribution::Uniform.into(),
                &ax,
                scheme,
                Representation::Amplitude,
                &SvdTruncation::default(),
            )
            .unwrap();
            assert!(p.entropy_profile().iter().all(|&s| s < 1e-10));
        }
        // Simpson weights alternate and drop at the ends, leaving a small amount of entanglement.
        let p = sample_1d(
            Distribution::Uniform.into(),
            &ax,
            Scheme::Simpson,
            Representation::Amplitude,
            &SvdTruncation::default(),
        )
        .unwrap();
        assert!(p.entropy_profile().iter().all(|&s| s < 0.2));
    }

    #[test]
    fn symmetric_single_qubit_cells() {
        let ax = Axis::new(-6.0, 6.0, 1).unwrap();
        let w = gr_weights(Distribution::gaussian(1.0, 0.0).unwrap().into(), &ax);
        assert!((w[0] - w[1]).abs() < 1e-15 && (w[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn simpson_pattern() {
        let t: Vec<f64> = (0..8).map(|s| simpson_theta(s, 8)).collect();
        assert_eq!(t, vec![1.0, 4.0, 2.0, 4.0, 2.0, 4.0, 2.0, 1.0]);
    }

    #[test]
    fn weights_are_normalized_and_nonnegative() {
        let ax = Axis::new(0.0, 7.0, 9).unwrap();
        for scheme in [Scheme::GrIntegral, Scheme::Riemann, Scheme::Simpson] {
            let w = weights(Distribution::non_convex(1.0).unwrap().into(), &ax, scheme);
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_of_negative_is_rejected() {
        let ax = Axis::new(-1.0, 1.0, 3).unwrap();
        let f = |x: f64| x;
        let r = sample_1d(
            Source::Function(&f),
            &ax,
            Scheme::Riemann,
            Representation::Sqrt,
            &SvdTruncation::default(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn grid_values_follow_ordering() {
        use crate::grid::QubitOrder;
        let ax = Axis::new(0.0, 4.0, 2).unwrap();
        let f = |x: &[f64]| 10.0 * x[0] + x[1];
        let a = dense_grid_values(&Grid::new(vec![ax, ax], QubitOrder::A).unwrap(), &f).unwrap();
        let b = dense_grid_values(&Grid::new(vec![ax, ax], QubitOrder::B).unwrap(), &f).unwrap();
        // Register |0 1 1 0>: order A reads (x0, x1) = (1, 2); order B reads bits x0 = 01, x1 = 10.
        assert_eq!(a[0b0110], 12.0);
        assert_eq!(b[0b0110], 12.0);
        assert_eq!(b[0b1000], 20.0);
        assert_eq!(a[0b1000], 20.0);
        assert_eq!(b[0b0100], 2.0);
    }
}
