use crate::encoding::distribution::Distribution;
use crate::encoding::sampling::{sample_1d, Representation, Scheme, Source};
use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::tensor::SvdTruncation;

/// Points used to locate the maximum slope of a density.
pub const DERIVATIVE_GRID: usize = 1 << 16;

/// Entropy and purity of the qubit added when refining an `m`-qubit GR state to `m + 1` qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinementRow {
    pub m: usize,
    /// Entropy in bits of the least significant qubit.
    pub entropy: f64,
    pub purity: f64,
    /// `2 sqrt(D_p) |b - a| 2^(-m/2)`.
    pub entropy_bound: f64,
    /// `1 - 2 D_p (b - a)^2 2^(-m)`.
    pub purity_bound: f64,
}

impl RefinementRow {
    pub fn entropy_holds(&self) -> bool {
        self.entropy <= self.entropy_bound
    }

    pub fn purity_holds(&self) -> bool {
        self.purity >= self.purity_bound
    }
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub distribution: Distribution,
    pub interval: (f64, f64),
    /// Maximum of `|p'|` for the density normalized on the interval.
    pub max_derivative: f64,
    pub rows: Vec<RefinementRow>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.entropy_holds() && r.purity_holds())
    }

    /// Fitted `gamma` in `S ~ 2^(-gamma m)`, ignoring rows with vanishing entropy.
    pub fn decay_exponent(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.entropy > 0.0)
            .map(|r| (r.m as f64, r.entropy.log2()))
            .collect();
        fit_slope(&pts).map(|s| -s)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// `max |p'|` of the density normalized on `[a, b]`, by central differences on a dense grid.
pub fn max_derivative(dist: &Distribution, a: f64, b: f64) -> f64 {
    let mass = dist.mass(a, b);
    let h = (b - a) / DERIVATIVE_GRID as f64;
    let eps = h * 1e-3;
    (0..=DERIVATIVE_GRID)
        .map(|i| {
            let x = (a + i as f64 * h).clamp(a + eps, b - eps);
            ((dist.pdf(x + eps) - dist.pdf(x - eps)) / (2.0 * eps)).abs()
        })
        .fold(0.0, f64::max)
        / mass
}

/// Evaluate the single-qubit entropy and purity bounds over a range of resolutions.
pub fn verify_entropy_bounds(
    dist: &Distribution,
    axis_interval: (f64, f64),
    ms: std::ops::RangeInclusive<usize>,
) -> Result<BoundReport> {
    let (a, b) = axis_interval;
    if *ms.start() == 0 {
        return Err(Error::Argument("resolutions start at one qubit".into()));
    }
    let dp = max_derivative(dist, a, b);
    let trunc = SvdTruncation::new(1e-30, None)?;
    let mut rows = Vec::new();
    for m in ms {
        let axis = Axis::new(a, b, m + 1)?;
        let state = sample_1d(
            Source::Named(*dist),
            &axis,
            Scheme::GrIntegral,
            Representation::Sqrt,
            &trunc,
        )?;
        let spec = state.schmidt_spectrum(m)?;
        let purity = spec.weights.iter().map(|w| w * w).sum();
        let scale = 2f64.powi(-(m as i32));
        rows.push(RefinementRow {
            m,
            entropy: spec.entropy(),
            purity,
            entropy_bound: 2.0 * dp.sqrt() * (b - a) * scale.sqrt(),
            purity_bound: 1.0 - 2.0 * dp * (b - a).powi(2) * scale,
        });
    }
    Ok(BoundReport {
        distribution: *dist,
        interval: (a, b),
        max_derivative: dp,
        rows,
    })
}
