use std::f64::consts::{PI, SQRT_2};

use libm::erfc;

use crate::error::{Error, Result};

/// One-dimensional test densities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution {
    /// Normal density with standard deviation `sigma`.
    Gaussian { sigma: f64, mu: f64 },
    /// Density of `exp(Y)` with `Y` normal of mean `mu` and deviation `sigma`.
    LogNormal { sigma: f64, mu: f64 },
    /// Cauchy density with half width `sigma`.
    Lorentzian { sigma: f64, mu: f64 },
    /// `exp(-x) sin(2 sigma x)^2 cos(3 sigma x)^2`, normalized numerically on the sampling interval.
    NonConvex { sigma: f64 },
    /// Constant density.
    Uniform,
}

impl Distribution {
    pub fn gaussian(sigma: f64, mu: f64) -> Result<Self> {
        check_width(sigma)?;
        Ok(Distribution::Gaussian { sigma, mu })
    }

    pub fn log_normal(sigma: f64, mu: f64) -> Result<Self> {
        check_width(sigma)?;
        Ok(Distribution::LogNormal { sigma, mu })
    }

    pub fn lorentzian(sigma: f64, mu: f64) -> Result<Self> {
        check_width(sigma)?;
        Ok(Distribution::Lorentzian { sigma, mu })
    }

    pub fn non_convex(sigma: f64) -> Result<Self> {
        check_width(sigma)?;
        Ok(Distribution::NonConvex { sigma })
    }

    /// Parse a distribution name with its parameters.
    pub fn from_name(name: &str, sigma: f64, mu: f64) -> Result<Self> {
        match name.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "gaussian" | "normal" => Self::gaussian(sigma, mu),
            "lognormal" | "log-normal" => Self::log_normal(sigma, mu),
            "lorentzian" | "cauchy" => Self::lorentzian(sigma, mu),
            "nonconvex" | "non-convex" => Self::non_convex(sigma),
            "uniform" | "constant" => Ok(Distribution::Uniform),
            other => Err(Error::Parse(format!(
                "unknown distribution '{other}' (gaussian, lognormal, lorentzian, nonconvex, uniform)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::LogNormal { .. } => "lognormal",
            Distribution::Lorentzian { .. } => "lorentzian",
            Distribution::NonConvex { .. } => "nonconvex",
            Distribution::Uniform => "uniform",
        }
    }

    /// Unnormalized for `NonConvex`; a unit constant for `Uniform`.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Gaussian { sigma, mu } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma)
            }
            Distribution::LogNormal { sigma, mu } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma * x)
                }
            }
            Distribution::Lorentzian { sigma, mu } => {
                sigma / (PI * ((x - mu).powi(2) + sigma * sigma))
            }
            Distribution::NonConvex { sigma } => {
                (-x).exp() * (2.0 * sigma * x).sin().powi(2) * (3.0 * sigma * x).cos().powi(2)
            }
            Distribution::Uniform => 1.0,
        }
    }

    /// Probability mass in `[lo, hi]`, or `None` when only numerical integration is available.
    ///
    /// Tail masses are evaluated with complementary functions to avoid cancellation.
    pub fn cell_mass(&self, lo: f64, hi: f64) -> Option<f64> {
        match *self {
            Distribution::Gaussian { sigma, mu } => {
                Some(normal_mass((lo - mu) / sigma, (hi - mu) / sigma))
            }
            Distribution::LogNormal { sigma, mu } => {
                let z = |x: f64| {
                    if x <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        (x.ln() - mu) / sigma
                    }
                };
                Some(normal_mass(z(lo), z(hi)))
            }
            Distribution::Lorentzian { sigma, mu } => {
                let (z1, z2) = ((lo - mu) / sigma, (hi - mu) / sigma);
                let d = if z1 * z2 > 0.0 {
                    ((z2 - z1) / (1.0 + z1 * z2)).atan()
                } else {
                    z2.atan() - z1.atan()
                };
                Some(d / PI)
            }
            Distribution::NonConvex { .. } => None,
            Distribution::Uniform => Some(hi - lo),
        }
    }

    /// Intervals used for the one-dimensional studies.
    pub fn default_interval(&self) -> (f64, f64) {
        match *self {
            Distribution::Gaussian { sigma, mu } => (mu - 6.0 * sigma, mu + 6.0 * sigma),
            Distribution::LogNormal { sigma, mu } => (1e-16, mu + 50.0 * sigma),
            Distribution::Lorentzian { sigma, mu } => (mu - 10.0 * sigma, mu + 10.0 * sigma),
            Distribution::NonConvex { sigma } => (0.0, 7.0 * sigma),
            Distribution::Uniform => (0.0, 1.0),
        }
    }

    /// `integral_a^b pdf`, exact where a CDF exists and adaptive Simpson otherwise.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.cell_mass(a, b).unwrap_or_else(|| {
            // Split into pieces finer than the oscillation period before adapting.
            let pieces = 256;
            let h = (b - a) / pieces as f64;
            (0..pieces)
                .map(|i| {
                    adaptive_simpson(
                        &|x| self.pdf(x),
                        a + i as f64 * h,
                        a + (i + 1) as f64 * h,
                        1e-14,
                    )
                })
                .sum()
        })
    }
}

fn check_width(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "width parameter must be positive, got {sigma}"
        )))
    }
}

/// `Phi(z2) - Phi(z1)` for the standard normal.
fn normal_mass(z1: f64, z2: f64) -> f64 {
    let phi = |z: f64| 0.5 * erfc(-z / SQRT_2);
    let sf = |z: f64| 0.5 * erfc(z / SQRT_2);
    let m = if z1 >= 0.0 {
        sf(z1) - sf(z2)
    } else {
        phi(z2) - phi(z1)
    };
    m.max(0.0)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}
