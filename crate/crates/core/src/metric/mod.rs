//! One-parameter families of spacetime metrics.
//!
//! A [`MetricFamily`] maps a parameter value θ and a chart point to the
//! covariant components g_{μν}(x; θ), signature (−,+,+,+). The quantity the
//! rest of the crate consumes is the parameter derivative ∂g_{μν}/∂θ at the
//! fiducial value θ0, obtained analytically when a family provides it and by
//! a once-Richardson-extrapolated central difference otherwise.
//!
//! Units are geometric (G = c = 1) throughout.

mod bump;
mod check;
mod families;
mod localized;
mod tabulated;

pub use bump::{bump_value, AxisWindow, BumpProfile, ProfileKind};
pub use check::{builtin_families, derivative_cross_check, DerivativeCheck, DERIVATIVE_FLOOR, DERIVATIVE_TOLERANCE};
pub use families::{
    ComponentPerturbation, DeSitter, Flrw, GwPlaneWave, Isotropic, Minkowski, PulseEnvelope,
    Schwarzschild, SphericalMinkowski, TimeProfile, UniformPerturbation, UniformTarget,
};
pub use localized::{localize, LocalizedFamily};
pub use tabulated::TabulatedFamily;

use crate::numerics::fd;
use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A point in a 4-dimensional coordinate chart, time coordinate first.
pub type Point = [f64; 4];

/// Rank-2 tensor components in a chart. Metric components are covariant;
/// stress-energy components are contravariant.
pub type Tensor2 = Matrix4<f64>;

/// Spacetime dimension. Fixed.
pub const DIM: usize = 4;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("{family}: coordinate {axis} = {value} lies outside the chart domain [{lo}, {hi}]")]
    OutsideChart {
        family: String,
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{family}: non-finite metric component at {point:?} (singular point)")]
    NonFinite { family: String, point: Point },
    #[error("finite-difference step {step:e} is below the resolution of theta0 = {theta0:e}")]
    StepUnderflow { step: f64, theta0: f64 },
    #[error("bump support on axis {axis} [{lo}, {hi}] exceeds the chart domain of {family}")]
    SupportOutsideChart {
        family: String,
        axis: usize,
        lo: f64,
        hi: f64,
    },
    #[error("invalid bump profile: {0}")]
    InvalidBump(String),
    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),
}

/// Named coordinate systems used by the built-in families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// (t, x, y, z)
    Cartesian,
    /// (t, r, ϑ, φ) on flat space.
    Spherical,
    /// (t, r, ϑ, φ) with Schwarzschild radius r.
    Schwarzschild,
    /// (t, ρ, ϑ, φ) with isotropic radius ρ.
    Isotropic,
    /// (η, χ, θ, φ) with conformal time η ∈ (0, 2π).
    ConformalFlrw,
    /// (η, χ, θ, φ) with conformal time η ∈ (−π/2, π/2).
    ConformalDeSitter,
}

impl Chart {
    pub fn name(&self) -> &'static str {
        match self {
            Chart::Cartesian => "cartesian",
            Chart::Spherical => "spherical",
            Chart::Schwarzschild => "schwarzschild",
            Chart::Isotropic => "isotropic",
            Chart::ConformalFlrw => "conformal-flrw",
            Chart::ConformalDeSitter => "conformal-de-sitter",
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Interval of valid values for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBound {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl AxisBound {
    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub const fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: true }
    }

    pub const fn unbounded() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }

    /// A finite sub-interval safely inside the bound, used for random sampling.
    pub fn sample_interval(&self) -> (f64, f64) {
        let lo = if self.lo.is_finite() { self.lo } else { -10.0 };
        let hi = if self.hi.is_finite() { self.hi } else { lo.max(-10.0) + 20.0 };
        let pad = 0.01 * (hi - lo);
        (
            if self.lo_open { lo + pad } else { lo },
            if self.hi_open { hi - pad } else { hi },
        )
    }
}

/// Coordinate box on which a family is declared valid. Singular loci such as
/// horizons are excluded by the bounds themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub axes: [AxisBound; DIM],
}

impl ChartDomain {
    pub const fn unbounded() -> Self {
        Self { axes: [AxisBound::unbounded(); DIM] }
    }

    pub fn check(&self, family: &str, x: &Point) -> Result<(), MetricError> {
        for (axis, (b, &v)) in self.axes.iter().zip(x).enumerate() {
            if !b.contains(v) {
                return Err(MetricError::OutsideChart {
                    family: family.to_string(),
                    axis,
                    value: v,
                    lo: b.lo,
                    hi: b.hi,
                });
            }
        }
        Ok(())
    }

    pub fn sample_box(&self) -> [(f64, f64); DIM] {
        std::array::from_fn(|i| self.axes[i].sample_interval())
    }
}

/// A one-parameter family g_{μν}(x; θ) on a fixed coordinate chart.
///
/// Implementations only provide raw components; domain checks, finiteness
/// checks and the finite-difference fallback live in [`evaluate_metric`] and
/// [`metric_parameter_derivative`].
pub trait MetricFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn chart(&self) -> Chart;
    /// Fiducial parameter value.
    fn theta0(&self) -> f64;
    fn domain(&self) -> ChartDomain;
    /// Covariant components at (θ, x). Must be symmetric.
    fn components(&self, theta: f64, x: &Point) -> Tensor2;
    /// ∂g_{μν}/∂θ at θ0, when known in closed form.
    fn analytic_derivative(&self, _x: &Point) -> Option<Tensor2> {
        None
    }
    /// Bump function localizing the family, if any.
    fn bump(&self) -> Option<&BumpProfile> {
        None
    }
    /// Step for the finite-difference parameter derivative.
    fn fd_step(&self) -> f64 {
        default_fd_step(self.theta0())
    }
}

/// h = max(1e-6·|θ0|, 1e-8).
pub fn default_fd_step(theta0: f64) -> f64 {
    (1e-6 * theta0.abs()).max(1e-8)
}

/// Metric components at (θ, x), with chart-domain and finiteness checks.
pub fn evaluate_metric(
    family: &dyn MetricFamily,
    theta: f64,
    x: &Point,
) -> Result<Tensor2, MetricError> {
    family.domain().check(family.name(), x)?;
    let g = family.components(theta, x);
    ensure_finite(family, x, g)
}

/// ∂g_{μν}/∂θ at θ0: analytic if available, else Richardson-extrapolated
/// central differences with the family's step.
pub fn metric_parameter_derivative(
    family: &dyn MetricFamily,
    x: &Point,
) -> Result<Tensor2, MetricError> {
    family.domain().check(family.name(), x)?;
    match family.analytic_derivative(x) {
        Some(d) => ensure_finite(family, x, d),
        None => finite_difference_derivative(family, x, family.fd_step()),
    }
}

/// Parameter derivative by central differences at θ0 ± h and θ0 ± h/2,
/// Richardson-combined. Ignores any analytic derivative.
pub fn finite_difference_derivative(
    family: &dyn MetricFamily,
    x: &Point,
    step: f64,
) -> Result<Tensor2, MetricError> {
    let theta0 = family.theta0();
    if !(step > 0.0) || theta0 + 0.5 * step == theta0 || theta0 - 0.5 * step == theta0 {
        return Err(MetricError::StepUnderflow { step, theta0 });
    }
    family.domain().check(family.name(), x)?;
    let d = fd::richardson_central(|th| family.components(th, x), theta0, step);
    ensure_finite(family, x, d)
}

fn ensure_finite(family: &dyn MetricFamily, x: &Point, m: Tensor2) -> Result<Tensor2, MetricError> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(m)
    } else {
        Err(MetricError::NonFinite { family: family.name().to_string(), point: *x })
    }
}

/// diag(−1, 1, 1, 1).
pub fn minkowski() -> Tensor2 {
    Tensor2::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

pub(crate) fn diag(a: f64, b: f64, c: f64, d: f64) -> Tensor2 {
    Tensor2::from_diagonal(&nalgebra::Vector4::new(a, b, c, d))
}

/// Largest |A_{μν} − A_{νμ}|.
pub fn max_asymmetry(m: &Tensor2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Largest absolute component.
pub fn max_abs(m: &Tensor2) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Square root of |det g|.
pub fn sqrt_abs_det(g: &Tensor2) -> f64 {
    det4(g).abs().sqrt()
}

/// Laplace expansion in 2×2 minors of the first two and last two rows.
fn det4(m: &Tensor2) -> f64 {
    let minor = |r: usize, a: usize, b: usize| m[(r, a)] * m[(r + 1, b)] - m[(r, b)] * m[(r + 1, a)];
    let (s01, s02, s03) = (minor(0, 0, 1), minor(0, 0, 2), minor(0, 0, 3));
    let (s12, s13, s23) = (minor(0, 1, 2), minor(0, 1, 3), minor(0, 2, 3));
    let (c01, c02, c03) = (minor(2, 0, 1), minor(2, 0, 2), minor(2, 0, 3));
    let (c12, c13, c23) = (minor(2, 1, 2), minor(2, 1, 3), minor(2, 2, 3));
    s01 * c23 - s02 * c13 + s03 * c12 + s12 * c03 - s13 * c02 + s23 * c01
}
