//! Coordinate independence of ⟨P⟩: the mass perturbation of flat space
//! written in Schwarzschild and in isotropic coordinates.
//!
//! At m0 = 0 both families share the flat spherical metric and differ by the
//! Lie derivative along X = ∂r/∂m|_ρ ∂_r = ∂_r, which gives
//!
//! P_I − P_S = ∫ (r T^{ϑϑ} + r sin²ϑ T^{φφ}) r² sinϑ d⁴x
//!           = B − ∫ √|g| X_ν ∇_μT^{μν} d⁴x,
//!
//! with B the boundary flux of T^{aν}X_ν. For a conserved T vanishing on ∂K
//! the difference is zero.

use super::{
    boundary_term, density_and_scale_with, integrate_box, GeneratorError, RegionSpec, VectorField,
};
use crate::grid::Grid4;
use crate::metric::{
    evaluate_metric, localize, sqrt_abs_det, AxisWindow, BumpProfile, Isotropic, LocalizedFamily, MetricFamily,
    Point, ProfileKind, Schwarzschild, Tensor2, DIM,
};
use crate::numerics::quadrature::richardson_error;
use crate::numerics::{Rule, StencilOrder};
use crate::stress::{
    covariant_divergence, DivergenceOptions, StressEnergyField, StressError, TensorSource, CONSERVATION_TOLERANCE,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Which bundled test tensor to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestTensorKind {
    /// T^{rr} = τb, T^{ϑϑ} = τp/r², T^{φφ} = τp/(r² sin²ϑ), p = b + r b′/2.
    /// Divergence-free on flat space; its tangential integral vanishes.
    Conserved,
    /// Tangential stress only: T^{ϑϑ} = τb/r², T^{φφ} = τb/(r² sin²ϑ).
    /// Not conserved; its tangential integral is 8π∫τ dt ∫ r b dr ≠ 0.
    NonConserved,
    Zero,
}

/// Compactly supported spherical-shell stress tensor on the flat spherical
/// chart (t, r, ϑ, φ), with separable time and radial profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellTestTensor {
    pub kind: TestTensorKind,
    pub amplitude: f64,
    pub profile: ProfileKind,
    pub time: AxisWindow,
    pub radius: AxisWindow,
}

impl ShellTestTensor {
    /// The bundled tensor: supported in t ∈ (0.1, 0.9), r ∈ (1, 3), with
    /// C⁶ smoothstep edges.
    pub fn bundled(kind: TestTensorKind) -> Self {
        Self {
            kind,
            amplitude: 1.0,
            profile: ProfileKind::Smoothstep { order: 6 },
            time: AxisWindow { plateau: (0.3, 0.7), support: (0.1, 0.9) },
            radius: AxisWindow { plateau: (1.5, 2.5), support: (1.0, 3.0) },
        }
    }

    fn radial(&self, r: f64) -> (f64, f64) {
        (
            self.amplitude * self.radius.factor(&self.profile, r),
            self.amplitude * self.radius.factor_derivative(&self.profile, r),
        )
    }
}

impl TensorSource for ShellTestTensor {
    fn tensor(&self, x: &Point) -> Result<Tensor2, StressError> {
        let mut t = Tensor2::zeros();
        let tau = self.time.factor(&self.profile, x[0]);
        if tau == 0.0 || self.kind == TestTensorKind::Zero {
            return Ok(t);
        }
        let r = x[1];
        let (b, db) = self.radial(r);
        let (rr, tangential) = match self.kind {
            TestTensorKind::Conserved => (b, b + 0.5 * r * db),
            TestTensorKind::NonConserved => (0.0, b),
            TestTensorKind::Zero => unreachable!(),
        };
        let s2 = x[2].sin().powi(2);
        t[(1, 1)] = tau * rr;
        t[(2, 2)] = tau * tangential / (r * r);
        // T^{φφ} diverges at the poles, where the measure vanishes
        t[(3, 3)] = if s2 == 0.0 { 0.0 } else { tau * tangential / (r * r * s2) };
        Ok(t)
    }
    fn label(&self) -> String {
        format!("spherical shell test tensor ({:?})", self.kind)
    }
}

/// X^μ = ∂x^μ/∂m of the isotropic → Schwarzschild map at m = 0, i.e. ∂_r.
pub fn schwarzschild_isotropic_x() -> VectorField {
    Arc::new(|_: &Point| [0.0, 1.0, 0.0, 0.0])
}

/// Default region: t ∈ [0, 1], r ∈ [0.5, 3.5], full sphere, 32 trapezoid
/// nodes per axis.
pub fn default_check_region() -> RegionSpec {
    RegionSpec {
        lo: [0.0, 0.5, 0.0, 0.0],
        hi: [1.0, 3.5, PI, 2.0 * PI],
        rule: Rule::Trapezoid,
        resolution: [32; DIM],
    }
}

/// Inputs of [`coordinate_independence_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateCheck {
    pub tensor: ShellTestTensor,
    pub region: RegionSpec,
    /// Profile of the bump localizing the mass perturbation; its plateau is
    /// the test tensor's support and its support the region's t and r range.
    pub bump_profile: ProfileKind,
    pub divergence: DivergenceOptions,
    pub conservation_tolerance: f64,
}

impl CoordinateCheck {
    pub fn bundled(kind: TestTensorKind) -> Self {
        Self {
            tensor: ShellTestTensor::bundled(kind),
            region: default_check_region(),
            bump_profile: ProfileKind::Mollifier,
            divergence: DivergenceOptions { order: StencilOrder::Fourth, step: Some([1e-3; 4]) },
            conservation_tolerance: CONSERVATION_TOLERANCE,
        }
    }
}

/// Output of [`coordinate_independence_check`]. P values are from the
/// refined grid; `coarse_*` from the base grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateReport {
    pub p_schwarzschild: f64,
    pub p_isotropic: f64,
    /// ∫(r T^{ϑϑ} + r sin²ϑ T^{φφ}) r² sinϑ d⁴x.
    pub angular_integral: f64,
    /// max |∇_μT^{μν}| over max term scale, base-grid nodes off the poles.
    pub divergence_residual: f64,
    /// P_I − P_S on the refined grid.
    pub difference: f64,
    /// P_I − P_S on the base grid.
    pub coarse_difference: f64,
    /// Sum of the Richardson error estimates of P_I and P_S.
    pub quadrature_error_estimate: f64,
    /// Flux of T^{aν}X_ν through ∂K.
    pub boundary_term: f64,
    /// ∫√|g| X_ν ∇_μT^{μν} on the base grid.
    pub divergence_integral: f64,
    /// Tangential integral on the base grid, for comparison with
    /// `boundary_term − divergence_integral`.
    pub coarse_angular_integral: f64,
    pub conserved: bool,
    pub resolution: [usize; DIM],
    pub refined_resolution: [usize; DIM],
    pub warnings: Vec<String>,
}

impl CoordinateReport {
    /// B − ∫√|g| X·∇T, which should match the tangential integral.
    pub fn identity_rhs(&self) -> f64 {
        self.boundary_term - self.divergence_integral
    }
}

fn localized_pair(check: &CoordinateCheck) -> Result<(LocalizedFamily, LocalizedFamily), GeneratorError> {
    let t = &check.tensor;
    let reg = &check.region;
    let bump = BumpProfile::new(
        check.bump_profile,
        [
            Some(AxisWindow::new(t.time.support, (reg.lo[0], reg.hi[0]))?),
            Some(AxisWindow::new(t.radius.support, (reg.lo[1], reg.hi[1]))?),
            None,
            None,
        ],
    )?;
    let s = localize(Arc::new(Schwarzschild::new(0.0)?), bump.clone())?;
    let i = localize(Arc::new(Isotropic::new(0.0)?), bump)?;
    Ok((s, i))
}

/// Computes ⟨P⟩ for the bump-localized mass perturbation in Schwarzschild
/// and isotropic coordinates (m0 = 0), the tangential integral, the boundary
/// flux and the divergence of the test tensor.
pub fn coordinate_independence_check(check: &CoordinateCheck) -> Result<CoordinateReport, GeneratorError> {
    let region = check.region;
    region.validate()?;
    let (fs, fi) = localized_pair(check)?;
    // field grid with stencil room around the region
    let pad = 0.05 * (region.hi[1] - region.lo[1]).min(region.hi[0] - region.lo[0]);
    let grid = Grid4::new(
        [region.lo[0] - pad, (region.lo[1] - pad).max(0.5 * region.lo[1]), region.lo[2], region.lo[3] - pad],
        [region.hi[0] + pad, region.hi[1] + pad, region.hi[2], region.hi[3] + pad],
        [2; DIM],
    )
    .map_err(StressError::from)?;
    let field = StressEnergyField::new(Arc::new(check.tensor), grid);

    let integrand = |x: &Point| -> Result<[f64; 3], GeneratorError> {
        let t = field.at(x)?;
        let (ps, _) = density_and_scale_with(&t, &fs, x)?;
        let (pi, _) = density_and_scale_with(&t, &fi, x)?;
        let (r, s) = (x[1], x[2].sin());
        let angular = if s == 0.0 { 0.0 } else { (r * t[(2, 2)] + r * s * s * t[(3, 3)]) * r * r * s };
        Ok([ps, pi, angular])
    };
    let coarse = integrate_box(&region, integrand)?;
    let fine_region = region.refined();
    let fine = integrate_box(&fine_region, integrand)?;
    let order = region.rule.order();
    let estimate = richardson_error(coarse[0], fine[0], order) + richardson_error(coarse[1], fine[1], order);

    let x_field = schwarzschild_isotropic_x();
    let boundary = boundary_term(&field, &x_field, &region, &fs)?;

    // divergence identity on the base grid; the residual is the largest
    // |∇T| over the largest term scale, both tracked as order independent
    // maxima of non-negative floats
    let background: &dyn MetricFamily = &fs;
    let worst = AtomicU64::new(0.0f64.to_bits());
    let worst_scale = AtomicU64::new(0.0f64.to_bits());
    let div_integrand = |x: &Point| -> Result<[f64; 1], GeneratorError> {
        if on_pole(x) {
            return Ok([0.0]);
        }
        let g = evaluate_metric(background, background.theta0(), x)?;
        let measure = sqrt_abs_det(&g);
        let d = covariant_divergence(&field, background, x, &check.divergence)?;
        for nu in 0..DIM {
            worst.fetch_max(d.value[nu].abs().to_bits(), Ordering::Relaxed);
            worst_scale.fetch_max(d.scale[nu].to_bits(), Ordering::Relaxed);
        }
        let xu = x_field(x);
        let mut v = 0.0;
        for nu in 0..DIM {
            let x_lower: f64 = (0..DIM).map(|l| g[(nu, l)] * xu[l]).sum();
            v += d.value[nu] * x_lower;
        }
        Ok([measure * v])
    };
    let divergence_integral = integrate_box(&region, div_integrand)?[0];
    let (worst, worst_scale) =
        (f64::from_bits(worst.load(Ordering::Relaxed)), f64::from_bits(worst_scale.load(Ordering::Relaxed)));
    let divergence_residual = if worst == 0.0 { 0.0 } else { worst / worst_scale };
    let conserved = divergence_residual <= check.conservation_tolerance;

    let mut warnings = Vec::new();
    if !conserved {
        warnings.push(format!(
            "test tensor is not divergence-free (relative residual {divergence_residual:.3e}); P_I = P_S is not expected"
        ));
    }
    Ok(CoordinateReport {
        p_schwarzschild: fine[0],
        p_isotropic: fine[1],
        angular_integral: fine[2],
        divergence_residual,
        difference: fine[1] - fine[0],
        coarse_difference: coarse[1] - coarse[0],
        quadrature_error_estimate: estimate,
        boundary_term: boundary,
        divergence_integral,
        coarse_angular_integral: coarse[2],
        conserved,
        resolution: region.resolution,
        refined_resolution: fine_region.resolution,
        warnings,
    })
}

// √|g| ∝ sinϑ vanishes on the axis, and derivative stencils would leave the chart
fn on_pole(x: &Point) -> bool {
    x[2].sin().abs() < 1e-12
}
