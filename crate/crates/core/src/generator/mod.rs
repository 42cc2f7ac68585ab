//! The generator P = ½∫dμ̊ T^{μν} ∂g_{μν}/∂θ at mean-field level: density,
//! quadrature over chart boxes, plateau/shell split and boundary terms.

mod coordinate;
mod reductions;

pub use coordinate::{
    coordinate_independence_check, default_check_region, schwarzschild_isotropic_x, CoordinateCheck,
    CoordinateReport, ShellTestTensor, TestTensorKind,
};
pub use reductions::{
    component_reduction, uniform_reduction, ComponentReduction, UniformReduction,
};

use crate::metric::{
    evaluate_metric, metric_parameter_derivative, sqrt_abs_det, MetricError, MetricFamily, Point, Tensor2, DIM,
};
use crate::numerics::quadrature::richardson_error;
use crate::numerics::{AxisRule, NeumaierSum, Rule};
use crate::stress::{StressEnergyField, StressError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum GeneratorError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Stress(#[from] StressError),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("non-finite generator density at {point:?}")]
    NonFinite { point: Point },
    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e} (P = {value:e})")]
    NotConverged { value: f64, estimate: f64, tolerance: f64 },
    #[error("boundary face on axis {axis} is degenerate (zero extent box)")]
    DegenerateFace { axis: usize },
}

/// Rectilinear chart box with a per-axis quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub lo: Point,
    pub hi: Point,
    #[serde(default)]
    pub rule: Rule,
    pub resolution: [usize; DIM],
}

impl RegionSpec {
    pub fn new(lo: Point, hi: Point, rule: Rule, resolution: [usize; DIM]) -> Result<Self, GeneratorError> {
        let r = Self { lo, hi, rule, resolution };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        for a in 0..DIM {
            if !(self.lo[a] < self.hi[a]) || !self.lo[a].is_finite() || !self.hi[a].is_finite() {
                return Err(GeneratorError::InvalidRegion(format!(
                    "axis {a}: need finite lo < hi, got [{}, {}]",
                    self.lo[a], self.hi[a]
                )));
            }
            if self.resolution[a] < self.rule.min_resolution() {
                return Err(GeneratorError::InvalidRegion(format!(
                    "axis {a}: resolution {} is below the minimum {}",
                    self.resolution[a],
                    self.rule.min_resolution()
                )));
            }
        }
        if let Rule::GaussLegendre { points } = self.rule {
            if points == 0 {
                return Err(GeneratorError::InvalidRegion("Gauss-Legendre needs at least one point".into()));
            }
        }
        Ok(())
    }

    /// Same box with every spacing halved.
    pub fn refined(&self) -> Self {
        Self { resolution: self.resolution.map(|n| self.rule.refined(n)), ..*self }
    }

    /// Resolution multiplied by `factor` (at least the minimum).
    pub fn scaled(&self, factor: f64) -> Self {
        let min = self.rule.min_resolution();
        Self { resolution: self.resolution.map(|n| ((n as f64 * factor).round() as usize).max(min)), ..*self }
    }

    pub fn coordinate_volume(&self) -> f64 {
        (0..DIM).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..DIM).all(|a| x[a] >= self.lo[a] && x[a] <= self.hi[a])
    }

    fn axes(&self) -> [AxisRule; DIM] {
        std::array::from_fn(|a| AxisRule::new(self.lo[a], self.hi[a], self.resolution[a], self.rule))
    }
}

const BLOCK: usize = 4096;

/// Tensor-product quadrature of K integrands at once. Block-parallel with
/// compensated partial sums merged in a fixed order, so the result does not
/// depend on the thread count.
pub fn integrate_box<const K: usize, F>(region: &RegionSpec, f: F) -> Result<[f64; K], GeneratorError>
where
    F: Fn(&Point) -> Result<[f64; K], GeneratorError> + Sync,
{
    region.validate()?;
    let axes = region.axes();
    let n: [usize; DIM] = std::array::from_fn(|a| axes[a].len());
    let total: usize = n.iter().product();
    let blocks = total.div_ceil(BLOCK);
    let partials = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = [NeumaierSum::new(); K];
            for k in b * BLOCK..((b + 1) * BLOCK).min(total) {
                let mut rem = k;
                let mut idx = [0; DIM];
                for a in (0..DIM).rev() {
                    idx[a] = rem % n[a];
                    rem /= n[a];
                }
                let x: Point = std::array::from_fn(|a| axes[a].nodes[idx[a]]);
                let w: f64 = (0..DIM).map(|a| axes[a].weights[idx[a]]).product();
                let v = f(&x)?;
                for c in 0..K {
                    acc[c].add(w * v[c]);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, GeneratorError>>()?;
    let mut out = [NeumaierSum::new(); K];
    for p in partials {
        for c in 0..K {
            out[c].merge(p[c]);
        }
    }
    Ok(out.map(|s| s.value()))
}

/// ½·√|det g(θ0, x)|·T^{μν}(x)·∂g_{μν}/∂θ(x). Points where the measure
/// vanishes (coordinate poles) contribute 0.
pub fn generator_density(
    field: &StressEnergyField,
    family: &dyn MetricFamily,
    x: &Point,
) -> Result<f64, GeneratorError> {
    density_and_scale(field, family, x).map(|(d, _)| d)
}

/// Density together with ½√|g|·Σ|T^{μν}∂g_{μν}|, the scale against which
/// cancellations (e.g. a vanishing trace) are judged.
pub fn density_and_scale(
    field: &StressEnergyField,
    family: &dyn MetricFamily,
    x: &Point,
) -> Result<(f64, f64), GeneratorError> {
    density_and_scale_with(&field.at(x)?, family, x)
}

/// [`density_and_scale`] with T^{μν}(x) already evaluated.
pub(crate) fn density_and_scale_with(
    t: &Tensor2,
    family: &dyn MetricFamily,
    x: &Point,
) -> Result<(f64, f64), GeneratorError> {
    if t.iter().all(|v| *v == 0.0) {
        family.domain().check(family.name(), x)?;
        return Ok((0.0, 0.0));
    }
    let g = evaluate_metric(family, family.theta0(), x)?;
    let measure = sqrt_abs_det(&g);
    if !measure.is_finite() {
        return Err(GeneratorError::NonFinite { point: *x });
    }
    if measure == 0.0 {
        return Ok((0.0, 0.0));
    }
    let dg = metric_parameter_derivative(family, x)?;
    let terms = t.component_mul(&dg);
    let d = 0.5 * measure * terms.sum();
    let s = 0.5 * measure * terms.abs().sum();
    if !d.is_finite() {
        return Err(GeneratorError::NonFinite { point: *x });
    }
    Ok((d, s))
}

/// Pointwise size of the generator density over the quadrature nodes of a
/// region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityScan {
    pub nodes: usize,
    /// max |density|.
    pub max_density: f64,
    /// max of the term scale ½√|g|·Σ|T^{μν}∂g_{μν}|.
    pub max_scale: f64,
    /// max over nodes of |density|/scale (0 where both vanish).
    pub max_relative: f64,
}

/// Evaluates [`density_and_scale`] at every quadrature node of `region`.
pub fn density_scan(
    field: &StressEnergyField,
    family: &dyn MetricFamily,
    region: &RegionSpec,
) -> Result<DensityScan, GeneratorError> {
    region.validate()?;
    let axes = region.axes();
    let n: [usize; DIM] = std::array::from_fn(|a| axes[a].len());
    let total: usize = n.iter().product();
    let per_node = (0..total)
        .into_par_iter()
        .map(|mut k| {
            let mut idx = [0; DIM];
            for a in (0..DIM).rev() {
                idx[a] = k % n[a];
                k /= n[a];
            }
            let x: Point = std::array::from_fn(|a| axes[a].nodes[idx[a]]);
            density_and_scale(field, family, &x)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut scan = DensityScan { nodes: total, max_density: 0.0, max_scale: 0.0, max_relative: 0.0 };
    for (d, s) in per_node {
        scan.max_density = scan.max_density.max(d.abs());
        scan.max_scale = scan.max_scale.max(s);
        if d != 0.0 {
            scan.max_relative = scan.max_relative.max(d.abs() / s);
        }
    }
    Ok(scan)
}

/// Contravariant vector field X^μ(x).
pub type VectorField = Arc<dyn Fn(&Point) -> [f64; DIM] + Send + Sync>;

/// Options for [`integrate_generator`].
#[derive(Clone, Default)]
pub struct IntegrationOptions {
    /// Fail if the Richardson error estimate exceeds this.
    pub tolerance: Option<f64>,
    /// Evaluate the boundary term over the plateau box with this X.
    pub boundary_field: Option<VectorField>,
}

/// Output of [`integrate_generator`]. Values come from the refined grid;
/// `coarse_total` is the base-resolution value used for the error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorResult {
    pub p_total: f64,
    pub p_k: f64,
    pub p_shell: f64,
    pub boundary_term: Option<f64>,
    pub quadrature_error_estimate: f64,
    pub coarse_total: f64,
    pub resolution: [usize; DIM],
    pub refined_resolution: [usize; DIM],
    /// The region cuts through the support of the family's bump.
    pub support_clipped: bool,
    pub warnings: Vec<String>,
}

/// Plateau box of a localized family restricted to the region, if any.
fn plateau_box(family: &dyn MetricFamily, region: &RegionSpec) -> Option<RegionSpec> {
    let bump = family.bump()?;
    let mut k = *region;
    for (a, w) in bump.axes.iter().enumerate() {
        if let Some(w) = w {
            k.lo[a] = w.plateau.0.max(region.lo[a]);
            k.hi[a] = w.plateau.1.min(region.hi[a]);
        }
    }
    k.validate().ok().map(|_| k)
}

fn clipped_axes(family: &dyn MetricFamily, region: &RegionSpec) -> Vec<usize> {
    let Some(bump) = family.bump() else { return vec![] };
    (0..DIM)
        .filter(|&a| match bump.axes[a] {
            Some(w) => w.support.0 < region.lo[a] || w.support.1 > region.hi[a],
            None => false,
        })
        .collect()
}

/// Integrates the generator density over `region` at its resolution and at
/// half the spacing; splits the result into plateau (χ = 1) and transition
/// shell (0 < χ < 1) parts.
pub fn integrate_generator(
    field: &StressEnergyField,
    family: &dyn MetricFamily,
    region: &RegionSpec,
    opts: &IntegrationOptions,
) -> Result<GeneratorResult, GeneratorError> {
    region.validate()?;
    let mut warnings = Vec::new();
    let clipped = clipped_axes(family, region);
    if !clipped.is_empty() {
        warnings.push(format!(
            "region clips the bump support on axes {clipped:?}; the bound assumes the whole perturbation is integrated"
        ));
    }
    let split = |x: &Point| -> Result<[f64; 3], GeneratorError> {
        let d = generator_density(field, family, x)?;
        let on_plateau = family.bump().is_none_or(|b| b.on_plateau(x));
        Ok(if on_plateau { [d, d, 0.0] } else { [d, 0.0, d] })
    };
    let coarse = integrate_box(region, split)?;
    let fine_region = region.refined();
    let fine = integrate_box(&fine_region, split)?;
    let estimate = richardson_error(coarse[0], fine[0], region.rule.order());
    if let Some(tol) = opts.tolerance {
        if estimate > tol {
            return Err(GeneratorError::NotConverged { value: fine[0], estimate, tolerance: tol });
        }
    }
    let boundary = match &opts.boundary_field {
        Some(x) => {
            let k = plateau_box(family, region).unwrap_or(*region);
            Some(boundary_term(field, x, &k, family)?)
        }
        None => None,
    };
    Ok(GeneratorResult {
        p_total: fine[0],
        p_k: fine[1],
        p_shell: fine[2],
        boundary_term: boundary,
        quadrature_error_estimate: estimate,
        coarse_total: coarse[0],
        resolution: region.resolution,
        refined_resolution: fine_region.resolution,
        support_clipped: !clipped.is_empty(),
        warnings,
    })
}

/// Σ over the faces of K of ±∫ √|g| T^{aν} X_ν over the other three
/// coordinates (outward sign), with the metric at θ0. By the divergence
/// theorem this equals ∫_K ∂_a(√|g| T^{aν}X_ν).
pub fn boundary_term(
    field: &StressEnergyField,
    x_field: &VectorField,
    k: &RegionSpec,
    g: &dyn MetricFamily,
) -> Result<f64, GeneratorError> {
    for a in 0..DIM {
        if !(k.hi[a] > k.lo[a]) {
            return Err(GeneratorError::DegenerateFace { axis: a });
        }
    }
    let mut total = NeumaierSum::new();
    for a in 0..DIM {
        // a face integral runs over three axes; reuse integrate_box with the
        // normal axis collapsed to a dummy of unit length at minimum resolution
        let face = RegionSpec {
            lo: std::array::from_fn(|b| if b == a { 0.0 } else { k.lo[b] }),
            hi: std::array::from_fn(|b| if b == a { 1.0 } else { k.hi[b] }),
            rule: k.rule,
            resolution: std::array::from_fn(|b| if b == a { k.rule.min_resolution() } else { k.resolution[b] }),
        };
        for (side, sign) in [(k.lo[a], -1.0), (k.hi[a], 1.0)] {
            let flux = integrate_box(&face, |y: &Point| {
                let mut p = *y;
                p[a] = side;
                let gm = evaluate_metric(g, g.theta0(), &p)?;
                let measure = sqrt_abs_det(&gm);
                if measure == 0.0 {
                    return Ok([0.0]);
                }
                let xu = x_field(&p);
                let t = field.at(&p)?;
                let mut v = 0.0;
                for nu in 0..DIM {
                    let x_lower: f64 = (0..DIM).map(|l| gm[(nu, l)] * xu[l]).sum();
                    v += t[(a, nu)] * x_lower;
                }
                Ok([measure * v])
            })?[0];
            total.add(sign * flux);
        }
    }
    Ok(total.value())
}
