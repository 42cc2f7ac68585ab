//! Classical mean-field stress-energy tensors T^{μν}: sources, trace,
//! covariant divergence and support.
//!
//! A [`StressEnergyField`] pairs a [`TensorSource`] with the rectilinear
//! sampling grid on which it is declared. The grid bounds the stencils used
//! for derivatives and is the sample set for [`support_region`].

mod em;
mod tabulated;

pub use em::{
    em_stress_tensor, field_strength, maxwell_tensor, EmField, MaxwellSource, PlaneWaveField, RetardedPulse,
    SpatialEnvelope, UniformField, Vec3,
};
pub use tabulated::TabulatedTensor;

use crate::grid::{Grid4, GridError, GridFile, GridKind};
use crate::metric::{evaluate_metric, Chart, MetricError, MetricFamily, Point, Tensor2, DIM};
use crate::numerics::fd::{central, StencilOrder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum StressError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("derivative stencil on axis {axis} leaves the field grid at {point:?}")]
    StencilOutOfBounds { axis: usize, point: Point },
    #[error("metric is singular at {point:?}")]
    SingularMetric { point: Point },
    #[error("support tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("grid file holds `{0:?}` data, expected stress-energy")]
    WrongKind(GridKind),
}

/// Anything that yields contravariant components T^{μν}(x).
pub trait TensorSource: Send + Sync + fmt::Debug {
    fn tensor(&self, x: &Point) -> Result<Tensor2, StressError>;
    fn label(&self) -> String;
    /// Natural derivative step for tabulated data.
    fn native_spacing(&self) -> Option<[f64; DIM]> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSource;

impl TensorSource for ZeroSource {
    fn tensor(&self, _x: &Point) -> Result<Tensor2, StressError> {
        Ok(Tensor2::zeros())
    }
    fn label(&self) -> String {
        "zero".into()
    }
}

/// Pressureless dust at rest, T^{μν} = ρ δ^μ_0 δ^ν_0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dust {
    pub density: f64,
}

impl TensorSource for Dust {
    fn tensor(&self, _x: &Point) -> Result<Tensor2, StressError> {
        let mut t = Tensor2::zeros();
        t[(0, 0)] = self.density;
        Ok(t)
    }
    fn label(&self) -> String {
        format!("dust(rho={})", self.density)
    }
}

/// A source given by a closure. The closure must return a symmetric tensor.
pub struct FnSource<F> {
    label: String,
    f: F,
}

impl<F> FnSource<F>
where
    F: Fn(&Point) -> Tensor2 + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self { label: label.into(), f }
    }
}

impl<F> fmt::Debug for FnSource<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSource").field("label", &self.label).finish()
    }
}

impl<F> TensorSource for FnSource<F>
where
    F: Fn(&Point) -> Tensor2 + Send + Sync,
{
    fn tensor(&self, x: &Point) -> Result<Tensor2, StressError> {
        Ok((self.f)(x))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// A stress-energy source together with its sampling grid.
#[derive(Debug, Clone)]
pub struct StressEnergyField {
    source: Arc<dyn TensorSource>,
    grid: Grid4,
}

impl StressEnergyField {
    pub fn new(source: Arc<dyn TensorSource>, grid: Grid4) -> Self {
        Self { source, grid }
    }

    /// Loads a tabulated stress-energy grid file.
    pub fn from_grid_file(file: &GridFile) -> Result<Self, StressError> {
        let t = TabulatedTensor::new(file)?;
        let grid = t.grid();
        Ok(Self::new(Arc::new(t), grid))
    }

    pub fn at(&self, x: &Point) -> Result<Tensor2, StressError> {
        self.source.tensor(x)
    }

    pub fn grid(&self) -> &Grid4 {
        &self.grid
    }

    pub fn source(&self) -> &Arc<dyn TensorSource> {
        &self.source
    }

    pub fn label(&self) -> String {
        self.source.label()
    }

    /// Samples the source at every grid node into a grid file.
    pub fn tabulate(&self, chart: Chart) -> Result<GridFile, StressError> {
        let values = (0..self.grid.len())
            .into_par_iter()
            .map(|k| self.at(&self.grid.node(k)).map(|t| crate::grid::pack_symmetric(&t).to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GridFile { kind: GridKind::StressEnergy, chart, theta0: 0.0, grid: self.grid, values })
    }
}

/// g_{μν}(x) T^{μν}(x) with the metric at the family's θ0.
pub fn trace(field: &StressEnergyField, g: &dyn MetricFamily, x: &Point) -> Result<f64, StressError> {
    let gm = evaluate_metric(g, g.theta0(), x)?;
    Ok(gm.component_mul(&field.at(x)?).sum())
}

/// Settings for [`covariant_divergence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceOptions {
    pub order: StencilOrder,
    /// Per-axis step; defaults to the source's native spacing, else 1e-4.
    pub step: Option<[f64; DIM]>,
}

impl Default for DivergenceOptions {
    fn default() -> Self {
        Self { order: StencilOrder::Second, step: None }
    }
}

/// Default relative residual below which a field counts as conserved.
pub const CONSERVATION_TOLERANCE: f64 = 1e-6;

/// ∇_μT^{μν} at one point, with the sum of absolute term magnitudes per
/// component as the local scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSample {
    pub value: [f64; DIM],
    pub scale: [f64; DIM],
}

impl DivergenceSample {
    /// max_ν |value_ν| / scale_ν (0 where both vanish).
    pub fn relative(&self) -> f64 {
        (0..DIM).fold(0.0f64, |acc, nu| {
            let v = self.value[nu].abs();
            let r = if v == 0.0 { 0.0 } else { v / self.scale[nu] };
            acc.max(r)
        })
    }

    pub fn is_conserved(&self, tol: f64) -> bool {
        self.relative() <= tol
    }
}

fn offset(x: &Point, axis: usize, s: f64) -> Point {
    let mut y = *x;
    y[axis] += s;
    y
}

/// Christoffel symbols Γ^a_{bc} at x by central differences of g at θ0.
pub fn christoffel(
    g: &dyn MetricFamily,
    x: &Point,
    step: &[f64; DIM],
    order: StencilOrder,
) -> Result<[[[f64; DIM]; DIM]; DIM], StressError> {
    let theta0 = g.theta0();
    let gm = evaluate_metric(g, theta0, x)?;
    let ginv = gm.try_inverse().ok_or(StressError::SingularMetric { point: *x })?;
    // dg[c] = ∂_c g_{ab}
    let mut dg = [Tensor2::zeros(); DIM];
    for c in 0..DIM {
        // propagate domain errors before differencing
        for &(o, _) in order.taps() {
            evaluate_metric(g, theta0, &offset(x, c, o * step[c]))?;
        }
        dg[c] = central(|s| g.components(theta0, &offset(x, c, s)), 0.0, step[c], order);
    }
    let mut gamma = [[[0.0; DIM]; DIM]; DIM];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in b..DIM {
                let mut acc = 0.0;
                for d in 0..DIM {
                    acc += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gamma[a][b][c] = 0.5 * acc;
                gamma[a][c][b] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

/// ∇_μT^{μν} = ∂_μT^{μν} + Γ^μ_{μλ}T^{λν} + Γ^ν_{μλ}T^{μλ}, all derivatives
/// by central differences. The stencil must stay inside the field grid.
pub fn covariant_divergence(
    field: &StressEnergyField,
    g: &dyn MetricFamily,
    x: &Point,
    opts: &DivergenceOptions,
) -> Result<DivergenceSample, StressError> {
    let step = opts.step.or_else(|| field.source.native_spacing()).unwrap_or([1e-4; DIM]);
    let reach = order_reach(opts.order);
    let grid = field.grid();
    for a in 0..DIM {
        let (lo, hi) = (x[a] - reach * step[a], x[a] + reach * step[a]);
        let slack = 1e-12 * (grid.hi[a] - grid.lo[a]);
        if lo < grid.lo[a] - slack || hi > grid.hi[a] + slack {
            return Err(StressError::StencilOutOfBounds { axis: a, point: *x });
        }
    }
    let t = field.at(x)?;
    let gamma = christoffel(g, x, &step, opts.order)?;
    let mut value = [0.0; DIM];
    let mut scale = [0.0; DIM];
    for mu in 0..DIM {
        let mut d = Tensor2::zeros();
        for &(o, c) in opts.order.taps() {
            d += field.at(&offset(x, mu, o * step[mu]))? * (c / step[mu]);
        }
        for nu in 0..DIM {
            value[nu] += d[(mu, nu)];
            scale[nu] += d[(mu, nu)].abs();
        }
    }
    for nu in 0..DIM {
        for mu in 0..DIM {
            for lam in 0..DIM {
                let a = gamma[mu][mu][lam] * t[(lam, nu)];
                let b = gamma[nu][mu][lam] * t[(mu, lam)];
                value[nu] += a + b;
                scale[nu] += a.abs() + b.abs();
            }
        }
    }
    Ok(DivergenceSample { value, scale })
}

fn order_reach(order: StencilOrder) -> f64 {
    order.taps().iter().fold(0.0f64, |m, (o, _)| m.max(o.abs()))
}

/// Result of [`support_region`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SupportRegion {
    /// Every sample vanished; no region.
    Empty,
    Box { lo: Point, hi: Point, lo_index: [usize; DIM], hi_index: [usize; DIM] },
}

impl SupportRegion {
    pub fn is_empty(&self) -> bool {
        matches!(self, SupportRegion::Empty)
    }
}

/// Smallest grid-aligned box holding every node with some
/// |T^{μν}| > tol·(global max).
pub fn support_region(field: &StressEnergyField, tol: f64) -> Result<SupportRegion, StressError> {
    if !(tol > 0.0) {
        return Err(StressError::InvalidTolerance(tol));
    }
    let grid = *field.grid();
    let mags = (0..grid.len())
        .into_par_iter()
        .map(|k| field.at(&grid.node(k)).map(|t| crate::metric::max_abs(&t)))
        .collect::<Result<Vec<f64>, _>>()?;
    let peak = mags.iter().cloned().fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Ok(SupportRegion::Empty);
    }
    let mut lo_index = grid.n;
    let mut hi_index = [0; DIM];
    for (k, &m) in mags.iter().enumerate() {
        if m > tol * peak {
            let idx = grid.unflatten(k);
            for a in 0..DIM {
                lo_index[a] = lo_index[a].min(idx[a]);
                hi_index[a] = hi_index[a].max(idx[a]);
            }
        }
    }
    Ok(SupportRegion::Box {
        lo: std::array::from_fn(|a| grid.coord(a, lo_index[a])),
        hi: std::array::from_fn(|a| grid.coord(a, hi_index[a])),
        lo_index,
        hi_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Minkowski, SphericalMinkowski};

    fn cube(n: usize) -> Grid4 {
        Grid4::new([-1.0; 4], [1.0; 4], [n; 4]).unwrap()
    }

    #[test]
    fn dust_trace_is_minus_density() {
        let f = StressEnergyField::new(Arc::new(Dust { density: 2.5 }), cube(3));
        assert_eq!(trace(&f, &Minkowski, &[0.0; 4]).unwrap(), -2.5);
        let z = StressEnergyField::new(Arc::new(ZeroSource), cube(3));
        assert_eq!(trace(&z, &Minkowski, &[0.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn non_conserved_test_tensor_has_unit_divergence() {
        let src = FnSource::new("x0", |x: &Point| {
            let mut t = Tensor2::zeros();
            t[(0, 0)] = x[0];
            t
        });
        let f = StressEnergyField::new(Arc::new(src), cube(5));
        let d = covariant_divergence(&f, &Minkowski, &[0.2, 0.1, 0.0, -0.3], &Default::default()).unwrap();
        assert!((d.value[0] - 1.0).abs() < 1e-10);
        assert!(d.value[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn constant_dust_is_conserved() {
        let f = StressEnergyField::new(Arc::new(Dust { density: 1.0 }), cube(3));
        let d = covariant_divergence(&f, &Minkowski, &[0.0; 4], &Default::default()).unwrap();
        assert_eq!(d.value, [0.0; 4]);
        assert!(d.is_conserved(CONSERVATION_TOLERANCE));
    }

    #[test]
    fn stencil_outside_grid_is_rejected() {
        let f = StressEnergyField::new(Arc::new(Dust { density: 1.0 }), cube(3));
        let opts = DivergenceOptions { step: Some([0.1; 4]), ..Default::default() };
        let e = covariant_divergence(&f, &Minkowski, &[0.95, 0.0, 0.0, 0.0], &opts).unwrap_err();
        assert!(matches!(e, StressError::StencilOutOfBounds { axis: 0, .. }));
    }

    #[test]
    fn christoffel_of_flat_spherical_chart() {
        let x = [0.0, 2.0, 1.0, 0.5];
        let g = christoffel(&SphericalMinkowski, &x, &[1e-4; 4], StencilOrder::Fourth).unwrap();
        // Γ^r_{ϑϑ} = −r, Γ^ϑ_{rϑ} = 1/r, Γ^φ_{ϑφ} = cot ϑ
        assert!((g[1][2][2] + 2.0).abs() < 1e-9);
        assert!((g[2][1][2] - 0.5).abs() < 1e-9);
        assert!((g[3][2][3] - 1.0f64.tan().recip()).abs() < 1e-9);
    }

    #[test]
    fn support_of_central_block_and_empty_field() {
        let src = FnSource::new("block", |x: &Point| {
            if x.iter().all(|v| v.abs() <= 0.5) {
                Tensor2::identity()
            } else {
                Tensor2::zeros()
            }
        });
        let f = StressEnergyField::new(Arc::new(src), cube(9));
        match support_region(&f, 1e-3).unwrap() {
            SupportRegion::Box { lo, hi, lo_index, hi_index } => {
                assert_eq!(lo, [-0.5; 4]);
                assert_eq!(hi, [0.5; 4]);
                assert_eq!((lo_index, hi_index), ([2; 4], [6; 4]));
            }
            SupportRegion::Empty => panic!("expected a box"),
        }
        let z = StressEnergyField::new(Arc::new(ZeroSource), cube(3));
        assert!(support_region(&z, 1e-3).unwrap().is_empty());
        assert!(support_region(&z, 0.0).is_err());
    }
}
