//! Classical electromagnetic mean fields and the Maxwell stress tensor
//! (Gaussian units, c = 1).

use super::{StressError, TensorSource};
use crate::metric::{evaluate_metric, MetricFamily, Point, Tensor2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

pub type Vec3 = [f64; 3];

/// Electric and magnetic mean fields as functions of the chart point.
///
/// On a curved chart, E_i and B_i are read as the chart components
/// F_{i0} and ½ε_{ijk}F_{jk} of the covariant field strength.
pub trait EmField: Send + Sync + Debug {
    fn fields(&self, x: &Point) -> (Vec3, Vec3);
}

/// Constant E and B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformField {
    pub e: Vec3,
    pub b: Vec3,
}

impl EmField for UniformField {
    fn fields(&self, _x: &Point) -> (Vec3, Vec3) {
        (self.e, self.b)
    }
}

/// Gaussian envelope in the retarded coordinate u = x − t. `width` is the
/// standard deviation of the intensity profile, so the field falls as
/// exp(−(u−center)²/(4·width²)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetardedPulse {
    pub center: f64,
    pub width: f64,
}

/// Separable Gaussian window on the spatial axes (x, y, z). Widths are
/// intensity standard deviations; `None` leaves an axis unwindowed.
/// Breaks the exact Maxwell equations; meant for support studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialEnvelope {
    pub center: Vec3,
    pub width: [Option<f64>; 3],
}

fn gaussian_field_factor(d: f64, width: f64) -> f64 {
    (-d * d / (4.0 * width * width)).exp()
}

/// Linearly polarized wave along +x with E_y = B_z = E1(t, x):
/// E1 = A·cos(ω(x − t) + φ)·pulse(x − t)·window(x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveField {
    pub amplitude: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub pulse: Option<RetardedPulse>,
    #[serde(default)]
    pub window: Option<SpatialEnvelope>,
}

impl PlaneWaveField {
    /// Time-independent uniform E_y = B_z = amplitude.
    pub fn uniform(amplitude: f64) -> Self {
        Self { amplitude, omega: 0.0, phase: 0.0, pulse: None, window: None }
    }

    pub fn monochromatic(amplitude: f64, omega: f64) -> Self {
        Self { omega, ..Self::uniform(amplitude) }
    }

    pub fn e1(&self, x: &Point) -> f64 {
        let u = x[1] - x[0];
        let mut e = self.amplitude * (self.omega * u + self.phase).cos();
        if let Some(p) = self.pulse {
            e *= gaussian_field_factor(u - p.center, p.width);
        }
        if let Some(w) = self.window {
            for i in 0..3 {
                if let Some(s) = w.width[i] {
                    e *= gaussian_field_factor(x[i + 1] - w.center[i], s);
                }
            }
        }
        e
    }
}

impl EmField for PlaneWaveField {
    fn fields(&self, x: &Point) -> (Vec3, Vec3) {
        let e1 = self.e1(x);
        ([0.0, e1, 0.0], [0.0, 0.0, e1])
    }
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Flat-space Maxwell tensor T^{μν} in Cartesian coordinates.
pub fn em_stress_tensor(e: &Vec3, b: &Vec3) -> Tensor2 {
    let u = dot(e, e) + dot(b, b);
    let mut t = Tensor2::zeros();
    t[(0, 0)] = u / (8.0 * PI);
    let s = [e[1] * b[2] - e[2] * b[1], e[2] * b[0] - e[0] * b[2], e[0] * b[1] - e[1] * b[0]];
    for i in 0..3 {
        t[(0, i + 1)] = s[i] / (4.0 * PI);
        t[(i + 1, 0)] = t[(0, i + 1)];
        for j in 0..3 {
            let delta = if i == j { 0.5 * u } else { 0.0 };
            t[(i + 1, j + 1)] = (delta - e[i] * e[j] - b[i] * b[j]) / (4.0 * PI);
        }
    }
    t
}

/// Covariant field strength F_{μν} with F_{i0} = E_i and F_{ij} = ε_{ijk}B_k.
pub fn field_strength(e: &Vec3, b: &Vec3) -> Tensor2 {
    let mut f = Tensor2::zeros();
    for i in 0..3 {
        f[(i + 1, 0)] = e[i];
        f[(0, i + 1)] = -e[i];
    }
    f[(1, 2)] = b[2];
    f[(2, 1)] = -b[2];
    f[(2, 3)] = b[0];
    f[(3, 2)] = -b[0];
    f[(3, 1)] = b[1];
    f[(1, 3)] = -b[1];
    f
}

/// T^{μν} = (1/4π)(F^{μα}F^{ν}_{α} − ¼ g^{μν}F_{αβ}F^{αβ}) on metric g.
/// Returns `None` if g is singular.
pub fn maxwell_tensor(f: &Tensor2, g: &Tensor2) -> Option<Tensor2> {
    let ginv = g.try_inverse()?;
    let fu = ginv * f * ginv;
    let invariant = f.component_mul(&fu).sum();
    let mut t = (fu * g * fu.transpose() - ginv * (0.25 * invariant)) / (4.0 * PI);
    // symmetrize away rounding
    t = (t + t.transpose()) * 0.5;
    Some(t)
}

/// Maxwell stress-energy of an [`EmField`], flat Cartesian or on the θ0
/// metric of a background family.
#[derive(Debug, Clone)]
pub struct MaxwellSource {
    pub field: Arc<dyn EmField>,
    pub background: Option<Arc<dyn MetricFamily>>,
}

impl MaxwellSource {
    pub fn flat(field: Arc<dyn EmField>) -> Self {
        Self { field, background: None }
    }

    pub fn on(field: Arc<dyn EmField>, background: Arc<dyn MetricFamily>) -> Self {
        Self { field, background: Some(background) }
    }
}

impl TensorSource for MaxwellSource {
    fn tensor(&self, x: &Point) -> Result<Tensor2, StressError> {
        let (e, b) = self.field.fields(x);
        match &self.background {
            None => Ok(em_stress_tensor(&e, &b)),
            Some(fam) => {
                let g = evaluate_metric(fam.as_ref(), fam.theta0(), x)?;
                maxwell_tensor(&field_strength(&e, &b), &g).ok_or(StressError::SingularMetric { point: *x })
            }
        }
    }

    fn label(&self) -> String {
        match &self.background {
            None => "maxwell (flat)".into(),
            Some(f) => format!("maxwell on {}", f.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::minkowski;

    #[test]
    fn vacuum_is_zero() {
        assert_eq!(em_stress_tensor(&[0.0; 3], &[0.0; 3]), Tensor2::zeros());
    }

    #[test]
    fn plane_wave_components() {
        let t = em_stress_tensor(&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]);
        let k = 1.0 / (4.0 * PI);
        assert!((0.5 * (t[(1, 1)] - t[(2, 2)]) - 0.5 * k).abs() < 1e-16);
        assert!((t[(0, 0)] - k).abs() < 1e-16);
        assert!((t[(0, 1)] - k).abs() < 1e-16);
        assert!((t[(1, 1)] - k).abs() < 1e-16);
        assert_eq!(t[(2, 2)], 0.0);
    }

    #[test]
    fn diagonal_space_components_match_closed_form() {
        let e = [0.3, -1.2, 0.7];
        let b = [1.1, 0.4, -0.5];
        let t = em_stress_tensor(&e, &b);
        let sq = dot(&e, &e) + dot(&b, &b);
        for j in 0..3 {
            let expect = sq / (8.0 * PI) - (e[j] * e[j] + b[j] * b[j]) / (4.0 * PI);
            assert!((t[(j + 1, j + 1)] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn covariant_form_reduces_to_flat_form() {
        let e = [0.3, -1.2, 0.7];
        let b = [1.1, 0.4, -0.5];
        let flat = em_stress_tensor(&e, &b);
        let cov = maxwell_tensor(&field_strength(&e, &b), &minkowski()).unwrap();
        assert!((flat - cov).abs().max() < 1e-15);
    }

    #[test]
    fn pulse_width_is_an_intensity_width() {
        let f = PlaneWaveField {
            pulse: Some(RetardedPulse { center: 0.0, width: 2.0 }),
            ..PlaneWaveField::uniform(1.0)
        };
        let e = f.e1(&[0.0, 2.0, 0.0, 0.0]);
        assert!((e * e - (-0.5f64).exp()).abs() < 1e-15);
    }
}
