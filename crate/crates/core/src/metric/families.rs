use super::{diag, minkowski, AxisBound, Chart, ChartDomain, MetricError, MetricFamily, Point, Tensor2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

// φ is periodic, so any real value is a valid chart coordinate.
fn angular_axes() -> [AxisBound; 2] {
    [AxisBound::closed(0.0, PI), AxisBound::unbounded()]
}

/// Flat spacetime in Cartesian coordinates; parameter independent.
#[derive(Debug, Clone, Copy, Default)]
pub struct Minkowski;

impl MetricFamily for Minkowski {
    fn name(&self) -> &str {
        "minkowski"
    }
    fn chart(&self) -> Chart {
        Chart::Cartesian
    }
    fn theta0(&self) -> f64 {
        0.0
    }
    fn domain(&self) -> ChartDomain {
        ChartDomain::unbounded()
    }
    fn components(&self, _theta: f64, _x: &Point) -> Tensor2 {
        minkowski()
    }
    fn analytic_derivative(&self, _x: &Point) -> Option<Tensor2> {
        Some(Tensor2::zeros())
    }
}

/// Flat spacetime in spherical coordinates (t, r, ϑ, φ); parameter independent.
#[derive(Debug, Clone, Copy, Default)]
pub struct SphericalMinkowski;

impl MetricFamily for SphericalMinkowski {
    fn name(&self) -> &str {
        "spherical-minkowski"
    }
    fn chart(&self) -> Chart {
        Chart::Spherical
    }
    fn theta0(&self) -> f64 {
        0.0
    }
    fn domain(&self) -> ChartDomain {
        let [th, ph] = angular_axes();
        ChartDomain {
            axes: [AxisBound::unbounded(), AxisBound::open(0.0, f64::INFINITY), th, ph],
        }
    }
    fn components(&self, _theta: f64, x: &Point) -> Tensor2 {
        let r2 = x[1] * x[1];
        let s = x[2].sin();
        diag(-1.0, 1.0, r2, r2 * s * s)
    }
    fn analytic_derivative(&self, _x: &Point) -> Option<Tensor2> {
        Some(Tensor2::zeros())
    }
}

/// g_{μν}(θ) = η_{μν} + θ on the single symmetric component (μ0, ν0).
/// Off-diagonal choices perturb both g_{μ0ν0} and g_{ν0μ0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentPerturbation {
    pub mu: usize,
    pub nu: usize,
}

impl ComponentPerturbation {
    pub fn new(mu: usize, nu: usize) -> Result<Self, MetricError> {
        if mu > 3 || nu > 3 {
            return Err(MetricError::InvalidParameter(format!(
                "component indices must be in 0..4, got ({mu}, {nu})"
            )));
        }
        Ok(Self { mu, nu })
    }

    fn unit(&self) -> Tensor2 {
        let mut e = Tensor2::zeros();
        e[(self.mu, self.nu)] = 1.0;
        e[(self.nu, self.mu)] = 1.0;
        e
    }
}

impl MetricFamily for ComponentPerturbation {
    fn name(&self) -> &str {
        "minkowski-component"
    }
    fn chart(&self) -> Chart {
        Chart::Cartesian
    }
    fn theta0(&self) -> f64 {
        0.0
    }
    fn domain(&self) -> ChartDomain {
        ChartDomain::unbounded()
    }
    fn components(&self, theta: f64, _x: &Point) -> Tensor2 {
        minkowski() + self.unit() * theta
    }
    fn analytic_derivative(&self, _x: &Point) -> Option<Tensor2> {
        Some(self.unit())
    }
}

/// Time dependence a(t) of a spatially uniform perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeProfile {
    Constant { value: f64 },
    /// mean + amplitude·sin(omega·t)
    Harmonic { mean: f64, amplitude: f64, omega: f64 },
}

impl TimeProfile {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { value } => value,
            TimeProfile::Harmonic { mean, amplitude, omega } => mean + amplitude * (omega * t).sin(),
        }
    }
}

/// Which metric component a uniform perturbation drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniformTarget {
    /// g_00 = −1 + θ·a(t): clock-rate (proper-time) perturbation.
    Lapse,
    /// g_0x = g_x0 = θ·a(t): uniform frame displacement along x (proper distance).
    Shift,
}

/// Spatially uniform, time-dependent perturbation of flat spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformPerturbation {
    pub target: UniformTarget,
    pub profile: TimeProfile,
}

impl UniformPerturbation {
    fn shape(&self, t: f64) -> Tensor2 {
        let a = self.profile.at(t);
        let mut e = Tensor2::zeros();
        match self.target {
            UniformTarget::Lapse => e[(0, 0)] = a,
            UniformTarget::Shift => {
                e[(0, 1)] = a;
                e[(1, 0)] = a;
            }
        }
        e
    }
}

impl MetricFamily for UniformPerturbation {
    fn name(&self) -> &str {
        match self.target {
            UniformTarget::Lapse => "proper-time",
            UniformTarget::Shift => "proper-distance",
        }
    }
    fn chart(&self) -> Chart {
        Chart::Cartesian
    }
    fn theta0(&self) -> f64 {
        0.0
    }
    fn domain(&self) -> ChartDomain {
        ChartDomain::unbounded()
    }
    fn components(&self, theta: f64, x: &Point) -> Tensor2 {
        minkowski() + self.shape(x[0]) * theta
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        Some(self.shape(x[0]))
    }
}

/// Optional envelope f(z − t) of a gravitational wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseEnvelope {
    /// exp(−(u − center)²/(2·width²)), u = z − t.
    Gaussian { center: f64, width: f64 },
}

impl PulseEnvelope {
    pub fn at(&self, u: f64) -> f64 {
        match *self {
            PulseEnvelope::Gaussian { center, width } => {
                let d = (u - center) / width;
                (-0.5 * d * d).exp()
            }
        }
    }
}

/// Plus-polarized gravitational wave travelling along z in TT gauge:
/// h_xx = −h_yy = A·f(z − t). Without an envelope this is the broadband
/// constant approximation h_xx = −h_yy ≃ A.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GwPlaneWave {
    pub amplitude0: f64,
    pub envelope: Option<PulseEnvelope>,
}

impl GwPlaneWave {
    fn profile(&self, x: &Point) -> f64 {
        self.envelope.map_or(1.0, |e| e.at(x[3] - x[0]))
    }
}

impl MetricFamily for GwPlaneWave {
    fn name(&self) -> &str {
        "gw-plane-wave"
    }
    fn chart(&self) -> Chart {
        Chart::Cartesian
    }
    fn theta0(&self) -> f64 {
        self.amplitude0
    }
    fn domain(&self) -> ChartDomain {
        ChartDomain::unbounded()
    }
    fn components(&self, theta: f64, x: &Point) -> Tensor2 {
        let h = theta * self.profile(x);
        diag(-1.0, 1.0 + h, 1.0 - h, 1.0)
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        let f = self.profile(x);
        Some(diag(0.0, f, -f, 0.0))
    }
}

/// Schwarzschild family in Schwarzschild coordinates (t, r, ϑ, φ), parameter m.
/// The chart excludes r ≤ `exclusion`·m0 (2.5 by default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schwarzschild {
    pub m0: f64,
    pub exclusion: f64,
}

impl Schwarzschild {
    pub fn new(m0: f64) -> Result<Self, MetricError> {
        if !(m0 >= 0.0) || !m0.is_finite() {
            return Err(MetricError::InvalidParameter(format!("mass must be finite and ≥ 0, got {m0}")));
        }
        Ok(Self { m0, exclusion: 2.5 })
    }
}

impl MetricFamily for Schwarzschild {
    fn name(&self) -> &str {
        "schwarzschild"
    }
    fn chart(&self) -> Chart {
        Chart::Schwarzschild
    }
    fn theta0(&self) -> f64 {
        self.m0
    }
    fn domain(&self) -> ChartDomain {
        let [th, ph] = angular_axes();
        ChartDomain {
            axes: [
                AxisBound::unbounded(),
                AxisBound::open(self.exclusion * self.m0, f64::INFINITY),
                th,
                ph,
            ],
        }
    }
    fn components(&self, m: f64, x: &Point) -> Tensor2 {
        let r = x[1];
        let f = 1.0 - 2.0 * m / r;
        let s = x[2].sin();
        diag(-f, 1.0 / f, r * r, r * r * s * s)
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        let r = x[1];
        let f = 1.0 - 2.0 * self.m0 / r;
        Some(diag(2.0 / r, 2.0 / (r * f * f), 0.0, 0.0))
    }
}

/// Schwarzschild family in isotropic coordinates (t, ρ, ϑ, φ), parameter m.
/// The chart excludes ρ ≤ 1.25·m0, i.e. r ≲ 2.45·m0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isotropic {
    pub m0: f64,
}

impl Isotropic {
    pub fn new(m0: f64) -> Result<Self, MetricError> {
        if !(m0 >= 0.0) || !m0.is_finite() {
            return Err(MetricError::InvalidParameter(format!("mass must be finite and ≥ 0, got {m0}")));
        }
        Ok(Self { m0 })
    }
}

impl MetricFamily for Isotropic {
    fn name(&self) -> &str {
        "isotropic"
    }
    fn chart(&self) -> Chart {
        Chart::Isotropic
    }
    fn theta0(&self) -> f64 {
        self.m0
    }
    fn domain(&self) -> ChartDomain {
        let [th, ph] = angular_axes();
        ChartDomain {
            axes: [
                AxisBound::unbounded(),
                AxisBound::open(1.25 * self.m0, f64::INFINITY),
                th,
                ph,
            ],
        }
    }
    fn components(&self, m: f64, x: &Point) -> Tensor2 {
        let rho = x[1];
        let u = m / (2.0 * rho);
        let lapse = (1.0 - u) / (1.0 + u);
        let psi4 = (1.0 + u).powi(4);
        let s = x[2].sin();
        diag(-lapse * lapse, psi4, psi4 * rho * rho, psi4 * rho * rho * s * s)
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        let rho = x[1];
        let u = self.m0 / (2.0 * rho);
        // d/dm of −((1−u)/(1+u))² and (1+u)⁴, with du/dm = 1/(2ρ)
        let dtt = 2.0 * (1.0 - u) / (rho * (1.0 + u).powi(3));
        let dpsi4 = 2.0 * (1.0 + u).powi(3) / rho;
        let s = x[2].sin();
        Some(diag(dtt, dpsi4, dpsi4 * rho * rho, dpsi4 * rho * rho * s * s))
    }
}

fn closed_universe_shape(x: &Point) -> Tensor2 {
    let sc = x[1].sin();
    let st = x[2].sin();
    diag(-1.0, 1.0, sc * sc, sc * sc * st * st)
}

fn conformal_angular_axes() -> [AxisBound; 3] {
    [AxisBound::open(0.0, PI), AxisBound::open(0.0, PI), AxisBound::unbounded()]
}

/// Matter-dominated closed FLRW universe in conformal time, parameter a_max:
/// ds² = (a_max²/4)(1 − cos η)²[−dη² + dχ² + sin²χ dΩ²].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flrw {
    pub a_max: f64,
}

impl Flrw {
    pub fn new(a_max: f64) -> Result<Self, MetricError> {
        if !(a_max > 0.0) || !a_max.is_finite() {
            return Err(MetricError::InvalidParameter(format!("a_max must be finite and > 0, got {a_max}")));
        }
        Ok(Self { a_max })
    }

    fn conformal_factor(a: f64, eta: f64) -> f64 {
        let c = 1.0 - eta.cos();
        0.25 * a * a * c * c
    }
}

impl MetricFamily for Flrw {
    fn name(&self) -> &str {
        "flrw"
    }
    fn chart(&self) -> Chart {
        Chart::ConformalFlrw
    }
    fn theta0(&self) -> f64 {
        self.a_max
    }
    fn domain(&self) -> ChartDomain {
        let [chi, th, ph] = conformal_angular_axes();
        ChartDomain { axes: [AxisBound::open(0.0, 2.0 * PI), chi, th, ph] }
    }
    fn components(&self, a: f64, x: &Point) -> Tensor2 {
        closed_universe_shape(x) * Self::conformal_factor(a, x[0])
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        // dg/da_max = (2/a_max) g
        Some(closed_universe_shape(x) * (Self::conformal_factor(self.a_max, x[0]) * 2.0 / self.a_max))
    }
}

/// de Sitter universe in conformal time, parameter Λ:
/// ds² = (3/Λ) sec²η [−dη² + dχ² + sin²χ dΩ²].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeSitter {
    pub lambda: f64,
}

impl DeSitter {
    pub fn new(lambda: f64) -> Result<Self, MetricError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(MetricError::InvalidParameter(format!("Λ must be finite and > 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    fn conformal_factor(lambda: f64, eta: f64) -> f64 {
        let c = eta.cos();
        3.0 / (lambda * c * c)
    }
}

impl MetricFamily for DeSitter {
    fn name(&self) -> &str {
        "de-sitter"
    }
    fn chart(&self) -> Chart {
        Chart::ConformalDeSitter
    }
    fn theta0(&self) -> f64 {
        self.lambda
    }
    fn domain(&self) -> ChartDomain {
        let [chi, th, ph] = conformal_angular_axes();
        ChartDomain { axes: [AxisBound::open(-FRAC_PI_2, FRAC_PI_2), chi, th, ph] }
    }
    fn components(&self, lambda: f64, x: &Point) -> Tensor2 {
        closed_universe_shape(x) * Self::conformal_factor(lambda, x[0])
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        // dg/dΛ = −(1/Λ) g
        Some(closed_universe_shape(x) * (-Self::conformal_factor(self.lambda, x[0]) / self.lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{evaluate_metric, metric_parameter_derivative, MetricError};

    #[test]
    fn gw_at_zero_amplitude_is_minkowski() {
        let gw = GwPlaneWave::default();
        let g = evaluate_metric(&gw, 0.0, &[1.3, -2.0, 0.4, 7.0]).unwrap();
        assert_eq!(g, minkowski());
    }

    #[test]
    fn gw_derivative_components() {
        let d = metric_parameter_derivative(&GwPlaneWave::default(), &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d, diag(0.0, 1.0, -1.0, 0.0));
    }

    #[test]
    fn schwarzschild_tt_at_four_masses() {
        let m = 1.5;
        let s = Schwarzschild::new(m).unwrap();
        let g = evaluate_metric(&s, m, &[0.0, 4.0 * m, 1.0, 0.0]).unwrap();
        assert_eq!(g[(0, 0)], -0.5);
    }

    #[test]
    fn schwarzschild_horizon_is_non_finite() {
        // r = 2m is outside the default chart; widen the exclusion to reach it.
        let s = Schwarzschild { m0: 1.0, exclusion: 1.0 };
        let err = evaluate_metric(&s, 1.0, &[0.0, 2.0, 1.0, 0.0]).unwrap_err();
        assert!(matches!(err, MetricError::NonFinite { .. }));
        let default = Schwarzschild::new(1.0).unwrap();
        let err = evaluate_metric(&default, 1.0, &[0.0, 2.4, 1.0, 0.0]).unwrap_err();
        assert!(matches!(err, MetricError::OutsideChart { axis: 1, .. }));
    }

    #[test]
    fn flrw_at_eta_pi() {
        let a = 2.0;
        let f = Flrw::new(a).unwrap();
        let x = [PI, 0.7, 1.1, 0.3];
        let g = evaluate_metric(&f, a, &x).unwrap();
        let sc = 0.7f64.sin();
        let st = 1.1f64.sin();
        let expect = diag(-1.0, 1.0, sc * sc, sc * sc * st * st) * (a * a);
        assert!((g - expect).abs().max() < 1e-14);
    }

    #[test]
    fn flrw_outside_conformal_time_range() {
        let f = Flrw::new(1.0).unwrap();
        assert!(evaluate_metric(&f, 1.0, &[0.0, 1.0, 1.0, 1.0]).is_err());
        assert!(evaluate_metric(&f, 1.0, &[2.0 * PI, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn scale_factor_derivatives_are_proportional_to_metric() {
        let x = [0.9, 1.0, 2.0, 3.0];
        let f = Flrw::new(3.0).unwrap();
        let g = f.components(3.0, &x);
        let d = f.analytic_derivative(&x).unwrap();
        assert!((d - g * (2.0 / 3.0)).abs().max() < 1e-14);

        let ds = DeSitter::new(0.5).unwrap();
        let g = ds.components(0.5, &[0.3, 1.0, 2.0, 3.0]);
        let d = ds.analytic_derivative(&[0.3, 1.0, 2.0, 3.0]).unwrap();
        assert!((d + g / 0.5).abs().max() <= 1e-10 * g.abs().max());
    }

    #[test]
    fn schwarzschild_and_isotropic_coincide_at_zero_mass() {
        let x = [0.2, 1.7, 0.9, 4.0];
        let s = Schwarzschild::new(0.0).unwrap();
        let i = Isotropic::new(0.0).unwrap();
        let flat = SphericalMinkowski.components(0.0, &x);
        assert_eq!(s.components(0.0, &x), flat);
        assert_eq!(i.components(0.0, &x), flat);
    }

    #[test]
    fn component_perturbation_derivative() {
        let c = ComponentPerturbation::new(1, 2).unwrap();
        let d = c.analytic_derivative(&[0.0; 4]).unwrap();
        assert_eq!(d[(1, 2)], 1.0);
        assert_eq!(d[(2, 1)], 1.0);
        assert_eq!(d.iter().filter(|v| **v != 0.0).count(), 2);
        let diag_c = ComponentPerturbation::new(0, 0).unwrap();
        let d = diag_c.analytic_derivative(&[0.0; 4]).unwrap();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d.iter().filter(|v| **v != 0.0).count(), 1);
        assert!(ComponentPerturbation::new(4, 0).is_err());
    }
}
