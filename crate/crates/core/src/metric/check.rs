//! Analytic-versus-finite-difference check of ∂g/∂θ at random chart points.

use super::{
    finite_difference_derivative, localize, max_abs, AxisWindow, BumpProfile, ComponentPerturbation, DeSitter,
    Flrw, GwPlaneWave, Isotropic, MetricError, MetricFamily, Minkowski, Point, ProfileKind, PulseEnvelope,
    Schwarzschild, SphericalMinkowski, TimeProfile, UniformPerturbation, UniformTarget,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Default relative tolerance of the cross-check.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;
/// Absolute floor, for components whose derivative vanishes.
pub const DERIVATIVE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub family: String,
    pub points: usize,
    /// Points without a closed-form derivative (nothing to compare).
    pub skipped: usize,
    /// max |analytic − fd| over points and components.
    pub max_error: f64,
    /// max over points of |analytic − fd|/(tolerance·|analytic|_max + floor);
    /// the check passes when this is ≤ 1.
    pub worst_ratio: f64,
    pub worst_point: Option<Point>,
    pub passed: bool,
}

/// Compares the analytic derivative with Richardson central differences at
/// `points` uniform random points of the family's sampling box.
pub fn derivative_cross_check(
    family: &dyn MetricFamily,
    points: usize,
    seed: u64,
    tolerance: f64,
) -> Result<DerivativeCheck, MetricError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = family.domain().sample_box();
    let (mut max_error, mut worst_ratio, mut worst_point, mut skipped) = (0.0f64, 0.0f64, None, 0);
    for _ in 0..points {
        let x: Point = std::array::from_fn(|i| rng.random_range(bounds[i].0..=bounds[i].1));
        let Some(a) = family.analytic_derivative(&x) else {
            skipped += 1;
            continue;
        };
        let f = finite_difference_derivative(family, &x, family.fd_step())?;
        let err = max_abs(&(a - f));
        let ratio = err / (tolerance * max_abs(&a) + DERIVATIVE_FLOOR);
        max_error = max_error.max(err);
        if ratio > worst_ratio || worst_point.is_none() {
            worst_ratio = worst_ratio.max(ratio);
            worst_point = Some(x);
        }
    }
    Ok(DerivativeCheck {
        family: family.name().to_string(),
        points,
        skipped,
        max_error,
        worst_ratio,
        worst_point,
        passed: worst_ratio <= 1.0 && skipped < points,
    })
}

/// One instance of every built-in family at a generic fiducial value.
///
/// Central differences carry roundoff of order ε·|g|/h, so instances are
/// chosen where |∂g/∂θ| is not many decades below |g| over the sampling
/// box: a pulse envelope wide compared with the box, and a localized
/// family whose base depends linearly on θ.
pub fn builtin_families() -> Vec<Arc<dyn MetricFamily>> {
    let gw = GwPlaneWave { amplitude0: 1e-3, envelope: None };
    let gw_pulse = GwPlaneWave { amplitude0: 1e-3, envelope: Some(PulseEnvelope::Gaussian { center: 0.0, width: 10.0 }) };
    let lapse = UniformPerturbation {
        target: UniformTarget::Lapse,
        profile: TimeProfile::Harmonic { mean: 1.0, amplitude: 0.3, omega: 2.0 },
    };
    let shift = UniformPerturbation { target: UniformTarget::Shift, profile: TimeProfile::Constant { value: 1.0 } };
    let component: Arc<dyn MetricFamily> = Arc::new(ComponentPerturbation::new(1, 2).expect("valid indices"));
    let bump = BumpProfile::new(
        ProfileKind::Smoothstep { order: 3 },
        [
            Some(AxisWindow::new((-3.0, 3.0), (-6.0, 6.0)).expect("valid window")),
            Some(AxisWindow::new((-2.0, 2.0), (-5.0, 5.0)).expect("valid window")),
            None,
            None,
        ],
    )
    .expect("valid bump");
    vec![
        Arc::new(Minkowski),
        Arc::new(SphericalMinkowski),
        component.clone(),
        Arc::new(lapse),
        Arc::new(shift),
        Arc::new(gw),
        Arc::new(gw_pulse),
        Arc::new(Schwarzschild::new(0.8).expect("valid mass")),
        Arc::new(Isotropic::new(0.8).expect("valid mass")),
        Arc::new(Flrw::new(2.0).expect("valid a_max")),
        Arc::new(DeSitter::new(0.7).expect("valid Λ")),
        Arc::new(localize(component, bump).expect("support inside chart")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_pass() {
        for f in builtin_families() {
            let c = derivative_cross_check(f.as_ref(), 20, 1, DERIVATIVE_TOLERANCE).unwrap();
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn wrong_derivative_is_caught() {
        #[derive(Debug)]
        struct Bad;
        impl MetricFamily for Bad {
            fn name(&self) -> &str {
                "bad"
            }
            fn chart(&self) -> crate::metric::Chart {
                crate::metric::Chart::Cartesian
            }
            fn theta0(&self) -> f64 {
                1.0
            }
            fn domain(&self) -> crate::metric::ChartDomain {
                crate::metric::ChartDomain::unbounded()
            }
            fn components(&self, theta: f64, _x: &Point) -> crate::metric::Tensor2 {
                crate::metric::minkowski() * theta
            }
            fn analytic_derivative(&self, _x: &Point) -> Option<crate::metric::Tensor2> {
                Some(crate::metric::minkowski() * 1.001)
            }
        }
        assert!(!derivative_cross_check(&Bad, 5, 0, DERIVATIVE_TOLERANCE).unwrap().passed);
    }
}
