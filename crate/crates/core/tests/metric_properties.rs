use metric_crb::metric::{
    builtin_families, derivative_cross_check, evaluate_metric, localize, metric_parameter_derivative, AxisWindow,
    BumpProfile, ComponentPerturbation, GwPlaneWave, MetricFamily, ProfileKind, Schwarzschild, DERIVATIVE_TOLERANCE,
};
use proptest::prelude::*;
use std::sync::Arc;

#[test]
fn every_builtin_family_passes_the_derivative_check() {
    for family in builtin_families() {
        for seed in [1, 2, 3] {
            let c = derivative_cross_check(family.as_ref(), 100, seed, DERIVATIVE_TOLERANCE).unwrap();
            assert!(c.passed, "{}: worst ratio {} at {:?}", c.family, c.worst_ratio, c.worst_point);
        }
    }
}

#[test]
fn off_diagonal_component_is_symmetric() {
    let f = ComponentPerturbation::new(0, 1).unwrap();
    let g = f.components(0.3, &[0.0; 4]);
    assert_eq!(g[(0, 1)], 0.3);
    assert_eq!(g[(1, 0)], 0.3);
    assert!(ComponentPerturbation::new(4, 0).is_err());
}

#[test]
fn localized_family_is_the_base_off_support() {
    let base = Arc::new(Schwarzschild::new(1.0).unwrap());
    let bump = BumpProfile::new(
        ProfileKind::Mollifier,
        [None, Some(AxisWindow::new((4.0, 5.0), (3.0, 6.0)).unwrap()), None, None],
    )
    .unwrap();
    let loc = localize(base.clone(), bump).unwrap();
    let outside = [0.0, 8.0, 1.0, 1.0];
    assert_eq!(loc.components(1.3, &outside), base.components(1.0, &outside));
    assert_eq!(metric_parameter_derivative(&loc, &outside).unwrap().abs().max(), 0.0);
    let inside = [0.0, 4.5, 1.0, 1.0];
    assert_eq!(
        metric_parameter_derivative(&loc, &inside).unwrap(),
        metric_parameter_derivative(base.as_ref(), &inside).unwrap()
    );
}

#[test]
fn points_outside_the_chart_are_rejected() {
    let s = Schwarzschild::new(1.0).unwrap();
    assert!(evaluate_metric(&s, 1.0, &[0.0, 1.5, 1.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn component_family_is_affine(mu in 0usize..4, nu in 0usize..4, a in -1.0f64..1.0, b in -1.0f64..1.0,
                                  x in prop::array::uniform4(-10.0f64..10.0)) {
        let f = ComponentPerturbation::new(mu, nu).unwrap();
        let lhs = f.components(a + b, &x) + f.components(0.0, &x);
        let rhs = f.components(a, &x) + f.components(b, &x);
        prop_assert!((lhs - rhs).abs().max() <= 1e-15);
    }

    #[test]
    fn gw_wave_is_linear_in_amplitude(a in -0.1f64..0.1, s in -5.0f64..5.0, x in prop::array::uniform4(-10.0f64..10.0)) {
        let f = GwPlaneWave { amplitude0: 0.0, envelope: None };
        let g0 = f.components(0.0, &x);
        let scaled = (f.components(a, &x) - g0) * s;
        let direct = f.components(a * s, &x) - g0;
        prop_assert!((scaled - direct).abs().max() <= 1e-15);
        let d = metric_parameter_derivative(&f, &x).unwrap();
        prop_assert!(((f.components(a, &x) - g0) - d * a).abs().max() <= 1e-15);
    }

    #[test]
    fn derivative_check_holds_for_any_seed(seed in 0u64..10_000) {
        for family in builtin_families() {
            let c = derivative_cross_check(family.as_ref(), 10, seed, DERIVATIVE_TOLERANCE).unwrap();
            prop_assert!(c.passed, "{}: {}", c.family, c.worst_ratio);
        }
    }
}
