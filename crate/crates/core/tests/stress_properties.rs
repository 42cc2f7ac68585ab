use metric_crb::grid::Grid4;
use metric_crb::metric::{Minkowski, Tensor2};
use metric_crb::numerics::StencilOrder;
use metric_crb::stress::{
    covariant_divergence, em_stress_tensor, support_region, trace, DivergenceOptions, FnSource, MaxwellSource,
    PlaneWaveField, RetardedPulse, StressEnergyField, SupportRegion, ZeroSource,
};
use proptest::prelude::*;
use std::sync::Arc;

fn grid(lo: f64, hi: f64, n: usize) -> Grid4 {
    Grid4::new([lo; 4], [hi; 4], [n; 4]).unwrap()
}

fn eta_trace(t: &Tensor2) -> f64 {
    -t[(0, 0)] + t[(1, 1)] + t[(2, 2)] + t[(3, 3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn maxwell_tensor_is_trace_free(e in prop::array::uniform3(-10.0f64..10.0), b in prop::array::uniform3(-10.0f64..10.0)) {
        let t = em_stress_tensor(&e, &b);
        let scale = t.abs().sum().max(1e-300);
        prop_assert!(eta_trace(&t).abs() <= 1e-13 * scale);
        prop_assert!((t - t.transpose()).abs().max() == 0.0);
    }

    #[test]
    fn energy_density_is_non_negative(e in prop::array::uniform3(-10.0f64..10.0), b in prop::array::uniform3(-10.0f64..10.0)) {
        let t = em_stress_tensor(&e, &b);
        prop_assert!(t[(0, 0)] >= 0.0);
        prop_assert!(t[(0, 0)] >= t[(0, 1)].abs().max(t[(0, 2)].abs()).max(t[(0, 3)].abs()) * (1.0 - 1e-12));
    }
}

#[test]
fn plane_wave_is_conserved_in_vacuum() {
    let wave = PlaneWaveField {
        pulse: Some(RetardedPulse { center: 0.0, width: 0.7 }),
        ..PlaneWaveField::monochromatic(2.0, 3.0)
    };
    let field = StressEnergyField::new(Arc::new(MaxwellSource::flat(Arc::new(wave))), grid(-2.0, 2.0, 5));
    let opts = DivergenceOptions { order: StencilOrder::Fourth, step: Some([1e-3; 4]) };
    // |∂T| is at most |T|max·2(ω + 1/width); the origin is a stationary
    // point where a ratio to the local terms would only measure roundoff
    let natural = 4.0 * 2.0 * (3.0 + 1.0 / 0.7);
    for x in [[0.1, 0.3, -0.2, 0.5], [0.0, 0.0, 0.0, 0.0], [-0.4, 0.6, 1.0, -1.0]] {
        let d = covariant_divergence(&field, &Minkowski, &x, &opts).unwrap();
        let worst = d.value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst <= 1e-8 * natural, "{x:?}: {worst}");
        assert!(trace(&field, &Minkowski, &x).unwrap().abs() < 1e-12);
    }
    let d = covariant_divergence(&field, &Minkowski, &[0.1, 0.3, -0.2, 0.5], &opts).unwrap();
    assert!(d.is_conserved(1e-6), "{}", d.relative());
}

#[test]
fn non_conserved_source_is_detected() {
    // T^{00} growing in time with nothing flowing in
    let source = FnSource::new("ramp", |x: &[f64; 4]| {
        let mut t = Tensor2::zeros();
        t[(0, 0)] = 1.0 + x[0];
        t
    });
    let field = StressEnergyField::new(Arc::new(source), grid(-1.0, 1.0, 3));
    let d = covariant_divergence(&field, &Minkowski, &[0.0; 4], &DivergenceOptions::default()).unwrap();
    assert!(!d.is_conserved(1e-6));
    assert!((d.value[0] - 1.0).abs() < 1e-8);
}

#[test]
fn stencil_outside_grid_is_an_error() {
    let field = StressEnergyField::new(Arc::new(ZeroSource), grid(0.0, 1.0, 3));
    let opts = DivergenceOptions { order: StencilOrder::Second, step: Some([0.1; 4]) };
    assert!(covariant_divergence(&field, &Minkowski, &[0.05, 0.5, 0.5, 0.5], &opts).is_err());
}

#[test]
fn support_region_brackets_the_source() {
    let source = FnSource::new("box", |x: &[f64; 4]| {
        let inside = x.iter().all(|v| (0.15..0.65).contains(v));
        Tensor2::identity() * if inside { 1.0 } else { 0.0 }
    });
    let field = StressEnergyField::new(Arc::new(source), grid(0.0, 1.0, 11));
    match support_region(&field, 1e-9).unwrap() {
        SupportRegion::Box { lo, hi, .. } => {
            for a in 0..4 {
                assert!((lo[a] - 0.2).abs() < 1e-12 && (hi[a] - 0.6).abs() < 1e-12, "axis {a}: {lo:?} {hi:?}");
            }
        }
        SupportRegion::Empty => panic!("support not found"),
    }
    let empty = StressEnergyField::new(Arc::new(ZeroSource), grid(0.0, 1.0, 3));
    assert!(support_region(&empty, 1e-9).unwrap().is_empty());
    assert!(support_region(&empty, 0.0).is_err());
}
