use metric_crb::estimator::{
    classical_fisher, crb_saturation_check, histogram_fisher, linear_estimator, simulate_readout, EstimatorError,
    MeasurementModel,
};
use metric_crb::probe::{crlb_amplitude, GaussianProbeState, SpectrumSpec, DC_MULTIPLIER};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model(omega: f64, n_bar: f64, r: f64, a_true: f64) -> (MeasurementModel, f64) {
    let s = SpectrumSpec::Monochromatic { omega, n_bar, phase: 0.0 }.build(1.0, DC_MULTIPLIER, None).unwrap();
    let report = crlb_amplitude(&GaussianProbeState::squeezed(s, r, 1.0).unwrap()).unwrap();
    (MeasurementModel::from_report(&report, a_true), report.crlb)
}

#[test]
fn same_seed_same_samples() {
    let (m, _) = model(20.0, 100.0, 0.3, 0.01);
    let a = simulate_readout(&m, 200_000, 11).unwrap();
    let b = simulate_readout(&m, 200_000, 11).unwrap();
    let c = simulate_readout(&m, 200_000, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn prefix_does_not_depend_on_length() {
    let (m, _) = model(20.0, 100.0, 0.0, 0.0);
    let a = simulate_readout(&m, 70_000, 5).unwrap();
    let b = simulate_readout(&m, 140_000, 5).unwrap();
    assert_eq!(a[..], b[..70_000]);
}

#[test]
fn zero_samples_is_an_error() {
    let (m, _) = model(20.0, 100.0, 0.0, 0.0);
    assert_eq!(simulate_readout(&m, 0, 1), Err(EstimatorError::NoSamples));
    assert_eq!(linear_estimator(&[], &m, 1).unwrap_err(), EstimatorError::NoSamples);
}

#[test]
fn zero_slope_is_an_error() {
    let m = MeasurementModel { offset: 0.0, slope: 0.0, var_x2: 1.0, a_true: 0.0 };
    let samples = simulate_readout(&m, 10, 1).unwrap();
    assert_eq!(linear_estimator(&samples, &m, 1).unwrap_err(), EstimatorError::ZeroSlope);
}

#[test]
fn variance_never_beats_bound_beyond_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let omega = rng.random_range(7.0..100.0);
        let n_bar = 10f64.powf(rng.random_range(0.0..4.0));
        let r = rng.random_range(0.0..1.5);
        let a_true = rng.random_range(-0.1..0.1);
        let (m, crlb) = model(omega, n_bar, r, a_true);
        let n = 20_000;
        let samples = simulate_readout(&m, n, case).unwrap();
        let run = linear_estimator(&samples, &m, case).unwrap();
        let se = run.variance * (2.0 / (n - 1) as f64).sqrt();
        assert!(run.variance >= crlb - 3.0 * se, "case {case}: var {} crlb {crlb}", run.variance);
        assert!((run.mean - a_true).abs() <= 5.0 * run.standard_error, "case {case}: biased");
    }
}

#[test]
fn gaussian_readout_saturates() {
    let (m, crlb) = model(62.83185307179586, 1e4, 1.0, 1e-3);
    let s = SpectrumSpec::Monochromatic { omega: 62.83185307179586, n_bar: 1e4, phase: 0.0 }
        .build(1.0, DC_MULTIPLIER, None)
        .unwrap();
    let report = crlb_amplitude(&GaussianProbeState::squeezed(s, 1.0, 1.0).unwrap()).unwrap();
    let sat = crb_saturation_check(&report, &m);
    assert!(sat.saturated, "{sat:?}");
    assert!((classical_fisher(&m) * crlb - 1.0).abs() < 1e-12);
    let samples = simulate_readout(&m, 1_000_000, 3).unwrap();
    let fh = histogram_fisher(&samples, &m, 64, 6.0).unwrap();
    assert!((fh * crlb - 1.0).abs() < 0.01, "histogram Fisher {fh} vs {}", 1.0 / crlb);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn estimates_invert_the_readout(slope in 0.1f64..1e4, offset in -5.0f64..5.0, a in -1.0f64..1.0, seed in 0u64..1000) {
        let m = MeasurementModel { offset, slope, var_x2: 0.0, a_true: a };
        let samples = simulate_readout(&m, 100, seed).unwrap();
        let run = linear_estimator(&samples, &m, seed).unwrap();
        prop_assert!((run.mean - a).abs() <= 1e-12 * (1.0 + a.abs()) + 1e-12 * offset.abs() / slope);
    }
}
