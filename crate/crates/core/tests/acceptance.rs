//! Acceptance criteria, one test each. Every test writes a single
//! `[acceptance] NN name: PASS|FAIL ...` line to stderr (uncaptured) and
//! then asserts. Tests hold a shared lock so wall-clock limits are measured
//! without competing test threads.

use metric_crb::cli::{run_bound, Scenario};
use metric_crb::estimator::{linear_estimator, simulate_readout, MeasurementModel};
use metric_crb::generator::{coordinate_independence_check, density_scan, CoordinateCheck, TestTensorKind};
use metric_crb::metric::{builtin_families, derivative_cross_check};
use metric_crb::probe::{
    commutator_constant, conjugate_spectrum, crlb_amplitude, effective_constant_c, fock_moments, quadrature_variances,
    remainder_variance_wick, smeared_correlator_check, GaussianProbeState, Mode, ModeSpectrum, SpectrumSpec,
    BUNDLED_SEPARATIONS, DC_MULTIPLIER,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

const OMEGA_TAU: f64 = 2.0 * PI * 10.0;
const N_BAR: f64 = 1e4;

const SHOT_NOISE_REL: f64 = 1e-9;
const SHOT_NOISE_TIME: Duration = Duration::from_secs(1);
const SQUEEZE_REL: f64 = 1e-9;
const BROADBAND_REFINEMENT_REL: f64 = 1e-3;
const COMMUTATOR_REL: f64 = 1e-12;
const COMMUTATOR_MODES: usize = 100_000;
const COMMUTATOR_TIME: Duration = Duration::from_secs(1);
const TRACE_NULL_REL: f64 = 1e-12;
const COORDINATE_REFINEMENT_MIN: f64 = 3.0;
const COORDINATE_TIME: Duration = Duration::from_secs(30);
const REDUCTION_REL: f64 = 1e-9;
const MC_SAMPLES: usize = 1_000_000;
const MC_TIME: Duration = Duration::from_secs(10);
const WICK_FOCK_ABS: f64 = 1e-8;
/// Photons per mode; 30 leaves errors of order 1e-1 at |α| = 2, r = 0.8.
const WICK_FOCK_TRUNCATION: usize = 120;
const WICK_FOCK_TIME: Duration = Duration::from_secs(60);
const SLOPE_ABS: f64 = 0.1;
const SCALING_REL: f64 = 0.05;
const CORRELATOR_REL: f64 = 1e-2;
const DERIVATIVE_REL: f64 = 1e-6;
const DERIVATIVE_POINTS: usize = 100;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, name: &str, passed: bool, detail: &str, elapsed: Duration) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "[acceptance] {id:02} {name}: {verdict} ({detail}; {:.3} s)",
        elapsed.as_secs_f64()
    );
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn bound_value(s: &Scenario) -> f64 {
    let r = run_bound(s).expect("bound run");
    r.sections["probe"]["crlb"].as_f64().expect("crlb in report")
}

#[test]
fn c01_monochromatic_shot_noise() {
    let _g = lock();
    let t = Instant::now();
    let s = Scenario::bundled("gw-monochromatic-coherent").unwrap();
    let crlb = bound_value(&s);
    let elapsed = t.elapsed();
    let err = rel(crlb, 1.0 / (OMEGA_TAU * OMEGA_TAU * N_BAR));
    let passed = err <= SHOT_NOISE_REL && elapsed < SHOT_NOISE_TIME;
    report(1, "monochromatic shot noise", passed, &format!("rel err {err:.3e} <= {SHOT_NOISE_REL:e}"), elapsed);
    assert!(passed);
}

#[test]
fn c02_squeezing_gain() {
    let _g = lock();
    let t = Instant::now();
    let base = Scenario::bundled("gw-monochromatic-coherent").unwrap();
    let coherent = bound_value(&base);
    let mut worst = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let mut s = base.clone();
        s.probe.as_mut().unwrap().squeeze_r = r;
        worst = worst.max(rel(bound_value(&s) / coherent, (-2.0 * r).exp()));
    }
    let passed = worst <= SQUEEZE_REL;
    report(2, "squeezing gain e^(-2r)", passed, &format!("max rel err {worst:.3e} <= {SQUEEZE_REL:e}"), t.elapsed());
    assert!(passed);
}

#[test]
fn c03_broadband_shot_noise() {
    let _g = lock();
    let t = Instant::now();
    let s = Scenario::bundled("gw-broadband-coherent").unwrap();
    let crlb = bound_value(&s);
    let p = s.probe.clone().unwrap();
    let spectrum = p.spectrum.build(p.tau, p.dc_multiplier, None).unwrap();
    let closed = rel(crlb, 1.0 / spectrum.weighted_occupation());
    let fine = crlb_amplitude(&s.probe_state(&p, 16).unwrap()).unwrap().crlb;
    let refined = rel(crlb, fine);
    let passed = closed <= SHOT_NOISE_REL && refined <= BROADBAND_REFINEMENT_REL;
    report(
        3,
        "broadband generalized shot noise",
        passed,
        &format!("closed form {closed:.3e} <= {SHOT_NOISE_REL:e}, 16x lattice {refined:.3e} <= {BROADBAND_REFINEMENT_REL:e}"),
        t.elapsed(),
    );
    assert!(passed);
}

#[test]
fn c04_commutator_identity() {
    let _g = lock();
    let t = Instant::now();
    let s = SpectrumSpec::FlatBand { omega_lo: 10.0, omega_hi: 100.0, n_bar: N_BAR, modes: COMMUTATOR_MODES }
        .build(1.0, DC_MULTIPLIER, None)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alpha = s.alpha().iter().map(|a| a * Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).collect();
    let s = s.with_alpha(alpha).unwrap();
    let k = commutator_constant(&s, &conjugate_spectrum(&s), 1.0).unwrap();
    let err = rel(k, effective_constant_c(&s, 1.0));
    let elapsed = t.elapsed();
    let passed = err <= COMMUTATOR_REL && elapsed < COMMUTATOR_TIME;
    report(4, "commutator equals C", passed, &format!("rel err {err:.3e} <= {COMMUTATOR_REL:e}"), elapsed);
    assert!(passed);
}

#[test]
fn c05_trace_null() {
    let _g = lock();
    let t = Instant::now();
    let mut worst = 0.0f64;
    for name in ["flrw-em-probe", "desitter-em-probe"] {
        let s = Scenario::bundled(name).unwrap();
        let family = s.build_family().unwrap();
        let field = s.build_stress(&family).unwrap().unwrap();
        let scan = density_scan(&field, family.as_ref(), &s.region().unwrap()).unwrap();
        assert!(scan.max_scale > 0.0, "{name}: probe has no stress-energy");
        worst = worst.max(scan.max_relative);
    }
    let passed = worst <= TRACE_NULL_REL;
    report(5, "trace-null FLRW and de Sitter", passed, &format!("max |density|/scale {worst:.3e} <= {TRACE_NULL_REL:e}"), t.elapsed());
    assert!(passed);
}

#[test]
fn c06_coordinate_independence() {
    let _g = lock();
    let t = Instant::now();
    let c = coordinate_independence_check(&CoordinateCheck::bundled(TestTensorKind::Conserved)).unwrap();
    let n = coordinate_independence_check(&CoordinateCheck::bundled(TestTensorKind::NonConserved)).unwrap();
    let elapsed = t.elapsed();
    let ratio = c.coarse_difference.abs() / c.difference.abs();
    let conserved_ok = c.difference.abs() <= c.quadrature_error_estimate && ratio >= COORDINATE_REFINEMENT_MIN;
    let angular = (n.difference - n.angular_integral).abs();
    let nonconserved_ok = angular <= n.quadrature_error_estimate;
    let passed = conserved_ok && nonconserved_ok && elapsed < COORDINATE_TIME;
    report(
        6,
        "coordinate independence",
        passed,
        &format!(
            "|dP| {:.3e} <= {:.3e}, refinement {ratio:.2} >= {COORDINATE_REFINEMENT_MIN}, non-conserved |dP - angular| {angular:.3e} <= {:.3e}",
            c.difference.abs(),
            c.quadrature_error_estimate,
            n.quadrature_error_estimate
        ),
        elapsed,
    );
    assert!(passed);
}

#[test]
fn c07_reductions() {
    let _g = lock();
    let t = Instant::now();
    let time = run_bound(&Scenario::bundled("proper-time-reduction").unwrap()).unwrap();
    let u = &time.sections["uniform_reduction"];
    let time_err = rel(u["bound"].as_f64().unwrap(), u["expected"].as_f64().unwrap());
    let unruh = run_bound(&Scenario::bundled("unruh-component").unwrap()).unwrap();
    let unruh_err = rel(unruh.sections["component_reduction"]["product_bound"].as_f64().unwrap(), 1.0);
    let passed = time_err <= REDUCTION_REL && unruh_err <= REDUCTION_REL;
    report(
        7,
        "time-energy and Unruh-type reductions",
        passed,
        &format!("time-energy {time_err:.3e}, component {unruh_err:.3e} <= {REDUCTION_REL:e}"),
        t.elapsed(),
    );
    assert!(passed);
}

#[test]
fn c08_monte_carlo_saturation() {
    let _g = lock();
    let t = Instant::now();
    let tol = 3.0 * (2.0 / MC_SAMPLES as f64).sqrt();
    let mut worst = 0.0f64;
    for (name, seed) in [("gw-monochromatic-coherent", 1), ("gw-squeezed-r1", 2)] {
        let s = Scenario::bundled(name).unwrap();
        let r = crlb_amplitude(&s.build_probe().unwrap().unwrap()).unwrap();
        let model = MeasurementModel::from_report(&r, 1e-3);
        let samples = simulate_readout(&model, MC_SAMPLES, seed).unwrap();
        let run = linear_estimator(&samples, &model, seed).unwrap();
        worst = worst.max(rel(run.variance, r.crlb));
    }
    let elapsed = t.elapsed();
    let passed = worst <= tol && elapsed < MC_TIME;
    report(8, "Monte Carlo CRB saturation", passed, &format!("max rel dev {worst:.3e} <= {tol:.3e}"), elapsed);
    assert!(passed);
}

#[test]
fn c09_wick_fock_oracle() {
    let _g = lock();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for modes in [1usize, 2] {
        for case in 0..3 {
            let amp = if case == 0 { 2.0 / (modes as f64).sqrt() } else { rng.random_range(0.2..2.0 / (modes as f64).sqrt()) };
            let r = if case == 0 { 0.8 } else { rng.random_range(0.0..0.8) };
            let ms: Vec<Mode> = (0..modes).map(|k| Mode::along_x(1.0 + 0.7 * k as f64, 1.0)).collect();
            let alpha: Vec<Complex64> =
                (0..modes).map(|_| Complex64::from_polar(amp, rng.random_range(0.0..2.0 * PI))).collect();
            let s = ModeSpectrum::new(ms, alpha, 1.0, 0.1).unwrap();
            let state = GaussianProbeState::squeezed(s, r, 1.0).unwrap();
            let f = fock_moments(&state, WICK_FOCK_TRUNCATION).unwrap();
            let (v1, v2) = quadrature_variances(&state);
            let w = remainder_variance_wick(&state).unwrap();
            worst = worst.max((f.var_x1 - v1).abs()).max((f.var_x2 - v2).abs()).max((f.var_remainder - w).abs());
        }
    }
    let elapsed = t.elapsed();
    let passed = worst <= WICK_FOCK_ABS && elapsed < WICK_FOCK_TIME;
    report(
        9,
        "Wick against Fock space",
        passed,
        &format!("max abs err {worst:.3e} <= {WICK_FOCK_ABS:e} at truncation {WICK_FOCK_TRUNCATION}"),
        elapsed,
    );
    assert!(passed);
}

#[test]
fn c10_mean_field_dominance() {
    let _g = lock();
    let t = Instant::now();
    let s = SpectrumSpec::Monochromatic { omega: OMEGA_TAU, n_bar: 1.0, phase: 0.0 }.build(1.0, DC_MULTIPLIER, None).unwrap();
    let base = GaussianProbeState::squeezed(s, 0.5, 1.0).unwrap();
    let lambdas = [1.0f64, 10.0, 100.0];
    let ratios: Vec<f64> = lambdas.iter().map(|&l| crlb_amplitude(&base.scaled(l)).unwrap().remainder_ratio).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas.iter().zip(&ratios).map(|(l, r)| (l.ln(), r.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let spread = lambdas.iter().zip(&ratios).map(|(l, r)| rel(r * l * l, ratios[0])).fold(0.0, f64::max);
    let passed = (slope + 2.0).abs() <= SLOPE_ABS && spread <= SCALING_REL;
    report(
        10,
        "remainder_ratio ∝ 1/λ²",
        passed,
        &format!("slope {slope:.4} within {SLOPE_ABS} of -2, λ² spread {spread:.3e} <= {SCALING_REL}"),
        t.elapsed(),
    );
    assert!(passed);
}

#[test]
fn c11_smeared_correlator() {
    let _g = lock();
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (time, d) in BUNDLED_SEPARATIONS {
        let c = smeared_correlator_check([time, d, 0.0, 0.0], d / 50.0).unwrap();
        worst = worst.max(c.relative_error);
    }
    let passed = worst <= CORRELATOR_REL;
    report(11, "smeared correlator", passed, &format!("max rel err {worst:.3e} <= {CORRELATOR_REL:e}"), t.elapsed());
    assert!(passed);
}

#[test]
fn c12_derivative_cross_check() {
    let _g = lock();
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for f in builtin_families() {
        let c = derivative_cross_check(f.as_ref(), DERIVATIVE_POINTS, 12, DERIVATIVE_REL).unwrap();
        worst = worst.max(c.worst_ratio);
        if !c.passed {
            failures.push(c.family.clone());
        }
    }
    let passed = failures.is_empty();
    report(
        12,
        "metric derivative cross-check",
        passed,
        &format!("worst ratio {worst:.3e} <= 1 over {} families, failing {failures:?}", builtin_families().len()),
        t.elapsed(),
    );
    assert!(passed);
}
