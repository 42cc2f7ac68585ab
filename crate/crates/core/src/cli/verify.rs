//! Named verification suites.

use super::run::coordinate_checks;
use super::{run_bound, run_simulate, CliError, Report, Scenario, Tolerances};
use crate::estimator::{classical_fisher, crb_saturation_check, simulate_readout, MeasurementModel};
use crate::generator::{component_reduction, RegionSpec, TestTensorKind};
use crate::metric::{builtin_families, derivative_cross_check, ComponentPerturbation};
use crate::numerics::Rule;
use crate::probe::{
    commutator_constant, conjugate_spectrum, crlb_amplitude, effective_constant_c, fock_moments, quadrature_variances,
    remainder_variance_wick, smeared_correlator_check, GaussianProbeState, Mode, ModeSpectrum, SpectrumSpec,
    BUNDLED_SEPARATIONS, DC_MULTIPLIER, DEFAULT_TRUNCATION,
};
use crate::stress::{MaxwellSource, PlaneWaveField, StressEnergyField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::f64::consts::PI;
use std::sync::Arc;

pub const SUITES: [(&str, &str); 3] = [
    ("paper-identities", "closed-form bounds, reductions, trace-null, Wick/Fock, scaling, correlator, derivatives"),
    ("coordinate-independence", "Schwarzschild against isotropic coordinates for conserved and non-conserved tensors"),
    ("monte-carlo", "simulated readouts of the coherent and squeezed scenarios against the CRB"),
];

/// Run options shared by all suites.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    /// Replaces the Monte Carlo scenarios' seeds.
    pub seed: Option<u64>,
    /// Multiplies quadrature resolutions.
    pub resolution: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), seed: None, resolution: 1.0 }
    }
}

pub fn run_verify(suite: &str, opts: &VerifyOptions) -> Result<Report, CliError> {
    let mut report = Report::new("verify");
    report.scenario_name = Some(suite.to_string());
    match suite {
        "paper-identities" => paper_identities(opts, &mut report)?,
        "coordinate-independence" => {
            let resolution = ((32.0 * opts.resolution).round() as usize).max(2);
            coordinate_checks(
                vec![TestTensorKind::Conserved, TestTensorKind::NonConserved],
                resolution,
                &opts.tolerances,
                &mut report,
            )?
        }
        "monte-carlo" => monte_carlo(opts, &mut report)?,
        _ => {
            return Err(CliError::UnknownSuite {
                name: suite.to_string(),
                available: SUITES.iter().map(|(n, _)| n.to_string()).collect(),
            })
        }
    }
    Ok(report)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Copies the checks, warnings and sections of `sub` into `report`, with
/// names prefixed by `prefix/`.
fn merge(report: &mut Report, sub: Report, prefix: &str) {
    for mut c in sub.checks {
        c.name = format!("{prefix}/{}", c.name);
        report.checks.push(c);
    }
    for w in sub.warnings {
        report.warn(format!("{prefix}: {w}"));
    }
    for (path, units) in sub.units {
        report.set_units(&format!("{prefix}.{path}"), &units);
    }
    report.section(prefix, &sub.sections);
}

fn bundled(name: &str, opts: &VerifyOptions) -> Result<Scenario, CliError> {
    let mut s = Scenario::bundled(name)?;
    s.scale_resolution(opts.resolution)?;
    for (k, v, _) in super::DEFAULT_TOLERANCES {
        let t = opts.tolerances.get(k);
        if t != v {
            s.tolerances.insert(k.to_string(), t);
        }
    }
    if let (Some(seed), Some(sim)) = (opts.seed, s.simulation.as_mut()) {
        sim.seed = seed;
    }
    Ok(s)
}

const OMEGA_TAU: f64 = 2.0 * PI * 10.0;

fn mono(n_bar: f64) -> Result<ModeSpectrum, CliError> {
    SpectrumSpec::Monochromatic { omega: OMEGA_TAU, n_bar, phase: 0.0 }
        .build(1.0, DC_MULTIPLIER, None)
        .map_err(|e| CliError::stage("probe", e))
}

fn gaussian_band(modes: usize) -> Result<ModeSpectrum, CliError> {
    SpectrumSpec::GaussianBand { omega0: OMEGA_TAU, fractional_width: 0.1, n_bar: 1e4, modes, span: 6.0 }
        .build(1.0, DC_MULTIPLIER, None)
        .map_err(|e| CliError::stage("probe", e))
}

fn paper_identities(opts: &VerifyOptions, report: &mut Report) -> Result<(), CliError> {
    let tol = &opts.tolerances;
    let st = |e| CliError::stage("probe", e);

    // shot noise and squeezing gain
    let coherent = GaussianProbeState::coherent(mono(1e4)?, 1.0).map_err(st)?;
    let c0 = crlb_amplitude(&coherent).map_err(st)?;
    report.check_le(
        "shot-noise/monochromatic",
        rel(c0.crlb, 1.0 / (OMEGA_TAU * OMEGA_TAU * 1e4)),
        tol.get("shot-noise"),
        "1",
        "crlb against 1/((ωτ)²n̄)",
    );
    for r in [0.5, 1.0, 2.0] {
        let s = GaussianProbeState::squeezed(mono(1e4)?, r, 1.0).map_err(st)?;
        let c = crlb_amplitude(&s).map_err(st)?;
        report.check_le(
            &format!("squeezing-gain/r={r}"),
            rel(c.crlb / c0.crlb, (-2.0 * r).exp()),
            tol.get("shot-noise"),
            "1",
            "crlb ratio against e^(-2r)",
        );
        report.check_le(
            &format!("heisenberg/r={r}"),
            rel(c.var_x1 * c.var_x2, (0.5 * c.c).powi(2)),
            tol.get("identity"),
            "1",
            "var_x1·var_x2 against (ħC/2)²",
        );
    }

    // broadband generalized shot noise
    let band = gaussian_band(64)?;
    let cb = crlb_amplitude(&GaussianProbeState::coherent(band.clone(), 1.0).map_err(st)?).map_err(st)?;
    let fine = crlb_amplitude(&GaussianProbeState::coherent(gaussian_band(64 * 16)?, 1.0).map_err(st)?).map_err(st)?;
    report.check_le(
        "shot-noise/broadband",
        rel(cb.crlb, 1.0 / band.weighted_occupation()),
        tol.get("shot-noise"),
        "1",
        "crlb against 1/Σ(ωτ)²|α|²",
    );
    report.check_le(
        "refinement/broadband",
        rel(cb.crlb, fine.crlb),
        tol.get("refinement"),
        "1",
        "64-mode crlb against a 1024-mode lattice",
    );

    // commutator on a large lattice with random phases
    let big = SpectrumSpec::FlatBand { omega_lo: 10.0, omega_hi: 100.0, n_bar: 1e4, modes: 100_000 }
        .build(1.0, DC_MULTIPLIER, None)
        .map_err(st)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alpha = big.alpha().iter().map(|a| a * Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).collect();
    let big = big.with_alpha(alpha).map_err(st)?;
    let k = commutator_constant(&big, &conjugate_spectrum(&big), 1.0).map_err(st)?;
    report.check_le(
        "commutator/100000-modes",
        rel(k, effective_constant_c(&big, 1.0)),
        tol.get("commutator"),
        "1",
        "commutator_constant(α, iα) against C",
    );

    // saturation and Fisher information
    for (label, r) in [("coherent", 0.0), ("squeezed", 1.0)] {
        let s = GaussianProbeState::squeezed(mono(1e4)?, r, 1.0).map_err(st)?;
        let c = crlb_amplitude(&s).map_err(st)?;
        let model = MeasurementModel::from_report(&c, 0.0);
        let sat = crb_saturation_check(&c, &model);
        report.check_le(
            &format!("saturation/{label}"),
            (sat.ratio - 1.0).abs(),
            tol.get("saturation"),
            "1",
            "1/F against ħ²/4var_X1",
        );
        report.check_le(
            &format!("fisher/{label}"),
            rel(classical_fisher(&model), 4.0 * c.var_x1 / (c.hbar * c.hbar)),
            tol.get("identity"),
            "1",
            "C²/var_X2 against 4var_X1/ħ²",
        );
        if r == 0.0 {
            let inflated = MeasurementModel { var_x2: 2.0 * model.var_x2, ..model };
            let sat = crb_saturation_check(&c, &inflated);
            report.check_le(
                "saturation/inflated",
                (sat.ratio - 2.0).abs(),
                tol.get("saturation"),
                "1",
                "ratio 2 when var_X2 is doubled",
            );
        }
    }

    // Gaussian moments against Fock space
    let one = ModeSpectrum::new(vec![Mode::along_x(1.3, 1.0)], vec![Complex64::new(1.6, -1.2)], 1.0, 0.1).map_err(st)?;
    let two = ModeSpectrum::new(
        vec![Mode::along_x(1.0, 1.0), Mode::along_x(1.7, 1.0)],
        vec![Complex64::new(1.2, 0.9), Complex64::new(-0.8, 1.1)],
        1.0,
        0.1,
    )
    .map_err(st)?;
    for (label, spectrum) in [("1-mode", one), ("2-mode", two)] {
        for r in [0.0, 0.8] {
            let s = GaussianProbeState::squeezed(spectrum.clone(), r, 1.0).map_err(st)?;
            let f = fock_moments(&s, DEFAULT_TRUNCATION).map_err(st)?;
            let (v1, v2) = quadrature_variances(&s);
            let w = remainder_variance_wick(&s).map_err(st)?;
            let err = (f.var_x1 - v1).abs().max((f.var_x2 - v2).abs()).max((f.var_remainder - w).abs());
            report.check_le(
                &format!("wick-fock/{label}/r={r}"),
                err,
                tol.get("wick-fock"),
                "hbar^2",
                format!("max |Fock − Gaussian| over var_X1, var_X2, var_F at truncation {DEFAULT_TRUNCATION}"),
            );
        }
    }

    // remainder_ratio ∝ 1/λ²
    let base = GaussianProbeState::squeezed(mono(1.0)?, 0.5, 1.0).map_err(st)?;
    let lambdas = [1.0, 10.0, 100.0];
    let ratios = lambdas
        .iter()
        .map(|&l| crlb_amplitude(&base.scaled(l)).map(|c| c.remainder_ratio))
        .collect::<Result<Vec<_>, _>>()
        .map_err(st)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas.iter().zip(&ratios).map(|(l, r)| (l.ln(), r.ln())).unzip();
    let slope = least_squares_slope(&xs, &ys);
    report.section("scaling", &json!({ "remainder_ratio": ratios, "slope": slope }));
    report.set_units("scaling.slope", "1");
    report.check_le("slope/remainder-ratio", (slope + 2.0).abs(), tol.get("slope"), "1", "log-log slope against −2");
    let scaled: Vec<f64> = lambdas.iter().zip(&ratios).map(|(l, r)| r * l * l).collect();
    let spread = scaled.iter().map(|s| rel(*s, scaled[0])).fold(0.0, f64::max);
    report.check_le("scaling/remainder-ratio", spread, tol.get("scaling"), "1", "remainder_ratio·λ² spread");

    // smeared correlator
    for (t, d) in BUNDLED_SEPARATIONS {
        let c = smeared_correlator_check([t, d, 0.0, 0.0], d / 50.0).map_err(st)?;
        report.check_le(
            &format!("correlator/t={t},x={d}"),
            c.relative_error,
            tol.get("correlator"),
            "1",
            "smeared kernel against 1/(|x|²−t²)",
        );
    }

    // trace-null, closed-form generator and reductions through the pipeline
    for name in ["gw-monochromatic-coherent", "flrw-em-probe", "desitter-em-probe", "unruh-component", "proper-time-reduction"] {
        let sub = run_bound(&bundled(name, opts)?)?;
        merge(report, sub, name);
    }
    let region = RegionSpec { lo: [0.0; 4], hi: [1.0; 4], rule: Rule::Trapezoid, resolution: [4; 4] }.scaled(opts.resolution);
    let field = StressEnergyField::new(
        Arc::new(MaxwellSource::flat(Arc::new(PlaneWaveField::uniform(1.0)))),
        crate::grid::Grid4::new([-0.1; 4], [1.1; 4], [2; 4]).map_err(|e| CliError::stage("stress", e))?,
    );
    let off = ComponentPerturbation::new(0, 1).map_err(|e| CliError::stage("family", e))?;
    let r = component_reduction(&field, &off, &region, 1.0).map_err(|e| CliError::stage("reduction", e))?;
    report.check_le(
        "component-reduction/off-diagonal",
        rel(r.product_bound, 0.25),
        tol.get("reduction"),
        "1",
        "g_01 product bound against ħ²/4",
    );

    // analytic against finite-difference metric derivatives
    for f in builtin_families() {
        let c = derivative_cross_check(f.as_ref(), 100, 0, tol.get("derivative"))
            .map_err(|e| CliError::stage("family", e))?;
        report.check_le(
            &format!("derivative/{}", c.family),
            c.worst_ratio,
            1.0,
            "1",
            format!("max |a − fd|/(tol·max|a| + floor) over {} points", c.points - c.skipped),
        );
    }
    Ok(())
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn monte_carlo(opts: &VerifyOptions, report: &mut Report) -> Result<(), CliError> {
    for name in ["gw-monochromatic-coherent", "gw-squeezed-r1"] {
        let s = bundled(name, opts)?;
        let sub = run_simulate(&s)?;
        merge(report, sub, name);
    }
    let model = MeasurementModel { offset: 0.0, slope: 2.0, var_x2: 0.5, a_true: 1.0 };
    let seed = opts.seed.unwrap_or(11);
    let st = |e| CliError::stage("estimator", e);
    let a = simulate_readout(&model, 100_000, seed).map_err(st)?;
    let b = simulate_readout(&model, 100_000, seed).map_err(st)?;
    let mismatches = a.iter().zip(&b).filter(|(x, y)| x.to_bits() != y.to_bits()).count();
    report.check_le("seed-determinism", mismatches as f64, 0.0, "count", "differing samples between two runs");
    Ok(())
}
