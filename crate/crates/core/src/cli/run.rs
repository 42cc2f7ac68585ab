//! The `bound` and `simulate` pipelines.

use super::scenario::{FamilySpec, FieldSpec, ProbeSpec, StressSpec};
use super::{CliError, Report, Scenario, Tolerances};
use crate::estimator::{
    classical_fisher, crb_saturation_check, histogram_fisher, linear_estimator, simulate_readout, MeasurementModel,
    HISTOGRAM_BINS, HISTOGRAM_SPAN,
};
use crate::generator::{
    component_reduction, coordinate_independence_check, density_scan, integrate_generator, uniform_reduction,
    CoordinateCheck, IntegrationOptions, TestTensorKind,
};
use crate::metric::{ComponentPerturbation, UniformPerturbation, UniformTarget};
use crate::probe::{crlb_amplitude, CrlbReport, SpectrumSpec};
use crate::stress::StressEnergyField;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    Finite,
    /// The generator vanishes identically; the probe carries no information.
    Undefined,
    NotComputed,
}

/// The headline number of a `bound` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub status: BoundStatus,
    /// What the bound constrains.
    pub parameter: String,
    pub value: Option<f64>,
    pub units: String,
    pub reason: String,
}

impl Bound {
    fn not_computed(reason: &str) -> Self {
        Bound {
            status: BoundStatus::NotComputed,
            parameter: String::new(),
            value: None,
            units: String::new(),
            reason: reason.to_string(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn new_report(command: &str, scenario: &Scenario) -> Report {
    let mut r = Report::new(command);
    r.scenario_name = Some(scenario.name.clone());
    r.scenario = Some(scenario.to_toml());
    r
}

fn set_bound(report: &mut Report, bound: &Bound) {
    report.section("bound", bound);
    if !bound.units.is_empty() {
        report.set_units("bound.value", &bound.units);
    }
}

/// Runs metric → stress-energy → generator → probe for a scenario and
/// checks every closed form that applies to it.
pub fn run_bound(scenario: &Scenario) -> Result<Report, CliError> {
    let tol = scenario.tolerances()?;
    let mut report = new_report("bound", scenario);
    let family = scenario.build_family()?;
    let mut bound = Bound::not_computed("scenario has no probe, reduction or conformal family");

    if let (Some(field), Some(region)) = (scenario.build_stress(&family)?, scenario.region()) {
        if scenario.family.is_conformal_scale() {
            let scan = density_scan(&field, family.as_ref(), &region).map_err(|e| CliError::stage("generator", e))?;
            report.section("trace_null", &scan);
            report.check_le(
                "trace-null",
                scan.max_relative,
                tol.get("trace-null"),
                "1",
                format!("max |density|/scale over {} nodes", scan.nodes),
            );
            bound = Bound {
                status: BoundStatus::Undefined,
                parameter: family.name().to_string(),
                value: None,
                units: String::new(),
                reason: "the family only rescales the metric, so the generator density is proportional to the \
                         probe's stress-energy trace, which vanishes for a Maxwell field: P = 0 and the probe \
                         carries no information about the parameter"
                    .into(),
            };
        }
        let g = integrate_generator(&field, family.as_ref(), &region, &IntegrationOptions::default())
            .map_err(|e| CliError::stage("generator", e))?;
        for w in &g.warnings {
            report.warn(w.clone());
        }
        report.section("generator", &g);
        if let Some(expected) = gw_closed_form(scenario, &region) {
            report.section("generator_closed_form", &serde_json::json!({ "expected_generator": expected }));
            report.check_le(
                "generator-closed-form",
                rel(g.p_total, expected),
                tol.get("identity"),
                "1",
                "P against V·E1²/8π",
            );
        }
        if let Some(b) = reductions(scenario, &field, &region, &tol, &mut report)? {
            bound = b;
        }
    }

    if let Some(p) = &scenario.probe {
        let state = scenario.build_probe()?.expect("probe spec present");
        let crlb = crlb_amplitude(&state).map_err(|e| CliError::stage("probe", e))?;
        probe_checks(scenario, p, &crlb, state.spectrum().weighted_occupation(), &tol, &mut report)?;
        for w in &crlb.diagnostics.warnings {
            report.warn(w.clone());
        }
        report.section("probe", &crlb);
        if bound.status != BoundStatus::Undefined {
            bound = Bound {
                status: BoundStatus::Finite,
                parameter: "amplitude".into(),
                value: Some(crlb.crlb),
                units: "theta^2".into(),
                reason: "ħ²/(4⟨(ΔX1)²⟩)".into(),
            };
        }
    }

    if let Some(c) = &scenario.coordinate_check {
        coordinate_checks(c.tensor.kinds(), c.resolution, &tol, &mut report)?;
    }
    set_bound(&mut report, &bound);
    Ok(report)
}

/// V·E1²/8π for a uniform plane wave along x on a constant GW family.
fn gw_closed_form(scenario: &Scenario, region: &crate::generator::RegionSpec) -> Option<f64> {
    let FamilySpec::GwPlaneWave { envelope: None, .. } = scenario.family else { return None };
    if scenario.bump.is_some() {
        return None;
    }
    match &scenario.stress {
        Some(StressSpec::Maxwell { field: FieldSpec::PlaneWave(w), on_family: false, .. })
            if w.omega == 0.0 && w.pulse.is_none() && w.window.is_none() =>
        {
            Some(region.coordinate_volume() * w.amplitude * w.amplitude / (8.0 * PI))
        }
        _ => None,
    }
}

fn reductions(
    scenario: &Scenario,
    field: &StressEnergyField,
    region: &crate::generator::RegionSpec,
    tol: &Tolerances,
    report: &mut Report,
) -> Result<Option<Bound>, CliError> {
    if scenario.bump.is_some() {
        return Ok(None);
    }
    let st = |e| CliError::stage("reduction", e);
    match &scenario.family {
        FamilySpec::Component { mu, nu } => {
            let family = ComponentPerturbation::new(*mu, *nu).map_err(|e| CliError::stage("family", e))?;
            let r = component_reduction(field, &family, region, scenario.hbar).map_err(st)?;
            let h2 = scenario.hbar * scenario.hbar;
            let expected = if mu == nu { h2 } else { h2 / 4.0 };
            report.section("component_reduction", &r);
            report.check_le(
                "component-reduction",
                rel(r.product_bound, expected),
                tol.get("reduction"),
                "1",
                format!("product bound against {}", if mu == nu { "ħ²" } else { "ħ²/4" }),
            );
            Ok(Some(Bound {
                status: BoundStatus::Finite,
                parameter: format!("⟨(δg_{mu}{nu})²⟩·⟨(Δ∫T^{mu}{nu})²⟩"),
                value: Some(r.product_bound),
                units: "hbar^2".into(),
                reason: "product of the metric-component and integrated stress uncertainties".into(),
            }))
        }
        FamilySpec::Uniform { target, profile } => {
            let Some(red) = &scenario.reduction else {
                report.warn("uniform family without [reduction]: the proper-time/distance bound needs a charge variance");
                return Ok(None);
            };
            let family = UniformPerturbation { target: *target, profile: *profile };
            let r = uniform_reduction(field, &family, region, red.charge_variance, scenario.hbar).map_err(st)?;
            report.section("uniform_reduction", &r);
            report.check_le(
                "uniform-reduction",
                r.relative_error(),
                tol.get("reduction"),
                "1",
                "bound against ħ²/4⟨(ΔQ)²⟩",
            );
            let parameter = match target {
                UniformTarget::Lapse => "proper time",
                UniformTarget::Shift => "proper distance",
            };
            Ok(Some(Bound {
                status: BoundStatus::Finite,
                parameter: parameter.into(),
                value: Some(r.bound),
                units: "length^2".into(),
                reason: "ħ²/(4·coefficient²·⟨(ΔQ)²⟩)".into(),
            }))
        }
        _ => Ok(None),
    }
}

fn probe_checks(
    scenario: &Scenario,
    p: &ProbeSpec,
    crlb: &CrlbReport,
    weighted_occupation: f64,
    tol: &Tolerances,
    report: &mut Report,
) -> Result<(), CliError> {
    let half = 0.5 * crlb.hbar * crlb.c;
    report.check_le(
        "heisenberg",
        rel(crlb.var_x1 * crlb.var_x2, half * half),
        tol.get("identity"),
        "1",
        "var_x1·var_x2 against (ħC/2)²",
    );
    report.check_le(
        "shot-noise",
        rel(crlb.shot_noise, 1.0 / weighted_occupation),
        tol.get("shot-noise"),
        "1",
        "ħ/2C against 1/Σ(ωτ)²|α|²",
    );
    let gain = (-2.0 * crlb.squeeze_r).exp();
    report.check_le(
        "squeezing-gain",
        rel(crlb.crlb / crlb.shot_noise, gain),
        tol.get("shot-noise"),
        "1",
        format!("crlb/shot_noise against e^(-2r) = {gain:.6e}"),
    );
    if let SpectrumSpec::Monochromatic { omega, n_bar, .. } = p.spectrum {
        let wt = omega * p.tau;
        report.check_le(
            "monochromatic",
            rel(crlb.crlb, gain / (wt * wt * n_bar)),
            tol.get("shot-noise"),
            "1",
            "crlb against e^(-2r)/((ωτ)²n̄)",
        );
    }
    report.check_le(
        "commutator",
        crlb.diagnostics.commutator_residual,
        tol.get("commutator"),
        "1",
        "[X1,X2]/iħ against C",
    );
    if let Some(factor) = p.refinement {
        let fine = scenario.probe_state(p, factor)?;
        let fine = crlb_amplitude(&fine).map_err(|e| CliError::stage("probe", e))?;
        report.section(
            "refinement",
            &serde_json::json!({
                "refined_modes": fine_modes(p, factor),
                "refined_crlb": fine.crlb,
                "relative_difference": rel(crlb.crlb, fine.crlb),
            }),
        );
        report.check_le(
            "refinement",
            rel(crlb.crlb, fine.crlb),
            tol.get("refinement"),
            "1",
            format!("crlb against a {factor}x finer lattice"),
        );
    }
    Ok(())
}

fn fine_modes(p: &ProbeSpec, factor: usize) -> usize {
    match p.spectrum {
        SpectrumSpec::GaussianBand { modes, .. } | SpectrumSpec::FlatBand { modes, .. } => modes * factor,
        _ => 1,
    }
}

/// Runs the Schwarzschild/isotropic comparison for each tensor kind.
pub(super) fn coordinate_checks(
    kinds: Vec<TestTensorKind>,
    resolution: usize,
    tol: &Tolerances,
    report: &mut Report,
) -> Result<(), CliError> {
    for kind in kinds {
        let mut check = CoordinateCheck::bundled(kind);
        check.region.resolution = [resolution; 4];
        check.conservation_tolerance = tol.get("conservation");
        let r = coordinate_independence_check(&check).map_err(|e| CliError::stage("coordinate-check", e))?;
        match kind {
            TestTensorKind::Conserved => {
                report.section("coordinate_conserved", &r);
                report.check_le(
                    "coordinate-independence",
                    r.difference.abs(),
                    r.quadrature_error_estimate,
                    "hbar/theta",
                    "|P_I − P_S| against the Richardson error estimate",
                );
                report.check_ge(
                    "coordinate-refinement",
                    r.coarse_difference.abs() / r.difference.abs(),
                    tol.get("coordinate-refinement"),
                    "1",
                    "|P_I − P_S| reduction on halving the spacing",
                );
                report.check_le(
                    "conservation",
                    r.divergence_residual,
                    tol.get("conservation"),
                    "1",
                    "max |∇T| over term scale",
                );
            }
            TestTensorKind::NonConserved | TestTensorKind::Zero => {
                let label = if kind == TestTensorKind::Zero { "zero" } else { "nonconserved" };
                for w in &r.warnings {
                    report.warn(format!("{label} tensor: {w}"));
                }
                report.section(&format!("coordinate_{label}"), &r);
                report.check_le(
                    "angular-identity",
                    (r.difference - r.angular_integral).abs(),
                    r.quadrature_error_estimate,
                    "hbar/theta",
                    "P_I − P_S against the tangential-stress integral",
                );
                report.check_le(
                    "divergence-identity",
                    (r.coarse_angular_integral - r.identity_rhs()).abs(),
                    r.quadrature_error_estimate,
                    "hbar/theta",
                    "tangential integral against boundary flux minus ∫X·∇T",
                );
            }
        }
    }
    Ok(())
}

/// Monte Carlo readout of the scenario's probe with the CRB comparison.
pub fn run_simulate(scenario: &Scenario) -> Result<Report, CliError> {
    let tol = scenario.tolerances()?;
    let mut report = new_report("simulate", scenario);
    let sim = scenario
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Config("simulate needs a [simulation] table".into()))?;
    if sim.samples == 0 {
        return Err(CliError::Config("simulation.samples: must be at least 1".into()));
    }
    let state = scenario
        .build_probe()?
        .ok_or_else(|| CliError::Config("simulate needs a [probe] table".into()))?;
    let crlb = crlb_amplitude(&state).map_err(|e| CliError::stage("probe", e))?;
    report.seed = Some(sim.seed);
    report.section("probe", &crlb);

    let model = MeasurementModel { offset: sim.offset, slope: crlb.c, var_x2: crlb.var_x2, a_true: sim.a_true };
    let st = |e| CliError::stage("estimator", e);
    let samples = simulate_readout(&model, sim.samples, sim.seed).map_err(st)?;
    let run = linear_estimator(&samples, &model, sim.seed).map_err(st)?;
    report.section("model", &model);
    report.section("estimator", &run);

    let n = run.n as f64;
    report.check_le(
        "estimator-variance",
        rel(run.variance, crlb.crlb),
        run.variance_tolerance,
        "1",
        "empirical variance against the CRB, tolerance 3√(2/N)",
    );
    report.check_le(
        "unbiased",
        (run.mean - sim.a_true).abs(),
        5.0 * run.standard_error,
        "theta",
        "|mean − A_true| against 5 standard errors",
    );
    let variance_se = run.variance * (2.0 / (n - 1.0).max(1.0)).sqrt();
    report.check_ge(
        "crb-ordering",
        run.variance - crlb.crlb,
        -3.0 * variance_se,
        "theta^2",
        "empirical − crlb against −3 sampling standard errors",
    );
    let sat = crb_saturation_check(&crlb, &model);
    report.section("saturation", &sat);
    report.check_le("saturation", (sat.ratio - 1.0).abs(), tol.get("saturation"), "1", "1/F against ħ²/4var_X1");
    let f_hist = histogram_fisher(&samples, &model, HISTOGRAM_BINS, HISTOGRAM_SPAN).map_err(st)?;
    let f = classical_fisher(&model);
    report.section(
        "fisher",
        &serde_json::json!({ "classical_fisher": f, "histogram_fisher": f_hist, "relative_error": rel(f_hist, f) }),
    );
    report.check_le(
        "histogram-fisher",
        rel(f_hist, f),
        tol.get("histogram-fisher"),
        "1",
        format!("{HISTOGRAM_BINS}-bin Fisher information against C²/var_x2"),
    );

    if let Some(path) = &sim.dump {
        write_dump(path, &samples, &model).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    }
    Ok(report)
}

fn write_dump(path: &str, samples: &[f64], model: &MeasurementModel) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "index,readout,estimate")?;
    for (i, x) in samples.iter().enumerate() {
        writeln!(w, "{i},{x:.16e},{:.16e}", (x - model.offset) / model.slope)?;
    }
    w.flush()
}

