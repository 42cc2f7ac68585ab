//! Scenario files: one TOML document describing a metric family, the probe
//! stress-energy, the integration region, the probe state and the run.
//!
//! ```toml
//! name = "gw-monochromatic-coherent"
//! hbar = 1.0
//!
//! [family]
//! kind = "gw-plane-wave"
//! amplitude0 = 0.0
//!
//! [stress]
//! kind = "maxwell"
//! field = { kind = "plane-wave", amplitude = 1.0 }
//!
//! [region]
//! lo = [0.0, 0.0, 0.0, 0.0]
//! hi = [1.0, 1.0, 1.0, 1.0]
//! resolution = [4, 4, 4, 4]
//!
//! [probe]
//! tau = 1.0
//! spectrum = { kind = "monochromatic", omega = 62.83185307179586, n_bar = 1e4 }
//! ```
//!
//! Unknown keys are rejected. Relative paths resolve against the scenario
//! file's directory.

use super::{CliError, Tolerances};
use crate::generator::{RegionSpec, TestTensorKind};
use crate::grid::{Grid4, GridFile};
use crate::metric::{
    localize, AxisWindow, BumpProfile, ComponentPerturbation, DeSitter, Flrw, GwPlaneWave, Isotropic, MetricFamily,
    Minkowski, ProfileKind, PulseEnvelope, Schwarzschild, SphericalMinkowski, TabulatedFamily, TimeProfile,
    UniformPerturbation, UniformTarget, DIM,
};
use crate::probe::{GaussianProbeState, ReferenceKind, SpectrumSpec, DC_MULTIPLIER};
use crate::stress::{Dust, MaxwellSource, PlaneWaveField, StressEnergyField, UniformField, ZeroSource};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default = "one")]
    pub hbar: f64,
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<BumpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress: Option<StressSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate_check: Option<CoordinateCheckSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    /// Directory for relative paths; not part of the file.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

/// Built-in metric families by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Minkowski,
    SphericalMinkowski,
    /// g_{μν} = η_{μν} + θ on one component (and its mirror).
    Component { mu: usize, nu: usize },
    /// Spatially uniform lapse or shift perturbation with profile a(t).
    Uniform { target: UniformTarget, profile: TimeProfile },
    GwPlaneWave {
        #[serde(default)]
        amplitude0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        envelope: Option<PulseEnvelope>,
    },
    Schwarzschild {
        m0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exclusion: Option<f64>,
    },
    Isotropic { m0: f64 },
    Flrw { a_max: f64 },
    DeSitter { lambda: f64 },
    /// Metric grid file (see the grid module for the format).
    Tabulated { path: String },
}

impl FamilySpec {
    /// Families whose parameter only rescales the metric, dg/dθ ∝ g.
    pub fn is_conformal_scale(&self) -> bool {
        matches!(self, FamilySpec::Flrw { .. } | FamilySpec::DeSitter { .. })
    }
}

/// Separable bump. Each localized axis is [plateau_lo, plateau_hi,
/// support_lo, support_hi]; omitted axes are not localized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub profile: ProfileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis0: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis1: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis3: Option<[f64; 4]>,
}

impl BumpSpec {
    pub fn build(&self) -> Result<BumpProfile, CliError> {
        let axes = [self.axis0, self.axis1, self.axis2, self.axis3];
        let mut windows = [None; DIM];
        for (a, spec) in axes.iter().enumerate() {
            if let Some([pl, ph, sl, sh]) = *spec {
                windows[a] = Some(AxisWindow::new((pl, ph), (sl, sh)).map_err(|e| CliError::stage("bump", e))?);
            }
        }
        BumpProfile::new(self.profile, windows).map_err(|e| CliError::stage("bump", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    /// E_y = B_z = E1(t, x), a wave along +x.
    PlaneWave(PlaneWaveField),
    /// Constant E and B.
    Uniform(UniformField),
}

/// Node grid on which the stress-energy is declared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: [f64; DIM],
    pub hi: [f64; DIM],
    pub n: [usize; DIM],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StressSpec {
    /// Maxwell tensor of a mean field; on the family's θ0 metric when
    /// `on_family`, else the flat Cartesian form.
    Maxwell {
        field: FieldSpec,
        #[serde(default)]
        on_family: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<GridSpec>,
    },
    Dust {
        density: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<GridSpec>,
    },
    GridFile { path: String },
    Zero {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<GridSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub tau: f64,
    #[serde(default)]
    pub squeeze_r: f64,
    /// Defaults to vacuum-coherent for r = 0 and squeezed-vacuum otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceKind>,
    #[serde(default = "dc_default")]
    pub dc_multiplier: f64,
    pub spectrum: SpectrumSpec,
    /// For band spectra: compare against a lattice with this many times
    /// more modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<usize>,
}

fn dc_default() -> f64 {
    DC_MULTIPLIER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub a_true: f64,
    /// Readout offset ⟨X2⟩₀.
    #[serde(default)]
    pub offset: f64,
    /// Raw samples are written here as CSV when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<String>,
}

/// Probe charge fluctuation for the uniform-perturbation reductions:
/// ⟨(ΔH)²⟩ for a lapse, ⟨(ΔP_x)²⟩ for a shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSpec {
    pub charge_variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorChoice {
    Conserved,
    NonConserved,
    Both,
}

impl TensorChoice {
    pub fn kinds(self) -> Vec<TestTensorKind> {
        match self {
            TensorChoice::Conserved => vec![TestTensorKind::Conserved],
            TensorChoice::NonConserved => vec![TestTensorKind::NonConserved],
            TensorChoice::Both => vec![TestTensorKind::Conserved, TestTensorKind::NonConserved],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateCheckSpec {
    pub tensor: TensorChoice,
    /// Trapezoid nodes per axis of the base grid.
    #[serde(default = "check_resolution")]
    pub resolution: usize,
}

fn check_resolution() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

/// Scenarios shipped with the binary, by name.
pub const BUNDLED: [(&str, &str); 8] = [
    ("gw-monochromatic-coherent", include_str!("../../scenarios/gw-monochromatic-coherent.toml")),
    ("gw-broadband-coherent", include_str!("../../scenarios/gw-broadband-coherent.toml")),
    ("gw-squeezed-r1", include_str!("../../scenarios/gw-squeezed-r1.toml")),
    ("flrw-em-probe", include_str!("../../scenarios/flrw-em-probe.toml")),
    ("desitter-em-probe", include_str!("../../scenarios/desitter-em-probe.toml")),
    ("schwarzschild-coordinate-check", include_str!("../../scenarios/schwarzschild-coordinate-check.toml")),
    ("unruh-component", include_str!("../../scenarios/unruh-component.toml")),
    ("proper-time-reduction", include_str!("../../scenarios/proper-time-reduction.toml")),
];

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a scenario TOML, or the scenario echoed in a JSON report.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut s = if path.extension().is_some_and(|e| e == "json") {
            Self::parse(&super::report::echoed_scenario(&text)?)?
        } else {
            Self::parse(&text)?
        };
        s.base_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    pub fn bundled(name: &str) -> Result<Self, CliError> {
        let (_, text) = BUNDLED.iter().find(|(n, _)| *n == name).ok_or_else(|| CliError::UnknownScenario {
            name: name.to_string(),
            available: BUNDLED.iter().map(|(n, _)| n.to_string()).collect(),
        })?;
        Self::parse(text)
    }

    /// TOML text of the scenario as it will be run.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(CliError::Config(format!("hbar: must be positive, got {}", self.hbar)));
        }
        if let Some(sim) = &self.simulation {
            if sim.samples == 0 {
                return Err(CliError::Config("simulation.samples: must be at least 1".into()));
            }
        }
        if let Some(region) = &self.region {
            region.validate().map_err(|e| CliError::Config(format!("region: {e}")))?;
        }
        if let Some(c) = &self.coordinate_check {
            if c.resolution < 2 {
                return Err(CliError::Config("coordinate_check.resolution: must be at least 2".into()));
            }
        }
        self.tolerances()?;
        Ok(())
    }

    /// Default tolerances with the scenario's overrides applied.
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut t = Tolerances::default();
        for (k, v) in &self.tolerances {
            t.set(k, *v)?;
        }
        Ok(t)
    }

    /// Multiplies every quadrature resolution by `factor`.
    pub fn scale_resolution(&mut self, factor: f64) -> Result<(), CliError> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(CliError::Config(format!("--resolution: must be positive, got {factor}")));
        }
        if let Some(r) = &mut self.region {
            *r = r.scaled(factor);
        }
        if let Some(c) = &mut self.coordinate_check {
            c.resolution = ((c.resolution as f64 * factor).round() as usize).max(2);
        }
        Ok(())
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// The family, localized when a bump is given.
    pub fn build_family(&self) -> Result<Arc<dyn MetricFamily>, CliError> {
        let st = |e| CliError::stage("family", e);
        let base: Arc<dyn MetricFamily> = match &self.family {
            FamilySpec::Minkowski => Arc::new(Minkowski),
            FamilySpec::SphericalMinkowski => Arc::new(SphericalMinkowski),
            FamilySpec::Component { mu, nu } => Arc::new(ComponentPerturbation::new(*mu, *nu).map_err(st)?),
            FamilySpec::Uniform { target, profile } => Arc::new(UniformPerturbation { target: *target, profile: *profile }),
            FamilySpec::GwPlaneWave { amplitude0, envelope } => {
                Arc::new(GwPlaneWave { amplitude0: *amplitude0, envelope: *envelope })
            }
            FamilySpec::Schwarzschild { m0, exclusion } => {
                let mut s = Schwarzschild::new(*m0).map_err(st)?;
                if let Some(e) = exclusion {
                    s.exclusion = *e;
                }
                Arc::new(s)
            }
            FamilySpec::Isotropic { m0 } => Arc::new(Isotropic::new(*m0).map_err(st)?),
            FamilySpec::Flrw { a_max } => Arc::new(Flrw::new(*a_max).map_err(st)?),
            FamilySpec::DeSitter { lambda } => Arc::new(DeSitter::new(*lambda).map_err(st)?),
            FamilySpec::Tabulated { path } => {
                let file = GridFile::read(&self.resolve(path)).map_err(|e| CliError::stage("family", e))?;
                Arc::new(TabulatedFamily::new(path.clone(), &file).map_err(st)?)
            }
        };
        match &self.bump {
            None => Ok(base),
            Some(b) => Ok(Arc::new(localize(base, b.build()?).map_err(st)?)),
        }
    }

    /// The stress-energy field, if the scenario has one.
    pub fn build_stress(&self, family: &Arc<dyn MetricFamily>) -> Result<Option<StressEnergyField>, CliError> {
        let Some(spec) = &self.stress else { return Ok(None) };
        let st = |e| CliError::stage("stress", e);
        let grid = |g: &Option<GridSpec>| -> Result<Grid4, CliError> {
            match g {
                Some(g) => Grid4::new(g.lo, g.hi, g.n).map_err(st),
                None => self.default_grid(),
            }
        };
        let field = match spec {
            StressSpec::Maxwell { field, on_family, grid: g } => {
                let em: Arc<dyn crate::stress::EmField> = match field {
                    FieldSpec::PlaneWave(p) => Arc::new(*p),
                    FieldSpec::Uniform(u) => Arc::new(*u),
                };
                let source =
                    if *on_family { MaxwellSource::on(em, family.clone()) } else { MaxwellSource::flat(em) };
                StressEnergyField::new(Arc::new(source), grid(g)?)
            }
            StressSpec::Dust { density, grid: g } => StressEnergyField::new(Arc::new(Dust { density: *density }), grid(g)?),
            StressSpec::GridFile { path } => {
                let file = GridFile::read(&self.resolve(path)).map_err(st)?;
                StressEnergyField::from_grid_file(&file).map_err(|e| CliError::stage("stress", e))?
            }
            StressSpec::Zero { grid: g } => StressEnergyField::new(Arc::new(ZeroSource), grid(g)?),
        };
        Ok(Some(field))
    }

    /// Region box padded by 5% per side with 2 nodes per axis.
    fn default_grid(&self) -> Result<Grid4, CliError> {
        let r = self
            .region
            .as_ref()
            .ok_or_else(|| CliError::Config("stress.grid: required when there is no [region]".into()))?;
        let pad: [f64; DIM] = std::array::from_fn(|a| 0.05 * (r.hi[a] - r.lo[a]));
        Grid4::new(std::array::from_fn(|a| r.lo[a] - pad[a]), std::array::from_fn(|a| r.hi[a] + pad[a]), [2; DIM])
            .map_err(|e| CliError::stage("stress", e))
    }

    pub fn region(&self) -> Option<RegionSpec> {
        self.region
    }

    /// The probe state, if the scenario has a probe.
    pub fn build_probe(&self) -> Result<Option<GaussianProbeState>, CliError> {
        let Some(p) = &self.probe else { return Ok(None) };
        Ok(Some(self.probe_state(p, 1)?))
    }

    /// Probe state with the spectrum lattice `factor` times finer (band
    /// spectra only; other kinds ignore the factor).
    pub fn probe_state(&self, p: &ProbeSpec, factor: usize) -> Result<GaussianProbeState, CliError> {
        let st = |e| CliError::stage("probe", e);
        let spectrum = refine_spectrum(&p.spectrum, factor);
        let base = self.base_dir.as_deref();
        let s = spectrum.build(p.tau, p.dc_multiplier, base).map_err(st)?;
        let reference = p.reference.unwrap_or(if p.squeeze_r == 0.0 {
            ReferenceKind::VacuumCoherent
        } else {
            ReferenceKind::SqueezedVacuum
        });
        GaussianProbeState::new(s, p.squeeze_r, reference, self.hbar).map_err(st)
    }
}

fn refine_spectrum(spec: &SpectrumSpec, factor: usize) -> SpectrumSpec {
    match spec.clone() {
        SpectrumSpec::GaussianBand { omega0, fractional_width, n_bar, modes, span } => {
            SpectrumSpec::GaussianBand { omega0, fractional_width, n_bar, modes: modes * factor, span }
        }
        SpectrumSpec::FlatBand { omega_lo, omega_hi, n_bar, modes } => {
            SpectrumSpec::FlatBand { omega_lo, omega_hi, n_bar, modes: modes * factor }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_parse_and_round_trip() {
        for (name, _) in BUNDLED {
            let s = Scenario::bundled(name).unwrap();
            assert_eq!(s.name, name);
            let again = Scenario::parse(&s.to_toml()).unwrap();
            assert_eq!(again, s, "{name}");
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = "name = \"x\"\nbogus = 1\n[family]\nkind = \"minkowski\"\n";
        let err = Scenario::parse(text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        let text = "name = \"x\"\n[family]\nkind = \"flrw\"\na_max = 1.0\nextra = 2\n";
        let err = Scenario::parse(text).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn zero_samples_rejected() {
        let text = "name = \"x\"\n[family]\nkind = \"minkowski\"\n[simulation]\nsamples = 0\n";
        assert!(Scenario::parse(text).unwrap_err().to_string().contains("samples"));
    }
}
