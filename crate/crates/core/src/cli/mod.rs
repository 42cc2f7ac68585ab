//! Scenario-driven front end: scenario files, the `bound`, `simulate` and
//! `verify` runs, and structured reports.

mod report;
mod run;
mod scenario;
mod verify;

pub use report::{echoed_scenario, units_for, Check, Comparison, Report, REPORT_FORMAT, REPORT_VERSION};
pub use run::{run_bound, run_simulate, Bound, BoundStatus};
pub use scenario::{
    BumpSpec, CoordinateCheckSpec, FamilySpec, FieldSpec, GridSpec, OutputSpec, ProbeSpec, ReductionSpec, Scenario,
    SimulationSpec, StressSpec, TensorChoice, BUNDLED,
};
pub use verify::{run_verify, VerifyOptions, SUITES};

use std::collections::BTreeMap;
use std::fmt::Display;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("unknown suite `{name}`; available suites: {}", .available.join(", "))]
    UnknownSuite { name: String, available: Vec<String> },
    #[error("unknown scenario `{name}`; bundled scenarios: {}", .available.join(", "))]
    UnknownScenario { name: String, available: Vec<String> },
    #[error("unknown tolerance `{name}`; known tolerances: {}", .available.join(", "))]
    UnknownTolerance { name: String, available: Vec<String> },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn stage(stage: &'static str, e: impl Display) -> Self {
        CliError::Stage { stage, message: e.to_string() }
    }
}

/// Named tolerances with their defaults and meaning.
pub const DEFAULT_TOLERANCES: [(&str, f64, &str); 15] = [
    ("identity", 1e-10, "relative, algebraic identities"),
    ("shot-noise", 1e-9, "relative, bound against its closed form"),
    ("commutator", 1e-12, "relative, [X1,X2]/iħ against C"),
    ("refinement", 1e-3, "relative, band bound against a finer lattice"),
    ("trace-null", 1e-12, "generator density over its term scale"),
    ("reduction", 1e-9, "relative, reductions to ħ² and ħ²/4ΔQ²"),
    ("saturation", 1e-9, "relative, 1/F against ħ²/4var_X1"),
    ("wick-fock", 1e-8, "absolute, Gaussian moments against Fock space"),
    ("slope", 0.1, "absolute, log-log slope of remainder_ratio"),
    ("scaling", 0.05, "relative, remainder_ratio·λ² constancy"),
    ("correlator", 1e-2, "relative, smeared kernel against 1/(|x|²−t²)"),
    ("histogram-fisher", 0.05, "relative, binned Fisher information"),
    ("derivative", 1e-6, "relative, analytic against finite-difference ∂g/∂θ"),
    ("conservation", 1e-6, "max |∇T| over term scale"),
    ("coordinate-refinement", 3.0, "minimum |P_I−P_S| reduction on halving the spacing"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { values: DEFAULT_TOLERANCES.iter().map(|(k, v, _)| (*k, *v)).collect() }
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        let Some(key) = DEFAULT_TOLERANCES.iter().map(|(k, _, _)| *k).find(|k| *k == name) else {
            return Err(CliError::UnknownTolerance {
                name: name.to_string(),
                available: DEFAULT_TOLERANCES.iter().map(|(k, _, _)| k.to_string()).collect(),
            });
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::Config(format!("tolerance `{name}` must be positive, got {value}")));
        }
        self.values.insert(key, value);
        Ok(())
    }

    /// Parses `name=value`.
    pub fn parse_override(s: &str) -> Result<(String, f64), CliError> {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--tolerance expects name=value, got `{s}`")))?;
        let v: f64 =
            v.trim().parse().map_err(|e| CliError::Config(format!("--tolerance {k}: bad value `{v}`: {e}")))?;
        Ok((k.trim().to_string(), v))
    }
}
