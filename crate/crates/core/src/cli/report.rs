//! Run reports: sections of intermediate results, pass/fail checks, and
//! their JSON and plain-text renderings.
//!
//! In the JSON form every numeric field is an object `{"value", "units"}`
//! and every float is written with 17 significant digits, so two reports
//! of the same run compare equal byte for byte.

use super::CliError;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::io;

pub const REPORT_FORMAT: &str = "metric-crb report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    /// Units of `value` and `tolerance`.
    pub units: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub scenario_name: Option<String>,
    /// TOML of the scenario as run, overrides applied.
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub sections: BTreeMap<String, Value>,
    /// Units for specific dotted paths ("section.field"), overriding the
    /// lookup by field name.
    pub units: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            scenario_name: None,
            scenario: None,
            seed: None,
            sections: BTreeMap::new(),
            units: BTreeMap::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn section<T: Serialize>(&mut self, name: &str, value: &T) {
        let v = serde_json::to_value(value).expect("report sections serialize to JSON");
        self.sections.insert(name.to_string(), v);
    }

    /// Sets the units of the field at `path` ("section.field").
    pub fn set_units(&mut self, path: &str, units: &str) {
        self.units.insert(path.to_string(), units.to_string());
    }

    /// Records a check that passes when value ≤ tolerance (NaN fails).
    pub fn check_le(&mut self, name: &str, value: f64, tolerance: f64, units: &str, detail: impl Into<String>) -> bool {
        self.push(name, value, Comparison::AtMost, tolerance, units, detail.into())
    }

    /// Records a check that passes when value ≥ minimum (NaN fails).
    pub fn check_ge(&mut self, name: &str, value: f64, minimum: f64, units: &str, detail: impl Into<String>) -> bool {
        self.push(name, value, Comparison::AtLeast, minimum, units, detail.into())
    }

    fn push(&mut self, name: &str, value: f64, comparison: Comparison, tolerance: f64, units: &str, detail: String) -> bool {
        let passed = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
        };
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            value,
            comparison,
            tolerance,
            units: units.to_string(),
            detail,
        });
        passed
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    /// True when every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The report as a JSON value with units-tagged numbers.
    pub fn to_value(&self) -> Value {
        let mut top = Map::new();
        top.insert("format".into(), Value::from(REPORT_FORMAT));
        top.insert("version".into(), tagged(Value::from(REPORT_VERSION), "1"));
        top.insert("command".into(), Value::from(self.command.clone()));
        top.insert("scenario_name".into(), self.scenario_name.clone().map_or(Value::Null, Value::from));
        top.insert("scenario".into(), self.scenario.clone().map_or(Value::Null, Value::from));
        top.insert("seed".into(), self.seed.map_or(Value::Null, |s| tagged(Value::from(s), "1")));
        top.insert("passed".into(), Value::from(self.passed()));
        let sections = self.sections.iter().map(|(k, v)| (k.clone(), self.tag_units(v, k, k))).collect();
        top.insert("sections".into(), Value::Object(sections));
        let checks = self
            .checks
            .iter()
            .map(|c| {
                let mut m = Map::new();
                m.insert("name".into(), Value::from(c.name.clone()));
                m.insert("passed".into(), Value::from(c.passed));
                m.insert("value".into(), tagged(number(c.value), &c.units));
                m.insert("comparison".into(), serde_json::to_value(c.comparison).expect("serializes"));
                m.insert("tolerance".into(), tagged(number(c.tolerance), &c.units));
                m.insert("detail".into(), Value::from(c.detail.clone()));
                Value::Object(m)
            })
            .collect();
        top.insert("checks".into(), Value::Array(checks));
        top.insert("warnings".into(), Value::from(self.warnings.clone()));
        Value::Object(top)
    }

    /// Pretty JSON with every float printed as `{:.16e}`.
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Sci::default());
        self.to_value().serialize(&mut ser).expect("writing to a Vec cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    /// Aligned plain-text summary.
    pub fn summary(&self) -> String {
        let mut rows: Vec<(String, String, String)> = Vec::new();
        for (name, v) in &self.sections {
            flatten(name, v, &mut rows);
        }
        for row in &mut rows {
            if let Some(u) = self.units.get(&row.0) {
                row.2 = u.clone();
            }
        }
        let mut s = format!("metric-crb {}", self.command);
        if let Some(n) = &self.scenario_name {
            s += &format!(": {n}");
        }
        if let Some(seed) = self.seed {
            s += &format!(" (seed {seed})");
        }
        s.push('\n');
        let w = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
        for (k, v, u) in &rows {
            s += &format!("  {k:<w$}  {v:>24}  {u}\n");
        }
        if !self.checks.is_empty() {
            s += "checks:\n";
            let w = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
            for c in &self.checks {
                let op = match c.comparison {
                    Comparison::AtMost => "<=",
                    Comparison::AtLeast => ">=",
                };
                s += &format!(
                    "  {} {:<w$}  {:>24.16e} {op} {:.3e} {}  {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance,
                    c.units,
                    c.detail
                );
            }
        }
        for warning in &self.warnings {
            s += &format!("warning: {warning}\n");
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        s += &format!("{} checks, {} failed\n", self.checks.len(), failed);
        s
    }
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn tagged(v: Value, units: &str) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), v);
    m.insert("units".into(), Value::from(units));
    Value::Object(m)
}

impl Report {
    /// Wraps numeric fields (and all-numeric arrays) as {"value", "units"}.
    fn tag_units(&self, v: &Value, key: &str, path: &str) -> Value {
        match v {
            _ if is_numeric(v) => tagged(v.clone(), self.units_at(key, path)),
            Value::Object(m) => {
                Value::Object(m.iter().map(|(k, x)| (k.clone(), self.tag_units(x, k, &format!("{path}.{k}")))).collect())
            }
            Value::Array(a) => Value::Array(a.iter().map(|x| self.tag_units(x, key, path)).collect()),
            other => other.clone(),
        }
    }

    fn units_at<'a>(&'a self, key: &str, path: &str) -> &'a str {
        self.units.get(path).map_or_else(|| units_for(key), String::as_str)
    }
}

fn is_numeric(v: &Value) -> bool {
    match v {
        Value::Number(_) => true,
        Value::Array(a) => !a.is_empty() && a.iter().all(is_numeric),
        _ => false,
    }
}

/// Units of a report field, by field name. G = c = 1, so times and
/// lengths share "length"; θ stands for the estimated parameter.
pub fn units_for(key: &str) -> &'static str {
    match key {
        "crlb" | "shot_noise" | "refined_crlb" | "quantum_bound" | "classical_fisher_inverse" | "analytic_variance"
        | "variance" | "value" => "theta^2",
        "mean" | "a_true" | "standard_error" => "theta",
        "c" | "hbar" | "slope" | "offset" => "hbar",
        "var_x1" | "var_x2" | "remainder_variance" | "product_bound" => "hbar^2",
        "classical_fisher" | "histogram_fisher" | "quantum_fisher" => "1/theta^2",
        "p_total" | "p_k" | "p_shell" | "coarse_total" | "boundary_term" | "quadrature_error_estimate"
        | "p_schwarzschild" | "p_isotropic" | "angular_integral" | "difference" | "coarse_difference"
        | "divergence_integral" | "coarse_angular_integral" | "generator" | "expected_generator" => "hbar/theta",
        "max_density" | "max_scale" => "hbar/(theta*length^4)",
        "component_integral" => "hbar",
        "charge" => "hbar/length",
        "charge_variance" => "hbar^2/length^2",
        "profile_integral" => "length",
        "bound" | "expected" => "length^2",
        "squeeze_r" | "remainder_ratio" | "commutator_residual" | "counter_rotating" | "coupling" | "conversion"
        | "coefficient" | "ratio" | "relative_error" | "relative_difference" | "variance_relative_error"
        | "variance_tolerance" | "max_relative" | "divergence_residual" | "worst_ratio" | "max_error"
        | "refinement_ratio" => "1",
        "n" | "nodes" | "modes" | "refined_modes" | "dc_excluded" | "resolution" | "refined_resolution" | "points"
        | "skipped" | "mu" | "nu" | "samples" => "count",
        "seed" => "1",
        "worst_point" => "chart coordinates",
        _ => "unspecified",
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String, String)>) {
    match v {
        Value::Number(_) => {
            let text = number_text(v);
            let key = prefix.rsplit('.').next().unwrap_or(prefix);
            rows.push((prefix.to_string(), text, units_for(key).to_string()));
        }
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone(), String::new())),
        Value::Object(m) => {
            for (k, x) in m {
                if k != "warnings" {
                    flatten(&format!("{prefix}.{k}"), x, rows);
                }
            }
        }
        Value::Array(a) if is_numeric(v) => {
            let key = prefix.rsplit('.').next().unwrap_or(prefix);
            let text = a.iter().map(number_text).collect::<Vec<_>>().join(" ");
            rows.push((prefix.to_string(), text, units_for(key).to_string()));
        }
        Value::Array(_) | Value::Null => {}
    }
}

fn number_text(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

/// Scenario TOML echoed in a JSON report.
pub fn echoed_scenario(json: &str) -> Result<String, CliError> {
    let v: Value = serde_json::from_str(json).map_err(|e| CliError::Config(format!("report JSON: {e}")))?;
    if v.get("format").and_then(Value::as_str) != Some(REPORT_FORMAT) {
        return Err(CliError::Config(format!("report JSON: `format` is not \"{REPORT_FORMAT}\"")));
    }
    v.get("scenario")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| CliError::Config("report JSON: no echoed `scenario`".into()))
}

/// Pretty printer that writes floats as `{:.16e}`.
#[derive(Default)]
struct Sci {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for Sci {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits() {
        let mut r = Report::new("bound");
        r.section("crlb", &serde_json::json!({ "crlb": 0.1, "n": 3 }));
        let json = r.to_json();
        assert!(json.contains("1.0000000000000001e-1") || json.contains("1.0000000000000000e-1"), "{json}");
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["sections"]["crlb"]["crlb"]["value"].as_f64(), Some(0.1));
        assert_eq!(v["sections"]["crlb"]["n"]["units"], "count");
    }

    #[test]
    fn checks_pass_and_fail() {
        let mut r = Report::new("verify");
        assert!(r.check_le("a", 1.0, 2.0, "1", ""));
        assert!(!r.check_le("b", f64::NAN, 2.0, "1", ""));
        assert!(r.check_ge("c", 3.0, 3.0, "1", ""));
        assert!(!r.passed());
        assert!(r.summary().contains("FAIL b"));
    }

    #[test]
    fn echo_requires_report_format() {
        assert!(echoed_scenario("{}").is_err());
        let mut r = Report::new("bound");
        r.scenario = Some("name = \"x\"".into());
        assert_eq!(echoed_scenario(&r.to_json()).unwrap(), "name = \"x\"");
    }
}
