//! Discretized plane-wave mode lattices and mean-field spectra.
//!
//! Discrete normalization: each lattice mode has a unit-commutator
//! annihilation operator and the cell weight Δ³k/(2π)³ is absorbed into
//! |α_k|², so n̄ = Σ|α_k|² and C = ½ħΣ(ω_kτ)²|α_k|².

use super::ProbeError;
use crate::numerics::par_sum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Linear polarization label of a lattice mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[default]
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// Wave vector (1/length).
    pub k: [f64; 3],
    /// ω = |k|.
    pub omega: f64,
    pub polarization: Polarization,
    /// Cell weight Δ³k/(2π)³ (metadata only in the discrete normalization).
    pub weight: f64,
}

impl Mode {
    /// Mode along +x with y polarization.
    pub fn along_x(omega: f64, weight: f64) -> Self {
        Self { k: [omega, 0.0, 0.0], omega, polarization: Polarization::Y, weight }
    }

    pub fn new(k: [f64; 3], polarization: Polarization, weight: f64) -> Self {
        let omega = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        Self { k, omega, polarization, weight }
    }

    /// Angle between k and +x.
    pub fn angle_from_x(&self) -> f64 {
        (self.k[0] / self.omega).clamp(-1.0, 1.0).acos()
    }
}

/// Modes with their mean-field amplitudes α_k and the observation window τ.
/// Modes with ω below the DC cutoff are dropped on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    modes: Vec<Mode>,
    alpha: Vec<Complex64>,
    tau: f64,
    dc_cutoff: f64,
    dc_excluded: usize,
}

/// Default DC cutoff multiplier: modes need ω ≥ 2π/τ.
pub const DC_MULTIPLIER: f64 = 1.0;

impl ModeSpectrum {
    /// Builds a spectrum, excluding modes with ω < multiplier·2π/τ.
    pub fn new(
        modes: Vec<Mode>,
        alpha: Vec<Complex64>,
        tau: f64,
        dc_multiplier: f64,
    ) -> Result<Self, ProbeError> {
        if modes.len() != alpha.len() {
            return Err(ProbeError::InvalidParameter(format!(
                "{} modes but {} amplitudes",
                modes.len(),
                alpha.len()
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(ProbeError::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if !(dc_multiplier >= 0.0 && dc_multiplier.is_finite()) {
            return Err(ProbeError::InvalidParameter(format!(
                "DC cutoff multiplier must be non-negative, got {dc_multiplier}"
            )));
        }
        let dc_cutoff = dc_multiplier * 2.0 * PI / tau;
        let mut kept_modes = Vec::with_capacity(modes.len());
        let mut kept_alpha = Vec::with_capacity(modes.len());
        let mut excluded = 0;
        for (m, a) in modes.into_iter().zip(alpha) {
            if !(m.omega > 0.0 && m.omega.is_finite()) || !(m.weight > 0.0 && m.weight.is_finite()) {
                return Err(ProbeError::InvalidParameter(format!(
                    "mode needs positive finite ω and weight, got ω = {}, w = {}",
                    m.omega, m.weight
                )));
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(ProbeError::InvalidParameter(format!("non-finite amplitude {a}")));
            }
            if m.omega >= dc_cutoff {
                kept_modes.push(m);
                kept_alpha.push(a);
            } else {
                excluded += 1;
            }
        }
        if kept_modes.is_empty() {
            return Err(ProbeError::EmptySpectrum { excluded });
        }
        Ok(Self { modes: kept_modes, alpha: kept_alpha, tau, dc_cutoff, dc_excluded: excluded })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dc_cutoff(&self) -> f64 {
        self.dc_cutoff
    }

    /// Number of modes dropped by the DC cutoff.
    pub fn dc_excluded(&self) -> usize {
        self.dc_excluded
    }

    /// n̄ = Σ|α_k|².
    pub fn mean_photon_number(&self) -> f64 {
        par_sum(self.len(), |i| self.alpha[i].norm_sqr())
    }

    /// Σ(ω_kτ)²|α_k|².
    pub fn weighted_occupation(&self) -> f64 {
        par_sum(self.len(), |i| {
            let wt = self.modes[i].omega * self.tau;
            wt * wt * self.alpha[i].norm_sqr()
        })
    }

    /// Same lattice, same τ, new amplitudes.
    pub fn with_alpha(&self, alpha: Vec<Complex64>) -> Result<Self, ProbeError> {
        if alpha.len() != self.len() {
            return Err(ProbeError::LatticeMismatch(format!(
                "{} amplitudes for a {}-mode lattice",
                alpha.len(),
                self.len()
            )));
        }
        Ok(Self { alpha, ..self.clone() })
    }

    /// α → λα.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { alpha: self.alpha.iter().map(|a| a * lambda).collect(), ..self.clone() }
    }

    fn same_lattice(&self, other: &Self) -> bool {
        self.tau == other.tau && self.modes == other.modes
    }

    /// Warnings for occupied modes that are far from +x or not y-polarized.
    pub fn paraxial_warnings(&self, max_angle: f64) -> Vec<String> {
        let mut off_axis = 0usize;
        let mut worst = 0.0f64;
        let mut z_pol = 0usize;
        for (m, a) in self.modes.iter().zip(&self.alpha) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let ang = m.angle_from_x();
            if ang > max_angle {
                off_axis += 1;
                worst = worst.max(ang);
            }
            if m.polarization != Polarization::Y {
                z_pol += 1;
            }
        }
        let mut out = Vec::new();
        if off_axis > 0 {
            out.push(format!(
                "{off_axis} occupied modes lie more than {max_angle} rad from +x (worst {worst:.3e} rad); the paraxial model may not apply"
            ));
        }
        if z_pol > 0 {
            out.push(format!("{z_pol} occupied modes are not y-polarized; they do not couple to the quadratures"));
        }
        out
    }
}

/// C = ½ħΣ(ω_kτ)²|α_k|².
pub fn effective_constant_c(spectrum: &ModeSpectrum, hbar: f64) -> f64 {
    0.5 * hbar * spectrum.weighted_occupation()
}

/// α_k → iα_k on every mode.
pub fn conjugate_spectrum(spectrum: &ModeSpectrum) -> ModeSpectrum {
    let i = Complex64::i();
    ModeSpectrum { alpha: spectrum.alpha.iter().map(|a| i * a).collect(), ..spectrum.clone() }
}

/// ½ħΣ(ω_kτ)²Im(α1_k* α2_k).
pub fn commutator_constant(a1: &ModeSpectrum, a2: &ModeSpectrum, hbar: f64) -> Result<f64, ProbeError> {
    if !a1.same_lattice(a2) {
        return Err(ProbeError::LatticeMismatch("spectra are defined on different lattices or windows".into()));
    }
    let s = par_sum(a1.len(), |i| {
        let wt = a1.modes[i].omega * a1.tau;
        wt * wt * (a1.alpha[i].conj() * a2.alpha[i]).im
    });
    Ok(0.5 * hbar * s)
}

/// Coefficients c_k = ħω_kτ·α_k*/√(2ħC) of the effective mode b = Σc_k a_k.
pub fn effective_mode_coefficients(spectrum: &ModeSpectrum, hbar: f64) -> Result<Vec<Complex64>, ProbeError> {
    let c = effective_constant_c(spectrum, hbar);
    if !(c > 0.0) {
        return Err(ProbeError::OutOfModel("zero mean field: the effective mode is undefined".into()));
    }
    let norm = (2.0 * hbar * c).sqrt();
    Ok(spectrum
        .modes
        .iter()
        .zip(&spectrum.alpha)
        .map(|(m, a)| a.conj() * (hbar * m.omega * spectrum.tau / norm))
        .collect())
}

/// Parametric and tabulated spectrum definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumSpec {
    /// One occupied mode along +x with |α|² = n̄.
    Monochromatic {
        omega: f64,
        n_bar: f64,
        #[serde(default)]
        phase: f64,
    },
    /// |α(ω)|² = n̄·ρ(ω)Δω for a normal density ρ with standard deviation
    /// fractional_width·ω0, on `modes` midpoints over ±span σ.
    GaussianBand {
        omega0: f64,
        fractional_width: f64,
        n_bar: f64,
        modes: usize,
        #[serde(default = "default_span")]
        span: f64,
    },
    /// Uniform |α|² = n̄/modes on midpoints of [omega_lo, omega_hi].
    FlatBand { omega_lo: f64, omega_hi: f64, n_bar: f64, modes: usize },
    /// Explicit records (k, Re α, Im α) with k along +x, or
    /// (kx, ky, kz, Re α, Im α).
    Tabulated { records: Vec<Vec<f64>> },
    /// Records read from a whitespace-separated text file.
    TabulatedFile { path: String },
}

fn default_span() -> f64 {
    6.0
}

impl SpectrumSpec {
    /// Builds the spectrum for window τ and DC multiplier. Relative paths
    /// are resolved against `base`.
    pub fn build(&self, tau: f64, dc_multiplier: f64, base: Option<&Path>) -> Result<ModeSpectrum, ProbeError> {
        let (modes, alpha) = match self {
            SpectrumSpec::Monochromatic { omega, n_bar, phase } => {
                check_positive("omega", *omega)?;
                check_non_negative("n_bar", *n_bar)?;
                (vec![Mode::along_x(*omega, 1.0)], vec![Complex64::from_polar(n_bar.sqrt(), *phase)])
            }
            SpectrumSpec::GaussianBand { omega0, fractional_width, n_bar, modes, span } => {
                check_positive("omega0", *omega0)?;
                check_positive("fractional_width", *fractional_width)?;
                check_positive("span", *span)?;
                check_non_negative("n_bar", *n_bar)?;
                check_count(*modes)?;
                let sigma = fractional_width * omega0;
                let lo = omega0 - span * sigma;
                if !(lo > 0.0) {
                    return Err(ProbeError::InvalidParameter(format!(
                        "band reaches ω ≤ 0 (ω0 − span·σ = {lo}); reduce span or fractional_width"
                    )));
                }
                let d = 2.0 * span * sigma / *modes as f64;
                let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
                band(*modes, lo, d, |w| {
                    let z = (w - omega0) / sigma;
                    (n_bar * norm * (-0.5 * z * z).exp() * d).sqrt()
                })
            }
            SpectrumSpec::FlatBand { omega_lo, omega_hi, n_bar, modes } => {
                check_positive("omega_lo", *omega_lo)?;
                check_non_negative("n_bar", *n_bar)?;
                check_count(*modes)?;
                if !(omega_hi > omega_lo) {
                    return Err(ProbeError::InvalidParameter(format!(
                        "omega_hi ({omega_hi}) must exceed omega_lo ({omega_lo})"
                    )));
                }
                let d = (omega_hi - omega_lo) / *modes as f64;
                let a = (n_bar / *modes as f64).sqrt();
                band(*modes, *omega_lo, d, |_| a)
            }
            SpectrumSpec::Tabulated { records } => tabulated(records)?,
            SpectrumSpec::TabulatedFile { path } => {
                let p = match base {
                    Some(b) if Path::new(path).is_relative() => b.join(path),
                    _ => Path::new(path).to_path_buf(),
                };
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| ProbeError::Io(format!("{}: {e}", p.display())))?;
                tabulated(&parse_records(&text)?)?
            }
        };
        ModeSpectrum::new(modes, alpha, tau, dc_multiplier)
    }
}

fn band(n: usize, lo: f64, d: f64, amp: impl Fn(f64) -> f64) -> (Vec<Mode>, Vec<Complex64>) {
    (0..n)
        .map(|i| {
            let w = lo + (i as f64 + 0.5) * d;
            (Mode::along_x(w, d / (2.0 * PI)), Complex64::new(amp(w), 0.0))
        })
        .unzip()
}

fn tabulated(records: &[Vec<f64>]) -> Result<(Vec<Mode>, Vec<Complex64>), ProbeError> {
    if records.is_empty() {
        return Err(ProbeError::EmptySpectrum { excluded: 0 });
    }
    records
        .iter()
        .enumerate()
        .map(|(i, r)| match r.as_slice() {
            [k, re, im] => Ok((Mode::along_x(*k, 1.0), Complex64::new(*re, *im))),
            [kx, ky, kz, re, im] => Ok((Mode::new([*kx, *ky, *kz], Polarization::Y, 1.0), Complex64::new(*re, *im))),
            _ => Err(ProbeError::Parse {
                line: i + 1,
                msg: format!("expected 3 or 5 numbers, got {}", r.len()),
            }),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|v| v.into_iter().unzip())
}

/// Parses whitespace-separated records; `#` starts a comment.
pub fn parse_records(text: &str) -> Result<Vec<Vec<f64>>, ProbeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let rec = body
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ProbeError::Parse { line: i + 1, msg: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

fn check_positive(name: &str, v: f64) -> Result<(), ProbeError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ProbeError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<(), ProbeError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ProbeError::InvalidParameter(format!("{name} must be non-negative, got {v}")))
    }
}

fn check_count(n: usize) -> Result<(), ProbeError> {
    if n == 0 {
        Err(ProbeError::InvalidParameter("a band needs at least one mode".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(omega_tau: f64, n_bar: f64) -> ModeSpectrum {
        SpectrumSpec::Monochromatic { omega: omega_tau, n_bar, phase: 0.3 }.build(1.0, 1.0, None).unwrap()
    }

    #[test]
    fn monochromatic_constant() {
        let s = mono(2.0 * PI * 10.0, 1e4);
        let c = effective_constant_c(&s, 1.0);
        let wt = 2.0 * PI * 10.0;
        assert!((c - 0.5 * wt * wt * 1e4).abs() <= 1e-12 * c);
    }

    #[test]
    fn two_modes_sum() {
        let (w, n) = (7.0f64, 3.0f64);
        let s = SpectrumSpec::Tabulated { records: vec![vec![w, n.sqrt(), 0.0], vec![2.0 * w, 0.0, n.sqrt()]] }
            .build(1.0, 1.0, None)
            .unwrap();
        let c = effective_constant_c(&s, 1.0);
        assert!((c - 0.5 * n * 5.0 * w * w).abs() < 1e-12 * c);
    }

    #[test]
    fn dc_modes_are_dropped() {
        let s = SpectrumSpec::Tabulated { records: vec![vec![1.0, 1.0, 0.0], vec![10.0, 1.0, 0.0]] }
            .build(1.0, 1.0, None)
            .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.dc_excluded(), 1);
        let err = SpectrumSpec::Monochromatic { omega: 1.0, n_bar: 1.0, phase: 0.0 }.build(1.0, 1.0, None);
        assert!(matches!(err, Err(ProbeError::EmptySpectrum { excluded: 1 })));
    }

    #[test]
    fn conjugation() {
        let s = mono(70.0, 2.0);
        let twice = conjugate_spectrum(&conjugate_spectrum(&s));
        for (a, b) in s.alpha().iter().zip(twice.alpha()) {
            assert!((a + b).norm() < 1e-15);
        }
        assert_eq!(conjugate_spectrum(&s.with_alpha(vec![Complex64::new(1.0, 0.0)]).unwrap()).alpha()[0], Complex64::i());
    }

    #[test]
    fn commutator_cases() {
        let s = mono(70.0, 2.0);
        let c = effective_constant_c(&s, 1.3);
        assert_eq!(commutator_constant(&s, &conjugate_spectrum(&s), 1.3).unwrap(), c);
        assert_eq!(commutator_constant(&s, &s, 1.3).unwrap(), 0.0);
        let phi = 0.7;
        let rot = s.with_alpha(s.alpha().iter().map(|a| a * Complex64::from_polar(1.0, phi)).collect()).unwrap();
        let k = commutator_constant(&s, &rot, 1.3).unwrap();
        assert!((k - c * phi.sin()).abs() < 1e-12 * c);
        let other = mono(71.0, 2.0);
        assert!(matches!(commutator_constant(&s, &other, 1.0), Err(ProbeError::LatticeMismatch(_))));
    }

    #[test]
    fn effective_mode_normalization() {
        let s = SpectrumSpec::Tabulated { records: vec![vec![9.0, 1.0, 0.5], vec![9.0, -0.5, 1.0]] }
            .build(1.0, 1.0, None)
            .unwrap();
        let c = effective_mode_coefficients(&s, 1.0).unwrap();
        for ck in &c {
            assert!((ck.norm() - 0.5f64.sqrt()).abs() < 1e-15);
        }
        let zero = s.with_alpha(vec![Complex64::new(0.0, 0.0); 2]).unwrap();
        assert!(effective_mode_coefficients(&zero, 1.0).is_err());
    }

    #[test]
    fn gaussian_band_total_occupation() {
        let s = SpectrumSpec::GaussianBand { omega0: 100.0, fractional_width: 0.1, n_bar: 50.0, modes: 200, span: 6.0 }
            .build(1.0, 1.0, None)
            .unwrap();
        assert!((s.mean_photon_number() - 50.0).abs() < 1e-6);
        // ⟨ω²⟩ = ω0² + σ²
        let expect = 50.0 * (100.0f64.powi(2) + 100.0);
        assert!((s.weighted_occupation() - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn paraxial_warning_for_tilted_modes() {
        let s = SpectrumSpec::Tabulated { records: vec![vec![10.0, 3.0, 0.0, 1.0, 0.0]] }.build(1.0, 1.0, None).unwrap();
        assert_eq!(s.paraxial_warnings(0.1).len(), 1);
        assert!(mono(70.0, 1.0).paraxial_warnings(0.1).is_empty());
    }

    #[test]
    fn records_parse() {
        let r = parse_records("# k re im\n10 1 0\n\n20 0.5 -0.5 # tail\n").unwrap();
        assert_eq!(r, vec![vec![10.0, 1.0, 0.0], vec![20.0, 0.5, -0.5]]);
        assert!(matches!(parse_records("1 x 2"), Err(ProbeError::Parse { line: 1, .. })));
    }
}
