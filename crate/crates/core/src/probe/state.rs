//! Gaussian probe states: a displaced vacuum or a displaced squeezed vacuum
//! of the effective mode b, and the amplitude bounds they give.

use super::spectrum::{commutator_constant, conjugate_spectrum, effective_constant_c, effective_mode_coefficients};
use super::{ModeSpectrum, ProbeError};
use crate::numerics::NeumaierSum;
use serde::{Deserialize, Serialize};

/// Zero-mean-field state from which the probe is displaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Vacuum; the displaced state is coherent.
    #[default]
    VacuumCoherent,
    /// exp(r[(b†)² − b²]/2)|0⟩ on the effective mode.
    SqueezedVacuum,
}

/// Largest angle from +x before an occupied mode triggers a paraxial warning.
pub const PARAXIAL_ANGLE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProbeState {
    spectrum: ModeSpectrum,
    squeeze_r: f64,
    reference: ReferenceKind,
    hbar: f64,
}

impl GaussianProbeState {
    pub fn coherent(spectrum: ModeSpectrum, hbar: f64) -> Result<Self, ProbeError> {
        Self::new(spectrum, 0.0, ReferenceKind::VacuumCoherent, hbar)
    }

    pub fn squeezed(spectrum: ModeSpectrum, r: f64, hbar: f64) -> Result<Self, ProbeError> {
        Self::new(spectrum, r, ReferenceKind::SqueezedVacuum, hbar)
    }

    /// `r ≥ 0` squeezes X2. A vacuum-coherent reference needs r = 0.
    pub fn new(spectrum: ModeSpectrum, squeeze_r: f64, reference: ReferenceKind, hbar: f64) -> Result<Self, ProbeError> {
        if !(squeeze_r >= 0.0 && squeeze_r.is_finite()) {
            return Err(ProbeError::InvalidParameter(format!("squeeze parameter must be ≥ 0, got {squeeze_r}")));
        }
        if reference == ReferenceKind::VacuumCoherent && squeeze_r != 0.0 {
            return Err(ProbeError::InvalidParameter(format!(
                "a vacuum-coherent reference has r = 0, got r = {squeeze_r}"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(ProbeError::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { spectrum, squeeze_r, reference, hbar })
    }

    pub fn spectrum(&self) -> &ModeSpectrum {
        &self.spectrum
    }

    pub fn squeeze_r(&self) -> f64 {
        self.squeeze_r
    }

    pub fn reference(&self) -> ReferenceKind {
        self.reference
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn c(&self) -> f64 {
        effective_constant_c(&self.spectrum, self.hbar)
    }

    /// The same state with α → λα.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { spectrum: self.spectrum.scaled(lambda), ..self.clone() }
    }
}

/// (⟨(ΔX1)²⟩, ⟨(ΔX2)²⟩) = (ħC/2·e^{2r}, ħC/2·e^{−2r}).
pub fn quadrature_variances(state: &GaussianProbeState) -> (f64, f64) {
    let v = 0.5 * state.hbar * state.c();
    let r = state.squeeze_r;
    (v * (2.0 * r).exp(), v * (-2.0 * r).exp())
}

/// Weights κ_k = ½ħω_kτ of the quadratic remainder F = Σκ_k Δa_k†Δa_k
/// (normal ordered, DC terms dropped).
pub fn remainder_weights(spectrum: &ModeSpectrum, hbar: f64) -> Vec<f64> {
    spectrum.modes().iter().map(|m| 0.5 * hbar * m.omega * spectrum.tau()).collect()
}

/// (Σκ|c|², Σκ²|c|²) over the effective-mode coefficients.
fn remainder_moments(state: &GaussianProbeState) -> Result<(f64, f64), ProbeError> {
    let c = effective_mode_coefficients(&state.spectrum, state.hbar)?;
    let kappa = remainder_weights(&state.spectrum, state.hbar);
    let mut k1 = NeumaierSum::default();
    let mut k2 = NeumaierSum::default();
    for (ck, kk) in c.iter().zip(&kappa) {
        let p = ck.norm_sqr();
        k1.add(kk * p);
        k2.add(kk * kk * p);
    }
    Ok((k1.value(), k2.value()))
}

/// ⟨(ΔF)²⟩ with F restricted to the effective mode, F ≈ κ̄ b†b with
/// κ̄ = Σκ_k|c_k|²: κ̄²·½sinh²(2r) for the squeezed reference, 0 for vacuum.
pub fn reference_remainder_variance(state: &GaussianProbeState) -> Result<f64, ProbeError> {
    if state.squeeze_r == 0.0 {
        return Ok(0.0);
    }
    let (k1, _) = remainder_moments(state)?;
    let s = (2.0 * state.squeeze_r).sinh();
    Ok(0.5 * k1 * k1 * s * s)
}

/// ⟨(ΔF)²⟩ for the full lattice F = Σκ_k Δa_k†Δa_k by Wick's theorem, with
/// ⟨a_j†a_k⟩ = c_j c_k* sinh²r and ⟨a_j a_k⟩ = c_j* c_k* sinh r cosh r:
/// sinh²r(cosh²r + sinh²r)(Σκ|c|²)² + sinh²r·Σκ²|c|².
pub fn remainder_variance_wick(state: &GaussianProbeState) -> Result<f64, ProbeError> {
    if state.squeeze_r == 0.0 {
        return Ok(0.0);
    }
    let (k1, k2) = remainder_moments(state)?;
    let (sh, ch) = (state.squeeze_r.sinh(), state.squeeze_r.cosh());
    Ok(sh * sh * (ch * ch + sh * sh) * k1 * k1 + sh * sh * k2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlbDiagnostics {
    /// Modes removed by the DC cutoff.
    pub dc_excluded: usize,
    /// |\[X1,X2\]/iħ − C|/C with X2 from the conjugate spectrum.
    pub commutator_residual: f64,
    /// (ωτ)²|α|²-weighted mean of 1/(ωτ), the size of the dropped
    /// counter-rotating terms.
    pub counter_rotating: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlbReport {
    pub c: f64,
    pub hbar: f64,
    pub squeeze_r: f64,
    pub var_x1: f64,
    pub var_x2: f64,
    /// ħ²/(4⟨(ΔX1)²⟩), the bound on ⟨(δÃ)²⟩.
    pub crlb: f64,
    /// ħ/2C.
    pub shot_noise: f64,
    /// ⟨(ΔF)²⟩ in the single-effective-mode model.
    pub remainder_variance: f64,
    /// ⟨(ΔF)²⟩/⟨(ΔX1)²⟩.
    pub remainder_ratio: f64,
    pub diagnostics: CrlbDiagnostics,
}

/// Amplitude bound for `state`. A zero mean field is out of model.
pub fn crlb_amplitude(state: &GaussianProbeState) -> Result<CrlbReport, ProbeError> {
    let c = state.c();
    if !(c > 0.0) {
        return Err(ProbeError::OutOfModel(
            "zero mean field (C = 0): the amplitude bound is undefined at mean-field level".into(),
        ));
    }
    let hbar = state.hbar;
    let (var_x1, var_x2) = quadrature_variances(state);
    let remainder_variance = reference_remainder_variance(state)?;
    let k = commutator_constant(&state.spectrum, &conjugate_spectrum(&state.spectrum), hbar)?;
    let tau = state.spectrum.tau();
    let mut num = NeumaierSum::default();
    let mut den = NeumaierSum::default();
    for (m, a) in state.spectrum.modes().iter().zip(state.spectrum.alpha()) {
        let wt = m.omega * tau;
        let w = wt * wt * a.norm_sqr();
        num.add(w / wt);
        den.add(w);
    }
    Ok(CrlbReport {
        c,
        hbar,
        squeeze_r: state.squeeze_r,
        var_x1,
        var_x2,
        crlb: hbar * hbar / (4.0 * var_x1),
        shot_noise: hbar / (2.0 * c),
        remainder_variance,
        remainder_ratio: remainder_variance / var_x1,
        diagnostics: CrlbDiagnostics {
            dc_excluded: state.spectrum.dc_excluded(),
            commutator_residual: (k - c).abs() / c,
            counter_rotating: num.value() / den.value(),
            warnings: state.spectrum.paraxial_warnings(PARAXIAL_ANGLE),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::SpectrumSpec;
    use std::f64::consts::PI;

    fn mono(n_bar: f64) -> ModeSpectrum {
        SpectrumSpec::Monochromatic { omega: 2.0 * PI * 10.0, n_bar, phase: 0.0 }.build(1.0, 1.0, None).unwrap()
    }

    #[test]
    fn shot_noise_example() {
        let r = crlb_amplitude(&GaussianProbeState::coherent(mono(1e4), 1.0).unwrap()).unwrap();
        let expect = 1.0 / ((2.0 * PI * 10.0f64).powi(2) * 1e4);
        assert!((r.crlb - expect).abs() < 1e-12 * expect);
        assert!((r.crlb - 2.533e-8).abs() < 1e-11);
        assert_eq!(r.remainder_variance, 0.0);
        assert_eq!(r.diagnostics.commutator_residual, 0.0);
    }

    #[test]
    fn squeezed_variances_and_bound() {
        let s = GaussianProbeState::squeezed(mono(100.0), 1.0, 0.7).unwrap();
        let (v1, v2) = quadrature_variances(&s);
        let half = 0.5 * 0.7 * s.c();
        assert!((v1 * v2 - half * half).abs() < 1e-12 * half * half);
        let r = crlb_amplitude(&s).unwrap();
        assert!((r.crlb - r.shot_noise * (-2.0f64).exp()).abs() < 1e-12 * r.crlb);
        assert!((r.crlb - v2 / (s.c() * s.c())).abs() < 1e-12 * r.crlb);
    }

    #[test]
    fn single_mode_wick_matches_effective_mode_model() {
        let s = GaussianProbeState::squeezed(mono(4.0), 0.6, 1.0).unwrap();
        let a = reference_remainder_variance(&s).unwrap();
        let b = remainder_variance_wick(&s).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn zero_field_is_out_of_model() {
        let s = GaussianProbeState::coherent(mono(0.0), 1.0).unwrap();
        assert!(matches!(crlb_amplitude(&s), Err(ProbeError::OutOfModel(_))));
    }

    #[test]
    fn coherent_reference_rejects_squeezing() {
        assert!(GaussianProbeState::new(mono(1.0), 0.5, ReferenceKind::VacuumCoherent, 1.0).is_err());
        assert!(GaussianProbeState::squeezed(mono(1.0), -0.5, 1.0).is_err());
    }
}
