//! Gaussian-state model of a nearly plane-wave electromagnetic probe.
//!
//! The mean field is a [`ModeSpectrum`] on a discrete lattice. The two
//! field quadratures X1, X2 obey [X1, X2] = iħC, and the probe state is a
//! displaced vacuum or a displaced squeezed vacuum of the effective mode
//! b = (X1 + iX2)/√(2ħC). Amplitude bounds follow from the quadrature
//! variances.

mod correlator;
mod fock;
mod spectrum;
mod state;

pub use correlator::{smeared_correlator_check, CorrelatorCheck, BUNDLED_SEPARATIONS};
pub use fock::{fock_moments, FockMoments, DEFAULT_TRUNCATION};
pub use spectrum::{
    commutator_constant, conjugate_spectrum, effective_constant_c, effective_mode_coefficients, parse_records, Mode,
    ModeSpectrum, Polarization, SpectrumSpec, DC_MULTIPLIER,
};
pub use state::{
    crlb_amplitude, quadrature_variances, reference_remainder_variance, remainder_variance_wick, remainder_weights,
    CrlbDiagnostics, CrlbReport, GaussianProbeState, ReferenceKind, PARAXIAL_ANGLE,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error("spectrum is empty after the DC cutoff ({excluded} modes excluded)")]
    EmptySpectrum { excluded: usize },
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),
    #[error("out of model: {0}")]
    OutOfModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("separation |x| = {distance}, t = {time} is within 3 smearing widths ({width}) of the light cone")]
    NearLightCone { distance: f64, time: f64, width: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
}
