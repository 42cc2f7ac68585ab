//! Monte Carlo readout of the X2 quadrature and the linear amplitude
//! estimator built on it.
//!
//! Samples come from ChaCha8 streams keyed by (seed, chunk index), so a run
//! is bit-identical however the chunks are scheduled.

use crate::numerics::{par_sum, NeumaierSum};
use crate::probe::CrlbReport;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("response slope C is zero; the amplitude is not identifiable")]
    ZeroSlope,
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Readout variances below this are clamped.
pub const MIN_VARIANCE: f64 = 1e-30;
/// Samples per RNG stream.
pub const CHUNK: usize = 1 << 16;

/// Readout x ~ Normal(C·A_true + offset, var_x2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementModel {
    #[serde(default)]
    pub offset: f64,
    pub slope: f64,
    pub var_x2: f64,
    pub a_true: f64,
}

impl MeasurementModel {
    /// Model for a probe whose bound is `report`, with zero offset.
    pub fn from_report(report: &CrlbReport, a_true: f64) -> Self {
        Self { offset: 0.0, slope: report.c, var_x2: report.var_x2, a_true }
    }

    pub fn mean(&self) -> f64 {
        self.slope * self.a_true + self.offset
    }

    pub fn variance(&self) -> f64 {
        self.var_x2.max(MIN_VARIANCE)
    }

    /// var_x2/C², the single-shot estimator variance.
    pub fn estimator_variance(&self) -> Result<f64, EstimatorError> {
        if self.slope == 0.0 {
            return Err(EstimatorError::ZeroSlope);
        }
        Ok(self.variance() / (self.slope * self.slope))
    }

    fn validate(&self) -> Result<(), EstimatorError> {
        for (name, v) in [("offset", self.offset), ("slope", self.slope), ("a_true", self.a_true)] {
            if !v.is_finite() {
                return Err(EstimatorError::InvalidModel(format!("{name} is not finite")));
            }
        }
        if !(self.var_x2 >= 0.0 && self.var_x2.is_finite()) {
            return Err(EstimatorError::InvalidModel(format!("var_x2 must be ≥ 0, got {}", self.var_x2)));
        }
        Ok(())
    }
}

/// `n` i.i.d. readout draws, deterministic in `seed`.
pub fn simulate_readout(model: &MeasurementModel, n: usize, seed: u64) -> Result<Vec<f64>, EstimatorError> {
    if n == 0 {
        return Err(EstimatorError::NoSamples);
    }
    model.validate()?;
    let (mean, sd) = (model.mean(), model.variance().sqrt());
    let mut out = vec![0.0; n];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, xs)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        for x in xs.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x = mean + sd * z;
        }
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorRun {
    pub n: usize,
    pub seed: u64,
    #[serde(skip)]
    pub estimates: Vec<f64>,
    pub mean: f64,
    /// Unbiased sample variance of the single-shot estimates.
    pub variance: f64,
    /// √(variance/n).
    pub standard_error: f64,
    /// var_x2/C².
    pub analytic_variance: f64,
    /// |variance − analytic|/analytic.
    pub variance_relative_error: f64,
    /// 3√(2/n).
    pub variance_tolerance: f64,
    pub variance_consistent: bool,
    /// |mean − A_true| ≤ 5·standard_error.
    pub unbiased: bool,
}

/// Ã_i = (x_i − offset)/C with summary statistics.
pub fn linear_estimator(samples: &[f64], model: &MeasurementModel, seed: u64) -> Result<EstimatorRun, EstimatorError> {
    if samples.is_empty() {
        return Err(EstimatorError::NoSamples);
    }
    let analytic_variance = model.estimator_variance()?;
    let estimates: Vec<f64> = samples.iter().map(|x| (x - model.offset) / model.slope).collect();
    let n = estimates.len();
    let mean = par_sum(n, |i| estimates[i]) / n as f64;
    let variance = if n > 1 {
        par_sum(n, |i| (estimates[i] - mean).powi(2)) / (n - 1) as f64
    } else {
        0.0
    };
    let standard_error = (variance / n as f64).sqrt();
    let variance_relative_error = (variance - analytic_variance).abs() / analytic_variance;
    let variance_tolerance = 3.0 * (2.0 / n as f64).sqrt();
    Ok(EstimatorRun {
        n,
        seed,
        mean,
        variance,
        standard_error,
        analytic_variance,
        variance_relative_error,
        variance_tolerance,
        variance_consistent: variance_relative_error <= variance_tolerance,
        unbiased: (mean - model.a_true).abs() <= 5.0 * standard_error.max(f64::EPSILON * model.a_true.abs()),
        estimates,
    })
}

/// F = C²/var_x2 for the Gaussian location family.
pub fn classical_fisher(model: &MeasurementModel) -> f64 {
    model.slope * model.slope / model.variance()
}

pub const HISTOGRAM_BINS: usize = 64;
pub const HISTOGRAM_SPAN: f64 = 6.0;

/// Fisher information from a histogram of the readout: with bin densities
/// d_b and central differences d′_b, F ≈ C²Σ(d′_b)²/d_b·Δ over interior
/// bins with counts. Bins cover the model mean ± span·σ.
pub fn histogram_fisher(samples: &[f64], model: &MeasurementModel, bins: usize, span: f64) -> Result<f64, EstimatorError> {
    if samples.is_empty() {
        return Err(EstimatorError::NoSamples);
    }
    if bins < 3 || !(span > 0.0) {
        return Err(EstimatorError::InvalidModel(format!("need ≥ 3 bins and span > 0, got {bins}, {span}")));
    }
    let sd = model.variance().sqrt();
    let lo = model.mean() - span * sd;
    let width = 2.0 * span * sd / bins as f64;
    let mut counts = vec![0u64; bins];
    for x in samples {
        let b = ((x - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        }
    }
    let n = samples.len() as f64;
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let mut f = NeumaierSum::default();
    for b in 1..bins - 1 {
        if counts[b] == 0 {
            continue;
        }
        let d1 = (density[b + 1] - density[b - 1]) / (2.0 * width);
        f.add(d1 * d1 / density[b] * width);
    }
    Ok(model.slope * model.slope * f.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    /// ħ²/(4⟨(ΔX1)²⟩).
    pub quantum_bound: f64,
    /// 1/F = var_x2/C².
    pub classical_fisher_inverse: f64,
    /// (1/F)/quantum_bound; 1 at saturation, never below 1 for valid states.
    pub ratio: f64,
    pub saturated: bool,
}

/// Relative tolerance for calling a bound saturated.
pub const SATURATION_TOLERANCE: f64 = 1e-9;

/// Compares the X2-readout Fisher information with the quantum bound of
/// the probe state.
pub fn crb_saturation_check(report: &CrlbReport, model: &MeasurementModel) -> SaturationReport {
    let quantum_bound = report.hbar * report.hbar / (4.0 * report.var_x1);
    let classical_fisher_inverse = 1.0 / classical_fisher(model);
    let ratio = classical_fisher_inverse / quantum_bound;
    SaturationReport { quantum_bound, classical_fisher_inverse, ratio, saturated: (ratio - 1.0).abs() <= SATURATION_TOLERANCE }
}
