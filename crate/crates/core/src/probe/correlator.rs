//! Smeared vacuum correlator kernel D(x, t) = p.v. 1/(−t² + |x|²).
//!
//! Mode form: D = 2π² Re∫d³k/(2π)³ (1/ω) e^{i(k·x − ωt)}. With a Gaussian
//! frequency cutoff e^{−ω²w²/2} and the azimuth done in closed form this is
//! ½∫k dk ∫dμ cos(k(Rμ − t)) e^{−k²w²/2}, evaluated on a (k, μ) lattice.

use super::ProbeError;
use crate::numerics::{par_sum, AxisRule, Rule};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorCheck {
    pub t: f64,
    pub distance: f64,
    pub width: f64,
    pub numeric: f64,
    pub analytic: f64,
    pub relative_error: f64,
}

/// Separations checked by default, as (t, |x|).
pub const BUNDLED_SEPARATIONS: [(f64, f64); 2] = [(0.0, 2.0), (1.0, 3.0)];

const GL_POINTS: usize = 16;
/// e^{−k²w²/2} is below e^{−50} past k = 10/w.
const CUTOFF_SIGMAS: f64 = 10.0;

/// Compares the cutoff mode-lattice value with 1/(|x|² − t²). Needs
/// |x| > |t| + 3·width.
pub fn smeared_correlator_check(separation: [f64; 4], width: f64) -> Result<CorrelatorCheck, ProbeError> {
    let t = separation[0];
    let r = (separation[1].powi(2) + separation[2].powi(2) + separation[3].powi(2)).sqrt();
    if !(width > 0.0 && width.is_finite()) {
        return Err(ProbeError::InvalidParameter(format!("smearing width must be positive, got {width}")));
    }
    if !(r > t.abs() + 3.0 * width) {
        return Err(ProbeError::NearLightCone { distance: r, time: t, width });
    }
    let analytic = 1.0 / (r * r - t * t);
    let k_max = CUTOFF_SIGMAS / width;
    let panels = |phase: f64| (phase / PI).ceil() as usize + 2;
    let mu_rule = AxisRule::new(-1.0, 1.0, panels(2.0 * k_max * r), Rule::GaussLegendre { points: GL_POINTS });
    let k_rule = AxisRule::new(0.0, k_max, panels(k_max * (r + t.abs())), Rule::GaussLegendre { points: GL_POINTS });
    let numeric = 0.5
        * par_sum(k_rule.len(), |i| {
            let k = k_rule.nodes[i];
            let inner: f64 = mu_rule
                .nodes
                .iter()
                .zip(&mu_rule.weights)
                .map(|(mu, w)| w * (k * (r * mu - t)).cos())
                .sum();
            k_rule.weights[i] * k * (-0.5 * k * k * width * width).exp() * inner
        });
    Ok(CorrelatorCheck {
        t,
        distance: r,
        width,
        numeric,
        analytic,
        relative_error: (numeric - analytic).abs() / analytic.abs(),
    })
}
