//! Brute-force truncated Fock-space moments for one or two modes, used as
//! an oracle for the Gaussian formulas.
//!
//! The state D(α)·exp(r[(b†)² − b²]/2)|0⟩ is built by stepping the
//! exponentials of the (anti-Hermitian) generators with Taylor series.

use super::spectrum::effective_mode_coefficients;
use super::state::{remainder_weights, GaussianProbeState};
use super::ProbeError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default photon-number truncation per mode. A displaced squeezed state
/// with |α| = 2, r = 0.8 still has 1e-10 of its weight at n = 80.
pub const DEFAULT_TRUNCATION: usize = 120;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockMoments {
    pub truncation: usize,
    pub var_x1: f64,
    pub var_x2: f64,
    /// ⟨(ΔF)²⟩ for F = Σκ_k Δa_k†Δa_k.
    pub var_remainder: f64,
    /// ⟨a_k⟩, which should reproduce the displacement.
    pub mean_a: Vec<Complex64>,
    /// Probability in the states with some n_k = truncation.
    pub edge_weight: f64,
}

type State = Vec<Complex64>;

struct Space {
    modes: usize,
    n: usize,
}

impl Space {
    fn dim(&self) -> usize {
        self.n.pow(self.modes as u32)
    }

    fn stride(&self, k: usize) -> usize {
        self.n.pow((self.modes - 1 - k) as u32)
    }

    fn occupation(&self, idx: usize, k: usize) -> usize {
        (idx / self.stride(k)) % self.n
    }

    fn lower(&self, k: usize, v: &State) -> State {
        let s = self.stride(k);
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (idx, amp) in v.iter().enumerate() {
            let nk = self.occupation(idx, k);
            if nk > 0 {
                out[idx - s] += amp * (nk as f64).sqrt();
            }
        }
        out
    }

    fn raise(&self, k: usize, v: &State) -> State {
        let s = self.stride(k);
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (idx, amp) in v.iter().enumerate() {
            let nk = self.occupation(idx, k);
            if nk + 1 < self.n {
                out[idx + s] += amp * ((nk + 1) as f64).sqrt();
            }
        }
        out
    }

    /// Σ u_k a_k v + Σ w_k a_k† v.
    fn linear(&self, u: &[Complex64], w: &[Complex64], v: &State) -> State {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for k in 0..self.modes {
            if u[k] != Complex64::new(0.0, 0.0) {
                axpy(&mut out, u[k], &self.lower(k, v));
            }
            if w[k] != Complex64::new(0.0, 0.0) {
                axpy(&mut out, w[k], &self.raise(k, v));
            }
        }
        out
    }
}

fn axpy(y: &mut State, a: Complex64, x: &State) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(v: &State) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(a: &State, b: &State) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// exp(G)v for anti-Hermitian G with ‖G‖ ≤ bound, in unit-norm substeps.
fn expm_apply(g: impl Fn(&State) -> State, bound: f64, v: State) -> State {
    let steps = bound.ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let mut v = v;
    for _ in 0..steps {
        let scale = norm(&v);
        let mut term = v.clone();
        let mut acc = v.clone();
        for j in 1..80 {
            term = g(&term);
            let f = h / j as f64;
            term.iter_mut().for_each(|z| *z *= f);
            axpy(&mut acc, Complex64::new(1.0, 0.0), &term);
            if norm(&term) < 1e-18 * scale {
                break;
            }
        }
        v = acc;
    }
    v
}

/// Variance of the Hermitian operator A given A|ψ⟩: ‖Aψ‖² − ⟨ψ|A|ψ⟩².
fn variance(psi: &State, a_psi: &State) -> f64 {
    let mean = inner(psi, a_psi).re;
    let mut centered = a_psi.clone();
    axpy(&mut centered, Complex64::new(-mean, 0.0), psi);
    norm(&centered).powi(2)
}

/// Fock-space moments of `state` (one or two modes) at `truncation`
/// photons per mode.
pub fn fock_moments(state: &GaussianProbeState, truncation: usize) -> Result<FockMoments, ProbeError> {
    let spectrum = state.spectrum();
    let m = spectrum.len();
    if !(1..=2).contains(&m) {
        return Err(ProbeError::InvalidParameter(format!("the Fock oracle handles 1 or 2 modes, got {m}")));
    }
    if truncation < 2 {
        return Err(ProbeError::InvalidParameter("truncation must be at least 2".into()));
    }
    let space = Space { modes: m, n: truncation + 1 };
    let hbar = state.hbar();
    let c = effective_mode_coefficients(spectrum, hbar)?;
    let alpha = spectrum.alpha();
    let zero = vec![Complex64::new(0.0, 0.0); m];
    let cc: Vec<Complex64> = c.iter().map(|z| z.conj()).collect();
    let nmax = truncation as f64;

    let mut psi = vec![Complex64::new(0.0, 0.0); space.dim()];
    psi[0] = Complex64::new(1.0, 0.0);
    let r = state.squeeze_r();
    if r != 0.0 {
        // G = (r/2)(b†² − b²), b = Σc_k a_k
        let g = |v: &State| {
            let bd = space.linear(&zero, &cc, v);
            let b = space.linear(&c, &zero, v);
            let mut out = space.linear(&zero, &cc, &bd);
            axpy(&mut out, Complex64::new(-1.0, 0.0), &space.linear(&c, &zero, &b));
            out.iter_mut().for_each(|z| *z *= 0.5 * r);
            out
        };
        psi = expm_apply(g, r * 2.0 * (nmax + 1.0), psi);
    }
    let neg_conj: Vec<Complex64> = alpha.iter().map(|a| -a.conj()).collect();
    let disp = |v: &State| space.linear(&neg_conj, alpha, v);
    let bound = 2.0 * alpha.iter().map(|a| a.norm()).sum::<f64>() * (nmax + 1.0).sqrt();
    psi = expm_apply(disp, bound, psi);

    let mean_a: Vec<Complex64> = (0..m).map(|k| inner(&psi, &space.lower(k, &psi))).collect();

    // X1 = ½τħΣω(α* a + α a†), X2 the same with α → iα
    let tau = spectrum.tau();
    let quad = |phase: Complex64| {
        let coef: Vec<Complex64> = spectrum
            .modes()
            .iter()
            .zip(alpha)
            .map(|(md, a)| phase * a * (0.5 * tau * hbar * md.omega))
            .collect();
        let conj: Vec<Complex64> = coef.iter().map(|z| z.conj()).collect();
        variance(&psi, &space.linear(&conj, &coef, &psi))
    };
    let var_x1 = quad(Complex64::new(1.0, 0.0));
    let var_x2 = quad(Complex64::i());

    let kappa = remainder_weights(spectrum, hbar);
    let mut f_psi = vec![Complex64::new(0.0, 0.0); psi.len()];
    for k in 0..m {
        let one = |z: Complex64| {
            let mut v = zero.clone();
            v[k] = z;
            v
        };
        // Δa = a − ⟨a⟩
        let mut da = space.lower(k, &psi);
        axpy(&mut da, -mean_a[k], &psi);
        let mut dadag_da = space.linear(&zero, &one(Complex64::new(1.0, 0.0)), &da);
        axpy(&mut dadag_da, -mean_a[k].conj(), &da);
        axpy(&mut f_psi, Complex64::new(kappa[k], 0.0), &dadag_da);
    }
    let var_remainder = variance(&psi, &f_psi);

    let edge_weight = psi
        .iter()
        .enumerate()
        .filter(|(idx, _)| (0..m).any(|k| space.occupation(*idx, k) == truncation))
        .map(|(_, z)| z.norm_sqr())
        .sum();
    Ok(FockMoments { truncation, var_x1, var_x2, var_remainder, mean_a, edge_weight })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::{quadrature_variances, remainder_variance_wick, ModeSpectrum, Mode};

    #[test]
    fn coherent_single_mode() {
        let s = ModeSpectrum::new(vec![Mode::along_x(1.3, 1.0)], vec![Complex64::new(0.8, -0.4)], 1.0, 0.1).unwrap();
        let st = GaussianProbeState::coherent(s, 1.0).unwrap();
        let f = fock_moments(&st, 30).unwrap();
        let (v1, v2) = quadrature_variances(&st);
        assert!((f.var_x1 - v1).abs() < 1e-10);
        assert!((f.var_x2 - v2).abs() < 1e-10);
        assert!(f.var_remainder.abs() < 1e-10);
        assert!((f.mean_a[0] - Complex64::new(0.8, -0.4)).norm() < 1e-10);
    }

    #[test]
    fn squeezed_two_modes() {
        let s = ModeSpectrum::new(
            vec![Mode::along_x(1.0, 1.0), Mode::along_x(1.7, 1.0)],
            vec![Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.5)],
            1.0,
            0.1,
        )
        .unwrap();
        let st = GaussianProbeState::squeezed(s, 0.4, 1.0).unwrap();
        let f = fock_moments(&st, 24).unwrap();
        let (v1, v2) = quadrature_variances(&st);
        assert!((f.var_x1 - v1).abs() < 1e-8, "{} {}", f.var_x1, v1);
        assert!((f.var_x2 - v2).abs() < 1e-8);
        let w = remainder_variance_wick(&st).unwrap();
        assert!((f.var_remainder - w).abs() < 1e-8, "{} {}", f.var_remainder, w);
    }
}
