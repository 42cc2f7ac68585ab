//! Separable bump functions χ: 1 on a plateau box, 0 outside a support box.

use super::{MetricError, Point, DIM};
use crate::numerics::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Shape of the 0 → 1 transition across the shell between support and plateau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// Generalized smoothstep of degree 2k+1; C^k at both ends.
    Smoothstep { order: u32 },
    /// Normalized running integral of the mollifier exp(−1/(1−s²)); C^∞.
    Mollifier,
}

impl ProfileKind {
    /// Transition value at normalized depth u ∈ [0, 1] (0 at the support
    /// edge, 1 at the plateau edge).
    pub fn transition(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match *self {
            ProfileKind::Smoothstep { order } => smoothstep(order, u),
            ProfileKind::Mollifier => mollifier_step(u),
        }
    }

    /// d(transition)/du.
    pub fn transition_derivative(&self, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        match *self {
            ProfileKind::Smoothstep { order } => smoothstep_derivative(order, u),
            ProfileKind::Mollifier => 2.0 * mollifier(2.0 * u - 1.0) / mollifier_total(),
        }
    }

    /// Declared smoothness order (u32::MAX stands for C^∞).
    pub fn smoothness(&self) -> u32 {
        match *self {
            ProfileKind::Smoothstep { order } => order,
            ProfileKind::Mollifier => u32::MAX,
        }
    }
}

/// c_n = C(k+n, n)·C(2k+1, k−n) for n = 0..=k, by recurrence.
fn smoothstep_coefficients(k: u32) -> impl Iterator<Item = (u32, f64)> {
    let c0 = (0..k).fold(1.0, |acc, i| acc * (2 * k + 1 - i) as f64 / (i + 1) as f64);
    (0..=k).scan(c0, move |c, n| {
        let out = *c;
        if n < k {
            *c *= (k + n + 1) as f64 * (k - n) as f64 / ((n + 1) as f64 * (k + n + 2) as f64);
        }
        Some((n, out))
    })
}

/// Σ_n w(n)·c_n·(−u)^n by Horner's rule.
fn smoothstep_poly(k: u32, u: f64, w: impl Fn(u32) -> f64) -> f64 {
    let mut stack = [0.0; 21];
    let mut heap = Vec::new();
    let c: &mut [f64] = if k <= 20 {
        &mut stack[..=k as usize]
    } else {
        heap.resize(k as usize + 1, 0.0);
        &mut heap
    };
    for (n, cn) in smoothstep_coefficients(k) {
        c[n as usize] = w(n) * cn;
    }
    c.iter().rev().fold(0.0, |acc, cn| acc * -u + cn)
}

/// S_k(u) = u^{k+1} Σ_{n=0}^{k} C(k+n, n) C(2k+1, k−n) (−u)^n
fn smoothstep(k: u32, u: f64) -> f64 {
    (u.powi(k as i32 + 1) * smoothstep_poly(k, u, |_| 1.0)).clamp(0.0, 1.0)
}

fn smoothstep_derivative(k: u32, u: f64) -> f64 {
    u.powi(k as i32) * smoothstep_poly(k, u, |n| (n + k + 1) as f64)
}

fn mollifier(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

const MOLLIFIER_PANELS: usize = 8;

fn mollifier_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(12))
}

/// ∫_{-1}^{s} φ over [-1, 1]-normalized panels.
fn mollifier_integral(s: f64) -> f64 {
    let (x, w) = mollifier_nodes();
    let width = (s + 1.0) / MOLLIFIER_PANELS as f64;
    let mut acc = 0.0;
    for p in 0..MOLLIFIER_PANELS {
        let mid = -1.0 + width * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(w) {
            acc += 0.5 * width * wi * mollifier(mid + 0.5 * width * xi);
        }
    }
    acc
}

fn mollifier_total() -> f64 {
    static TOTAL: OnceLock<f64> = OnceLock::new();
    *TOTAL.get_or_init(|| 2.0 * mollifier_integral(0.0))
}

fn mollifier_step(u: f64) -> f64 {
    let total = mollifier_total();
    // symmetric about u = 1/2; integrate the shorter side for accuracy
    if u <= 0.5 {
        mollifier_integral(2.0 * u - 1.0) / total
    } else {
        1.0 - mollifier_integral(1.0 - 2.0 * u) / total
    }
}

/// Plateau and support intervals on one axis; plateau strictly inside support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisWindow {
    pub plateau: (f64, f64),
    pub support: (f64, f64),
}

impl AxisWindow {
    pub fn new(plateau: (f64, f64), support: (f64, f64)) -> Result<Self, MetricError> {
        let ok = support.0 < plateau.0 && plateau.0 <= plateau.1 && plateau.1 < support.1;
        if !ok || [plateau.0, plateau.1, support.0, support.1].iter().any(|v| !v.is_finite()) {
            return Err(MetricError::InvalidBump(format!(
                "plateau {plateau:?} must lie strictly inside support {support:?}"
            )));
        }
        Ok(Self { plateau, support })
    }

    /// Symmetric margin around a plateau.
    pub fn with_margin(plateau: (f64, f64), margin: f64) -> Result<Self, MetricError> {
        Self::new(plateau, (plateau.0 - margin, plateau.1 + margin))
    }

    /// d(factor)/dv.
    pub fn factor_derivative(&self, kind: &ProfileKind, v: f64) -> f64 {
        if v <= self.support.0 || v >= self.support.1 {
            0.0
        } else if v < self.plateau.0 {
            let w = self.plateau.0 - self.support.0;
            kind.transition_derivative((v - self.support.0) / w) / w
        } else if v > self.plateau.1 {
            let w = self.support.1 - self.plateau.1;
            -kind.transition_derivative((self.support.1 - v) / w) / w
        } else {
            0.0
        }
    }

    /// Per-axis factor in [0, 1].
    pub fn factor(&self, kind: &ProfileKind, v: f64) -> f64 {
        if v <= self.support.0 || v >= self.support.1 {
            0.0
        } else if v < self.plateau.0 {
            kind.transition((v - self.support.0) / (self.plateau.0 - self.support.0))
        } else if v > self.plateau.1 {
            kind.transition((self.support.1 - v) / (self.support.1 - self.plateau.1))
        } else {
            1.0
        }
    }
}

/// Smooth compactly supported χ with 0 ≤ χ ≤ 1, product of per-axis factors.
/// Axes without a window are not localized (factor 1 everywhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub kind: ProfileKind,
    pub axes: [Option<AxisWindow>; DIM],
}

impl BumpProfile {
    pub fn new(kind: ProfileKind, axes: [Option<AxisWindow>; DIM]) -> Result<Self, MetricError> {
        if let ProfileKind::Smoothstep { order } = kind {
            if order == 0 || order > 20 {
                return Err(MetricError::InvalidBump(format!("smoothstep order must be in 1..=20, got {order}")));
            }
        }
        if axes.iter().all(Option::is_none) {
            return Err(MetricError::InvalidBump("at least one axis must be localized".into()));
        }
        Ok(Self { kind, axes })
    }

    /// Box plateau [lo, hi] on every axis, widened by `margin` for the support.
    pub fn boxed(kind: ProfileKind, lo: Point, hi: Point, margin: f64) -> Result<Self, MetricError> {
        let mut axes = [None; DIM];
        for i in 0..DIM {
            axes[i] = Some(AxisWindow::with_margin((lo[i], hi[i]), margin)?);
        }
        Self::new(kind, axes)
    }

    /// χ(x).
    pub fn value(&self, x: &Point) -> f64 {
        let mut chi = 1.0;
        for (w, &v) in self.axes.iter().zip(x) {
            if let Some(w) = w {
                chi *= w.factor(&self.kind, v);
                if chi == 0.0 {
                    return 0.0;
                }
            }
        }
        chi
    }

    pub fn on_plateau(&self, x: &Point) -> bool {
        self.axes.iter().zip(x).all(|(w, &v)| match w {
            Some(w) => v >= w.plateau.0 && v <= w.plateau.1,
            None => true,
        })
    }

    pub fn in_support(&self, x: &Point) -> bool {
        self.axes.iter().zip(x).all(|(w, &v)| match w {
            Some(w) => v > w.support.0 && v < w.support.1,
            None => true,
        })
    }

    /// Width of the transition shell on each localized axis (smaller side).
    pub fn transition_widths(&self) -> [Option<f64>; DIM] {
        std::array::from_fn(|i| {
            self.axes[i].map(|w| (w.plateau.0 - w.support.0).min(w.support.1 - w.plateau.1))
        })
    }
}

/// χ(x) for a bump profile.
pub fn bump_value(bump: &BumpProfile, x: &Point) -> f64 {
    bump.value(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_bump(kind: ProfileKind) -> BumpProfile {
        BumpProfile::new(kind, [Some(AxisWindow::new((-1.0, 1.0), (-2.0, 2.0)).unwrap()), None, None, None])
            .unwrap()
    }

    #[test]
    fn plateau_support_and_midpoint() {
        let b = unit_bump(ProfileKind::Smoothstep { order: 3 });
        assert_eq!(b.value(&[0.0, 5.0, -3.0, 1.0]), 1.0);
        assert_eq!(b.value(&[2.5, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(b.value(&[-2.0, 0.0, 0.0, 0.0]), 0.0);
        assert!((b.value(&[-1.5, 0.0, 0.0, 0.0]) - 0.5).abs() < 1e-15);
        assert!((b.value(&[1.5, 0.0, 0.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn smoothstep_order_one_is_cubic() {
        for u in [0.1, 0.3, 0.77] {
            assert!((smoothstep(1, u) - u * u * (3.0 - 2.0 * u)).abs() < 1e-15);
        }
    }

    #[test]
    fn mollifier_step_is_symmetric_and_monotone() {
        let k = ProfileKind::Mollifier;
        assert!((k.transition(0.5) - 0.5).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let v = k.transition(u);
            assert!(v >= prev - 1e-15, "non-monotone at {u}");
            assert!((v + k.transition(1.0 - u) - 1.0).abs() < 1e-12);
            prev = v;
        }
    }

    #[test]
    fn smoothstep_derivatives_vanish_at_ends_up_to_order() {
        // k-th derivative at the ends vanishes for S_k; check the first via FD.
        let k = ProfileKind::Smoothstep { order: 3 };
        let h = 1e-4;
        let d0 = (k.transition(h) - k.transition(0.0)) / h;
        let d1 = (k.transition(1.0) - k.transition(1.0 - h)) / h;
        assert!(d0.abs() < 1e-9 && d1.abs() < 1e-9);
    }

    #[test]
    fn factor_derivative_matches_finite_differences() {
        let w = AxisWindow::new((1.0, 2.0), (0.2, 3.5)).unwrap();
        for kind in [ProfileKind::Smoothstep { order: 1 }, ProfileKind::Smoothstep { order: 4 }, ProfileKind::Mollifier] {
            for v in [0.5, 0.9, 1.5, 2.3, 3.1] {
                let h = 1e-5;
                let fd = (w.factor(&kind, v + h) - w.factor(&kind, v - h)) / (2.0 * h);
                assert!((fd - w.factor_derivative(&kind, v)).abs() < 1e-7, "{kind:?} at {v}");
            }
        }
    }

    #[test]
    fn rejects_plateau_touching_support() {
        assert!(AxisWindow::new((-1.0, 1.0), (-1.0, 2.0)).is_err());
        assert!(AxisWindow::new((0.0, 3.0), (-1.0, 2.0)).is_err());
        assert!(BumpProfile::new(ProfileKind::Mollifier, [None; 4]).is_err());
        assert!(BumpProfile::new(
            ProfileKind::Smoothstep { order: 0 },
            [Some(AxisWindow::new((0.0, 1.0), (-1.0, 2.0)).unwrap()), None, None, None]
        )
        .is_err());
    }

    #[test]
    fn product_over_axes() {
        let b = BumpProfile::boxed(ProfileKind::Smoothstep { order: 2 }, [0.0; 4], [1.0; 4], 1.0).unwrap();
        let x = [-0.5, -0.5, 0.5, 0.5];
        assert!((b.value(&x) - 0.25).abs() < 1e-15);
        assert!(b.in_support(&x) && !b.on_plateau(&x));
    }
}
