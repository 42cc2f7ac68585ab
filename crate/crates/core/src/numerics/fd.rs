//! Central finite differences for scalar-, vector- and matrix-valued maps.

use std::ops::{Add, Mul, Sub};

/// Stencil order of a central difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum StencilOrder {
    #[default]
    #[serde(rename = "2")]
    Second,
    #[serde(rename = "4")]
    Fourth,
}

impl StencilOrder {
    pub fn order(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    /// Offsets (in units of h) and coefficients of the first-derivative stencil.
    pub fn taps(self) -> &'static [(f64, f64)] {
        match self {
            StencilOrder::Second => &[(-1.0, -0.5), (1.0, 0.5)],
            StencilOrder::Fourth => &[
                (-2.0, 1.0 / 12.0),
                (-1.0, -8.0 / 12.0),
                (1.0, 8.0 / 12.0),
                (2.0, -1.0 / 12.0),
            ],
        }
    }
}

/// First derivative of `f` at `x0` with step `h` and the given stencil.
pub fn central<T, F>(f: F, x0: f64, h: f64, order: StencilOrder) -> T
where
    T: Add<Output = T> + Mul<f64, Output = T> + Copy,
    F: Fn(f64) -> T,
{
    let taps = order.taps();
    let mut acc = f(x0 + taps[0].0 * h) * (taps[0].1 / h);
    for &(off, c) in &taps[1..] {
        acc = acc + f(x0 + off * h) * (c / h);
    }
    acc
}

/// Second-order central difference at steps `h` and `h/2`, combined by one
/// Richardson step into a fourth-order estimate.
pub fn richardson_central<T, F>(f: F, x0: f64, h: f64) -> T
where
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Copy,
    F: Fn(f64) -> T,
{
    let d1: T = central(&f, x0, h, StencilOrder::Second);
    let d2: T = central(&f, x0, 0.5 * h, StencilOrder::Second);
    d2 * (4.0 / 3.0) - d1 * (1.0 / 3.0)
}
