//! Compensated summation.
//!
//! Every reduction in the crate goes through [`NeumaierSum`] so that results
//! are reproducible to the last few ulps no matter how work is partitioned
//! across threads: partial sums are always produced for fixed-size blocks and
//! merged in block order.

use rayon::prelude::*;

/// Block length used by the parallel reductions. Fixed so that the block
/// boundaries, and therefore the rounding, never depend on the thread count.
pub const BLOCK: usize = 4096;

/// Kahan-Babuška-Neumaier running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum into this one, keeping both compensation terms.
    #[inline]
    pub fn merge(&mut self, other: NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of `f(i)` for `i in 0..n`, computed block-parallel with a
/// deterministic merge order.
pub fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<NeumaierSum> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            (lo..hi).map(&f).collect()
        })
        .collect();
    let mut total = NeumaierSum::new();
    for p in partials {
        total.merge(p);
    }
    total.value()
}

/// Compensated sum of a slice.
pub fn sum_slice(xs: &[f64]) -> f64 {
    par_sum(xs.len(), |i| xs[i])
}
