//! Numerical plumbing shared by the physics modules.

pub mod fd;
pub mod quadrature;
pub mod sum;

pub use fd::StencilOrder;
pub use quadrature::{AxisRule, Rule};
pub use sum::{par_sum, NeumaierSum};
