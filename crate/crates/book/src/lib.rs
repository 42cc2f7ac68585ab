//! The guide under `book/`, included chapter by chapter so that its code
//! listings run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/metric-families.md")]
pub mod metric_families {}
#[doc = include_str!("../../../book/src/generator.md")]
pub mod generator {}
#[doc = include_str!("../../../book/src/probe.md")]
pub mod probe {}
#[doc = include_str!("../../../book/src/estimator.md")]
pub mod estimator {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/report.md")]
pub mod report {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
