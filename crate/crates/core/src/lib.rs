//! Quantum Cramér-Rao bounds for estimating a parameter of a classical
//! spacetime metric with bosonic probe fields in Gaussian states.

pub mod cli;
pub mod estimator;
pub mod generator;
pub mod grid;
pub mod metric;
pub mod numerics;
pub mod probe;
pub mod stress;
