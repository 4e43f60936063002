//! Random functional graphs with a prescribed in-degree sequence.
//!
//! The crate samples uniform mappings `f: [n] -> [n]` whose in-degrees are
//! fixed, computes the exact law of the six-length (rho-length), tail
//! length and cycle length of the trajectory from a start vertex, compares
//! it against closed-form asymptotics, and implements the contraction /
//! re-inflation coupling with a Pólya urn used for sequences of small
//! coalescence.

pub mod asymptotics;
pub mod degrees;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod graph;
pub mod reduction;
pub mod stats;

pub use degrees::{DegreeSequence, DegreeStats};
pub use error::{Error, Result};
pub use graph::{FunctionalGraph, LazyWalker, WalkLengths};
