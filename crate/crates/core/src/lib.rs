//! Symmetry reduction of quantum N-body Hamiltonians.

pub mod acceptance;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod operators;
pub mod oracle;
pub mod shape;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
