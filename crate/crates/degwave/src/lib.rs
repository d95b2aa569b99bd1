//! Numerical laboratory for degenerate wave equations with drift and
//! degenerate damping: hypothesis checking on the coefficients, structure
//! preserving time integration, and frequency-domain stability evidence.

pub mod coefficients;
pub mod config;
pub mod error;
pub mod mesh;
pub mod operator;
pub mod simulate;
pub mod spectral;
pub mod decay;

pub use error::{Error, Result};
