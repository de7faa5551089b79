//! Linear stability, spectral decay and entropy diagnostics for the
//! linearized radiative Euler-MHD system.

pub mod config;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod model;
pub mod propagator;
pub mod report;
pub mod sphere;
pub mod stability;
pub mod symbols;

pub use error::{Error, Result};
