//! Spectral computations for Sturm-Liouville problems with indefinite
//! (±1) weights on metric graphs.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the bottom fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod bracketing;
pub mod error;
pub mod format;
pub mod graph;
pub mod krein;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Real;

pub type Graph = graph::MetricGraph<f64>;
pub type Form = assembly::DiscreteForm<f64>;
pub type Spectrum = spectrum::SpectrumResult<f64>;
pub type Potential = graph::PiecewisePotential<f64>;
