//! Numerical toolkit for periodic higher-order dispersive equations:
//! truncated Fourier fields, dispersion symbols, small-divisor period sets,
//! spectral time stepping, normal-form Duhamel analysis and the periodic
//! fixed-point map.

pub mod duhamel;
pub mod error;
pub mod family;
pub mod fixedpoint;
pub mod smalldivisor;
pub mod evolution;
pub mod spectrum;
pub mod stats;
pub mod symbols;

pub use error::{Error, Result};
pub use family::{EquationFamily, FamilyParams, FamilyRegistry};
pub use spectrum::{FourierField, SobolevIndex};
pub use symbols::LinearSymbol;
