//! Rounding almost-synchronous commuting strategies for synchronous games
//! into tracial strategies, and exact finite-dimensional checks of the
//! Connes-type inequalities behind it.

pub mod error;
pub mod games;
pub mod haagerup;
pub mod linalg;
pub mod rounding;
pub mod sampling;
pub mod spectral;
pub mod strategies;

pub use error::{Error, Result};
