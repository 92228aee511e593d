//! Four-dimensional constellation shaping: labeled constellations, reference
//! formats, AWGN achievable-rate estimators, joint geometry/labeling
//! optimization and an analytic nonlinear-interference link model.
//!
//! Coordinates are generic over [`Real`] (`f32` or `f64`); statistics,
//! channel parameters and link quantities are always `f64`.

pub mod air;
pub mod constellation;
pub mod error;
pub mod formats;
pub mod io;
pub mod link;
pub mod optimize;
pub mod orthant;
pub mod scalar;

pub use constellation::{DistanceSpectrum, LabeledConstellation, MomentSet, Polarization, SpectrumEntry};
pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision constellation, the default used by the CLI.
pub type Constellation = LabeledConstellation<f64>;
/// Single-precision constellation.
pub type Constellation32 = LabeledConstellation<f32>;
