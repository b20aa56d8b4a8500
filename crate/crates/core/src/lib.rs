//! Gaussian EPR steering between a ground station and a satellite when the
//! photon pair is distorted by the Earth's Kerr spacetime.
//!
//! The pipeline runs height → frequency shift δ → mode overlap Θ → steering.
//! [`sweep`] evaluates it over grids of parameters, [`emit`] writes the tables.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Node tables and reference values keep every digit they were computed with.
#![allow(clippy::excessive_precision)]

pub mod channel;
pub mod ddouble;
pub mod diagnostics;
pub mod emit;
pub mod error;
pub mod gaussian;
pub mod quadrature;
pub mod spacetime;
pub mod steering;
pub mod sweep;

pub use channel::{end_to_end, ChannelParams, PipelineOutput, WavePacket};
pub use error::{Error, Result};
pub use gaussian::{CovMatrix, SymplecticTransform};
pub use spacetime::{DeltaMode, EarthModel, OrbitDirection, OrbitGeometry};
pub use steering::{steering_asymmetry, SteeringResult};
pub use sweep::{figure_preset, run_sweep, run_sweep_sequential, FigureId, SweepRow, SweepSpec};
