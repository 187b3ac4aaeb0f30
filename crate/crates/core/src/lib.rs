//! Degenerate Ohta-Kawasaki amphiphile model: a spectral phase-field simulator
//! together with the sharp-interface radial theory used to check it.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common double-precision instantiations.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod analysis;
pub mod cli_io;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod initcond;
pub mod numeric;
pub mod radial;
pub mod scalar;
pub mod spectral_grid;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid = spectral_grid::GridSpec<f64>;
pub type Field64 = spectral_grid::Field<f64>;
pub type Params = energy::PhysParams<f64>;
pub type Breakdown = energy::EnergyBreakdown<f64>;
pub type State = dynamics::RunState<f64>;
pub type Config = dynamics::StepperConfig<f64>;
