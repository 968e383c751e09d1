//! Simulator for the single-particle path/spin contextuality experiment.
//!
//! The particle's spatial mode (`u`/`d`) carries one qubit and its spin the
//! other. Devices built from beam splitters and Stern-Gerlach routers measure
//! pairs of the observables `Z1, X1, Z2, X2` or, cascaded, the products
//! `Z1X2` and `X1Z2` jointly. [`nct`] enumerates every non-contextual value
//! assignment and shows none reproduces the quantum outcome support.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below are what the CLI and acceptance suite use.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod nct;
pub mod observables;
pub mod optics;
pub mod outcome;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use outcome::{OutcomeLabel, Sign};
pub use scalar::Real;
pub use state::{Axis, ModeLabel};

pub type Amplitude64 = state::Amplitude<f64>;
pub type Amplitude32 = state::Amplitude<f32>;
pub type SpinVector64 = state::SpinVector<f64>;
pub type SpinVector32 = state::SpinVector<f32>;
pub type State64 = state::PathSpinState<f64>;
pub type State32 = state::PathSpinState<f32>;
pub type Matrix64 = linalg::CMatrix<f64>;
pub type Matrix32 = linalg::CMatrix<f32>;
pub type TransferCheck64 = optics::TransferCheck<f64>;
pub type TransferCheck32 = optics::TransferCheck<f32>;
pub type Distribution64 = measurement::OutcomeDistribution<f64>;
pub type Distribution32 = measurement::OutcomeDistribution<f32>;
