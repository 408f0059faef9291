//! Quantum model of a price-limited stock market with a minimal price length.
//!
//! A stock's daily return lives in an infinite square well whose walls are the
//! exchange's price limits. A nonzero tick size deforms the price/trend
//! commutator, which adds a quartic trend term to the Hamiltonian and shifts
//! every level upward. Market information enters as a periodic dipole drive
//! `lambda * r * cos(omega * t)`.
//!
//! Modules:
//!
//! * [`params`]: validated model parameters and basis states.
//! * [`spectrum`]: closed-form eigenpairs and characteristic frequencies.
//! * [`operators`]: dipole couplings, deformed trend operator on a grid,
//!   uncertainty-region geometry.
//! * [`dynamics`]: first-order amplitudes, a unitary propagator, densities and
//!   resonance scans.
//! * [`calibration`]: market observables to model parameters.
//! * [`io`]: run configuration, CSV/JSON exports and the command runners used
//!   by the `gupmkt` binary.

// NaN must fail validation, so checks are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod band;
pub mod calibration;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod operators;
pub mod params;
pub mod quadrature;
pub mod spectrum;

pub use error::{Error, ErrorCategory, Result};
pub use params::{ground_state, validate_params, ModelParams, TimeUnit, ValidatedParams, WaveState};

pub use num_complex::Complex64 as C64;
