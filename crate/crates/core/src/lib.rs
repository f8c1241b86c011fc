//! Simulation of pulsed type-II parametric down-conversion with double-pass
//! compensation.
//!
//! The crate is layered bottom-up:
//!
//! * [`dispersion`]: BBO refractive indices and group velocities.
//! * [`jsa`]: joint spectral amplitudes, spectral filters, the exchange-overlap
//!   visibility and relative count rates.
//! * [`fock`]: a sparse multimode bosonic Fock engine with pair-creation
//!   Hamiltonians and threshold-detector coincidence statistics.
//! * [`model`]: the single/double-pass Hamiltonians and the observables built
//!   on them (polarization visibility, fringes, pump-power dependence).
//! * [`run`]: the scenario runner behind the `pdcsim` binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
pub mod error;
pub mod exec;
pub mod fock;
pub mod jsa;
pub mod model;
pub mod output;
pub mod run;

pub use error::{Error, Result};
pub use exec::Execution;
