//! Ground state of a deep-strong-coupled qubit-resonator system attached to a
//! waveguide: coherent variational state, exact diagonalization of the
//! truncated Hamiltonian, and nonclassicality via metrological power.
//!
//! Frequencies are angular and measured in units of the resonator frequency
//! (`omega_r = 1`, `hbar = 1`) everywhere inside the crate. Conversion from
//! laboratory units (GHz, MHz, ohm, nH, fF) happens in [`units`] and [`config`].

pub mod config;
pub mod cvs;
pub mod diag;
pub mod environment;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod metrology;
pub mod quad;
pub mod rabi;
pub mod run;
pub mod units;

pub use error::{Error, Result};
