//! Statevector variational quantum eigensolver for the transverse-field
//! Ising model, with gradient and quantum-natural-gradient optimizers.

#![cfg_attr(test, allow(clippy::single_range_in_vec_init))]

pub mod ansatz;
pub mod check;
pub mod error;
pub mod grad;
pub mod harness;
pub mod ising;
pub mod metric;
pub mod objective;
pub mod optimize;
pub mod pauli;
pub mod schedule;
pub mod seed;
pub mod state;

pub use error::{Result, VqeError};
