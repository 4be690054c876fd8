//! Dark-state polariton phonon source: truncated Fock-space algebra, the
//! bosonized NV-ensemble model and its effective Kerr reduction, Lindblad
//! and Schrödinger integrators, g²(0) statistics, and exact-diagonalization
//! checks of the reduction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod par;

pub use error::{Error, Result};
