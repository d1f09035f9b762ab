//! Ultrafine entanglement witnesses for small bipartite quantum systems.
//!
//! The crate builds witnesses of the form `b·I - T` from a test operator and
//! a constraint observable, computes the suprema that make them valid over
//! separable states, and applies them to detect entanglement.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod states;
pub mod witness;

pub use error::{Result, UewError};
