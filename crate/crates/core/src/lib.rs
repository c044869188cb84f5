//! Cutting Planes proofs, their simulation by communication protocols, and the
//! compilation of protocol refutations into monotone circuits for CSP-SAT.

pub mod circuit;
pub mod cli;
pub mod cnf;
pub mod cp;
pub mod csp;
pub mod error;
pub mod protocol;
pub mod random_lab;
mod solver;

pub use error::{Error, Result};
pub use solver::{ResolutionLine, ResolutionSource};
