#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Hydrodynamics of a particle/antiparticle/hole exclusion process: the
//! exact flux, envelope-based Riemann solutions, phase classification, an
//! event-driven simulator of the microscopic dynamics and a Godunov
//! finite-volume oracle.

pub mod cli;
pub mod envelope;
pub mod error;
pub mod flux;
pub mod fvm;
pub mod io;
pub mod numeric;
pub mod riemann;
pub mod sim;

pub use error::{Error, Result};
pub use flux::{ModelParams, SymmetricFlux};
pub use riemann::{PhaseLabel, RiemannProblem, RiemannSolution};
