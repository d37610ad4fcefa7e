//! Membrane models of quantum measurement on the probability simplex.
//!
//! A state is a point of the simplex; a measurement is an elastic membrane
//! stretched over it that breaks at a random point, pulling the state into
//! the region the break falls in. This crate computes the resulting outcome
//! laws exactly where possible and by reproducible Monte Carlo elsewhere,
//! checks them against the Born rule, and classifies sequential statistics
//! as classical, quantum, or neither.

pub mod cells;
pub mod checker;
pub mod density;
pub mod error;
pub mod hilbert;
pub mod mc;
pub mod runner;
pub mod simplex;
pub mod sphere;
pub mod universal;
pub mod utr;

pub use error::{Result, TrmError};
pub use simplex::{BarycentricVector, OutcomePartition};
