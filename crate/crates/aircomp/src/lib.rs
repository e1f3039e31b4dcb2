//! Simulation harness, file formats and command-line front end for
//! [`aircomp_core`].

pub mod harness;
pub mod io;

pub use harness::{SweepConfig, TrialRecord};
