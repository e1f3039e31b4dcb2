//! Robust interference management for single-antenna over-the-air computation.
//!
//! A fusion center computes several sums `s_m = Σ_{k∈D_m} x_k` of sensor data
//! over one shared multiple-access channel. This crate designs the transmit
//! amplitudes `b` and receive scalings `c` that minimize the worst-case MSE
//! over all sums under a per-sensor peak power constraint, and certifies the
//! local optimality of the returned policies.
//!
//! The crate is `no_std` and only needs `alloc`. Simulation, file formats and
//! the command line live in the companion `aircomp` crate.
//!
//! Layout:
//! - [`model`]: instances, groups, policies and their validation.
//! - [`mse`]: the aggregates `A, B, C, F`, per-sum MSEs and the complex model.
//! - [`orthogonal`]: real/imaginary chain assignment and the interference-free solver.
//! - [`feasibility`]: noise-variance thresholds of the equalized two-sum program.
//! - [`kkt`]: KKT candidate enumeration for two sums on one chain.
//! - [`optimality`]: LICQ, Lagrangian derivatives, KKT-matrix inertia and the brute-force oracle.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boxopt;
mod error;
pub mod feasibility;
pub mod kkt;
pub mod linalg;
pub(crate) mod math;
pub mod model;
pub mod mse;
pub mod optimality;
pub mod orthogonal;
pub mod poly;

pub use error::{Error, Result};
pub use feasibility::{is_feasible, FeasibilityReport};
pub use kkt::{enumerate_candidates, solve_two_sum, CandidateSolution, CardinalityPair};
pub use model::{ChannelVector, ComputationGroups, Instance, RxPolicy, TxPolicy};
pub use mse::Aggregates;
pub use optimality::{Certificate, Inertia};
