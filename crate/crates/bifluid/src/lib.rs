//! Invariant-certified simulation of a one-velocity bi-fluid compressible
//! system with general inflow/outflow boundary data.
//!
//! The crate evolves four coupled "densities" (two physical densities and
//! their two dominating companions) by a monotone upwind/backward-Euler
//! scheme, couples them to a Galerkin momentum balance, and turns the
//! analytical certificates of the underlying theory (mass ledgers,
//! domination cones, max/min principles, renormalized budgets, energy
//! inequality, ratio compactness, almost uniqueness) into executable
//! checks over recorded trajectories.

pub mod coupling;
pub mod diagnostics;
pub mod geometry;
pub mod linalg;
pub mod momentum;
pub mod profile;
pub mod report;
pub mod scenario;
pub mod thermo;
pub mod transport;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
