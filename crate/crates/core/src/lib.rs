//! Community-structured random SAT formulas: sampling, solving, and the
//! supporting occupancy and threshold computations.
//!
//! Variables `1..=n` are split into `B` equal communities of size `h`.
//! A clause type prescribes how many distinct variables a clause draws
//! from each of its communities, and a mixture assigns sampling weight to
//! several types. [`generator`] draws instances from that distribution,
//! [`solver`] decides them (linear-time for width 2, budgeted search
//! beyond), [`ballsbins`] and [`analysis`] cover the occupancy bounds and
//! density thresholds the model's behavior is measured against, and
//! [`experiments`] runs reproducible phase-transition scans.

pub mod analysis;
pub mod ballsbins;
pub mod experiments;
pub mod generator;
pub mod model;
pub mod solver;

pub use model::{Clause, ClauseType, Instance, Layout, Literal, Mixture, ModelError};
pub use solver::{Assignment, SolveResult, SolverError};
