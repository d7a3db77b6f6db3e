//! Numerical laboratory for the adhesive membrane energy
//!
//! ```text
//! J(U) = ∫ |∇U|² + W(U),   W(U) = #{ i : u_i > u_{i+1} },   u_1 ≥ u_2 ≥ … ≥ u_N
//! ```
//!
//! The crate is split along the lines of the computation:
//!
//! - [`domain`]: grids, scalar fields, ordered membrane stacks, boundary data, field files.
//! - [`cones`]: closed-form homogeneous solutions and critical configurations.
//! - [`energy`]: the discrete functional, its smoothed relaxation and gradient.
//! - [`solver`]: annealed projected gradient descent with isotonic projection.
//! - [`analysis`]: Weiss profiles, blow-ups, free boundaries, junction geometry.
//! - [`spectral`]: the linearized transmission eigenproblem on overlapping sectors.

pub mod analysis;
pub mod cones;
pub mod domain;
pub mod energy;
mod error;
pub mod reduce;
pub mod solver;
pub mod spectral;

pub use cones::{ConeSpec, SlopePair};
pub use domain::{BoundaryData, Grid, MembraneStack, Point, Region, ScalarField};
pub use energy::{EnergyReport, SmoothingSchedule};
pub use error::{Error, Result};
pub use solver::{solve, Problem, SolveConfig, SolveResult};
