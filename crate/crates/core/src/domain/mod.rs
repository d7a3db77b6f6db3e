//! Grids, scalar fields, ordered membrane stacks, boundary data and field files.

mod boundary;
mod field;
mod grid;
pub mod io;
mod region;

pub use boundary::{apply_boundary, BlendProfile, BoundaryData};
pub use field::{MembraneStack, ScalarField};
pub use grid::{make_grid, Grid, Point};
pub use region::Region;

pub use crate::cones::sample_cone;
