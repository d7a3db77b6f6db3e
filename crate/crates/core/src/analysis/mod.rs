//! Weiss profiles, blow-ups, free boundaries and junction geometry.

mod blowup;
mod boundaries;
mod junction;
mod oned;
mod weiss;

pub use blowup::rescale_blowup;
pub use boundaries::{extract_free_boundaries, FreeBoundary, FreeBoundarySet, Junction};
pub use junction::{junction_fit, ray_angles, JunctionFit, Ray, FIT_THRESHOLD};
pub use oned::{equipartition_residual, slope_jumps, SlopeJump};
pub use weiss::{ball_integral, disk_rect_area, separated_fraction, weiss_profile, WeissProfile, CIRCLE_POINTS};
