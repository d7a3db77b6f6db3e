use crate::domain::{Grid, MembraneStack, Point};
use crate::{Error, Result};

use super::weiss::check_ball;

/// `x ↦ U(center + r x) / r` sampled on `[−1, 1]ⁿ` with the source spacing
/// rescaled by `1/r` (bilinear interpolation).
///
/// The square `center + [−r, r]ⁿ` must lie inside the grid and `r` must span
/// at least four cells. No average is subtracted.
pub fn rescale_blowup(stack: &MembraneStack, center: Point, r: f64) -> Result<MembraneStack> {
    let g = stack.grid();
    let h = g.h_max();
    if r < 4.0 * h {
        return Err(Error::InvalidArgument(format!(
            "blow-up radius {r} is below four cells ({})",
            4.0 * h
        )));
    }
    check_ball(g, center, r)?;
    let cells: Vec<usize> = (0..g.dim())
        .map(|a| ((2.0 * r / g.h(a)).round() as usize).max(8))
        .collect();
    let extents = vec![(-1.0, 1.0); g.dim()];
    let reference = Grid::new(g.dim(), &extents, &cells)?;
    MembraneStack::from_fn(reference, stack.n_membranes(), stack.feasibility_tol(), |x, out| {
        let p = [center[0] + r * x[0], center[1] + r * x[1]];
        for (i, o) in out.iter_mut().enumerate() {
            *o = g.interpolate(stack.values(), stack.n_membranes(), i, p) / r;
        }
    })
}
