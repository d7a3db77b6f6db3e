use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in one or two dimensions. One-dimensional points use only `p[0]`.
pub type Point = [f64; 2];

/// Uniform node-centered grid on an interval or a rectangle.
///
/// Nodes are numbered row-major: `index = j * nx + i`, with `i` along axis 0.
/// In one dimension there is a single row (`ny = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    cells: [usize; 2],
}

impl Grid {
    /// Build a grid from per-axis extents and cell counts.
    pub fn new(dim: usize, extents: &[(f64, f64)], resolution: &[usize]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if extents.len() != dim || resolution.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} extents and resolutions, got {} and {}",
                extents.len(),
                resolution.len()
            )));
        }
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        let mut cells = [0usize; 2];
        for axis in 0..dim {
            let (a, b) = extents[axis];
            if !(a.is_finite() && b.is_finite()) || b <= a {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} extent [{a}, {b}] is empty"
                )));
            }
            if resolution[axis] < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} needs at least 2 cells, got {}",
                    resolution[axis]
                )));
            }
            lo[axis] = a;
            hi[axis] = b;
            cells[axis] = resolution[axis];
        }
        Ok(Self { dim, lo, hi, cells })
    }

    /// `[lo, hi]` with `cells` cells.
    pub fn line(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        Self::new(1, &[(lo, hi)], &[cells])
    }

    /// Rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x: (f64, f64), y: (f64, f64), cells: (usize, usize)) -> Result<Self> {
        Self::new(2, &[x, y], &[cells.0, cells.1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self, axis: usize) -> (f64, f64) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn extents(&self) -> Vec<(f64, f64)> {
        (0..self.dim).map(|a| self.extent(a)).collect()
    }

    pub fn cells(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.cells[axis]
        } else {
            1
        }
    }

    pub fn resolution(&self) -> Vec<usize> {
        self.cells[..self.dim].to_vec()
    }

    /// Spacing along `axis`.
    pub fn h(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }

    /// Largest spacing over the active axes.
    pub fn h_max(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).fold(0.0, f64::max)
    }

    pub fn nx(&self) -> usize {
        self.cells[0] + 1
    }

    pub fn ny(&self) -> usize {
        if self.dim == 2 {
            self.cells[1] + 1
        } else {
            1
        }
    }

    pub fn node_count(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn cell_count(&self) -> usize {
        self.cells(0) * self.cells(1)
    }

    /// Measure of one cell (`h` in 1D, `hx·hy` in 2D).
    pub fn cell_measure(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).product()
    }

    /// Measure of the whole domain.
    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|a| self.hi[a] - self.lo[a]).product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx(), node / self.nx())
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        // Endpoints are reproduced exactly.
        if i == self.cells[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.h(axis)
        }
    }

    #[inline]
    pub fn node_point(&self, node: usize) -> Point {
        let (i, j) = self.ij(node);
        if self.dim == 1 {
            [self.coord(0, i), 0.0]
        } else {
            [self.coord(0, i), self.coord(1, j)]
        }
    }

    /// Cells are numbered `c = cj * cells(0) + ci`.
    #[inline]
    pub fn cell_center(&self, cell: usize) -> Point {
        let cx = self.cells(0);
        let (ci, cj) = (cell % cx, cell / cx);
        let x = self.lo[0] + (ci as f64 + 0.5) * self.h(0);
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, self.lo[1] + (cj as f64 + 0.5) * self.h(1)]
        }
    }

    /// Corner nodes of a cell: 2 in 1D, 4 in 2D (order: (0,0), (1,0), (0,1), (1,1)).
    #[inline]
    pub fn cell_corners(&self, cell: usize) -> ([usize; 4], usize) {
        let cx = self.cells(0);
        let (ci, cj) = (cell % cx, cell / cx);
        let a = self.index(ci, cj);
        if self.dim == 1 {
            ([a, a + 1, a, a + 1], 2)
        } else {
            let nx = self.nx();
            ([a, a + 1, a + nx, a + nx + 1], 4)
        }
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        let (i, j) = self.ij(node);
        let on_x = i == 0 || i == self.cells[0];
        if self.dim == 1 {
            on_x
        } else {
            on_x || j == 0 || j == self.cells[1]
        }
    }

    /// Whether the point lies in the closed domain (with a small relative slack).
    pub fn contains(&self, p: Point) -> bool {
        (0..self.dim).all(|a| {
            let slack = 1e-12 * (self.hi[a] - self.lo[a]);
            p[a] >= self.lo[a] - slack && p[a] <= self.hi[a] + slack
        })
    }

    /// Same extents with every axis coarsened by `factor`.
    pub fn coarsened(&self, factor: usize) -> Option<Self> {
        if factor == 0 {
            return None;
        }
        let mut g = *self;
        for a in 0..self.dim {
            if self.cells[a] % factor != 0 || self.cells[a] / factor < 2 {
                return None;
            }
            g.cells[a] = self.cells[a] / factor;
        }
        Some(g)
    }

    /// Bilinear (linear in 1D) interpolation of nodal values at `p`.
    /// Points outside the domain are clamped onto it.
    pub fn interpolate(&self, values: &[f64], stride: usize, offset: usize, p: Point) -> f64 {
        let (i0, tx) = self.locate(0, p[0]);
        if self.dim == 1 {
            let a = values[i0 * stride + offset];
            let b = values[(i0 + 1) * stride + offset];
            return a + tx * (b - a);
        }
        let (j0, ty) = self.locate(1, p[1]);
        let nx = self.nx();
        let v = |i: usize, j: usize| values[(j * nx + i) * stride + offset];
        let bottom = v(i0, j0) + tx * (v(i0 + 1, j0) - v(i0, j0));
        let top = v(i0, j0 + 1) + tx * (v(i0 + 1, j0 + 1) - v(i0, j0 + 1));
        bottom + ty * (top - bottom)
    }

    fn locate(&self, axis: usize, x: f64) -> (usize, f64) {
        let s = ((x - self.lo[axis]) / self.h(axis)).clamp(0.0, self.cells[axis] as f64);
        let i = (s.floor() as usize).min(self.cells[axis] - 1);
        (i, s - i as f64)
    }
}

/// Free function form of [`Grid::new`].
pub fn make_grid(dim: usize, extents: &[(f64, f64)], resolution: &[usize]) -> Result<Grid> {
    Grid::new(dim, extents, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_spacing() {
        let g = make_grid(1, &[(-1.0, 1.0)], &[512]).unwrap();
        assert_eq!(g.h(0), 0.00390625);
        assert_eq!(g.node_count(), 513);
        assert_eq!(g.cell_count(), 512);
    }

    #[test]
    fn two_dimensional_spacing() {
        let g = make_grid(2, &[(-1.0, 1.0), (-1.0, 1.0)], &[256, 256]).unwrap();
        assert_eq!(g.h(0), 1.0 / 128.0);
        assert_eq!(g.h(1), 1.0 / 128.0);
        assert_eq!(g.node_count(), 257 * 257);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_grid(3, &[(0.0, 1.0); 3], &[4; 3]).is_err());
        assert!(make_grid(1, &[(1.0, 1.0)], &[4]).is_err());
        assert!(make_grid(1, &[(0.0, 1.0)], &[1]).is_err());
        assert!(make_grid(2, &[(0.0, 1.0)], &[4]).is_err());
    }

    #[test]
    fn endpoints_exact_and_boundary_flags() {
        let g = Grid::rect((-6.0, 6.0), (-1.0, 1.0), (768, 128)).unwrap();
        let last = g.node_count() - 1;
        assert_eq!(g.node_point(last), [6.0, 1.0]);
        assert!(g.is_boundary_node(0));
        assert!(!g.is_boundary_node(g.index(3, 3)));
    }

    #[test]
    fn interpolation_reproduces_affine() {
        let g = Grid::rect((0.0, 2.0), (-1.0, 1.0), (8, 6)).unwrap();
        let vals: Vec<f64> = (0..g.node_count())
            .map(|n| {
                let p = g.node_point(n);
                1.0 + 2.0 * p[0] - 0.5 * p[1]
            })
            .collect();
        let p = [0.77, 0.13];
        let v = g.interpolate(&vals, 1, 0, p);
        assert!((v - (1.0 + 2.0 * 0.77 - 0.5 * 0.13)).abs() < 1e-14);
    }
}
