use serde::{Deserialize, Serialize};

use super::grid::{Grid, Point};

/// The part of a grid over which the energy is integrated.
///
/// Ball integrals use the cell-center inclusion test: a cell counts fully when
/// its center lies in the closed ball, otherwise not at all.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    #[default]
    Full,
    Ball { center: Point, radius: f64 },
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Full => true,
            Region::Ball { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    /// Per-cell integration weights (1 or 0).
    pub fn cell_weights(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.cell_count())
            .map(|c| {
                if self.contains(grid.cell_center(c)) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Nodes that are free to move: off the grid boundary and touching only
    /// cells inside the region. All other nodes carry Dirichlet data.
    pub fn free_nodes(&self, grid: &Grid) -> Vec<bool> {
        let weights = self.cell_weights(grid);
        let cx = grid.cells(0);
        (0..grid.node_count())
            .map(|node| {
                if grid.is_boundary_node(node) {
                    return false;
                }
                let (i, j) = grid.ij(node);
                if grid.dim() == 1 {
                    weights[i - 1] > 0.0 && weights[i] > 0.0
                } else {
                    [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)]
                        .iter()
                        .all(|&(ci, cj)| weights[cj * cx + ci] > 0.0)
                }
            })
            .collect()
    }

    /// Measure of the region as seen by the cell weights.
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.cell_weights(grid).iter().sum::<f64>() * grid.cell_measure()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_region_frees_interior() {
        let g = Grid::rect((0.0, 1.0), (0.0, 1.0), (4, 4)).unwrap();
        let free = Region::Full.free_nodes(&g);
        assert_eq!(free.iter().filter(|f| **f).count(), 9);
    }

    #[test]
    fn ball_measure_approaches_pi() {
        let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (400, 400)).unwrap();
        let r = Region::Ball {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        assert!((r.measure(&g) - std::f64::consts::PI).abs() < 5e-3);
        let free = r.free_nodes(&g);
        assert!(!free[g.index(200, 0)]);
        assert!(free[g.index(200, 200)]);
    }
}
