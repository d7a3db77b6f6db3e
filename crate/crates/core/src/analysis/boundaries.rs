use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Grid, MembraneStack, Point};

/// Approximation of `Γ_{i+1} = ∂{u_{i+1} > u_{i+2}}` (zero-based `i`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundary {
    /// Crossing points on a line.
    pub points: Vec<f64>,
    /// Contour polylines in the plane; every vertex lies on a cell edge.
    pub polylines: Vec<Vec<Point>>,
}

impl FreeBoundary {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.polylines.is_empty()
    }

    /// All vertices (points are placed on the x axis in 1D).
    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        self.points
            .iter()
            .map(|&x| [x, 0.0])
            .chain(self.polylines.iter().flatten().copied())
    }
}

/// Place where two free boundaries with different indices meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub point: Point,
    /// Zero-based indices into [`FreeBoundarySet::gamma`], `first < second`.
    pub first: usize,
    pub second: usize,
    /// Distance between the closest vertex pair of the cluster.
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundarySet {
    pub tau: f64,
    pub gamma: Vec<FreeBoundary>,
    pub junctions: Vec<Junction>,
}

impl FreeBoundarySet {
    /// `index,polyline,x,y` rows; 1D points get polyline 0 and `y = 0`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,polyline,x,y\n");
        for (i, g) in self.gamma.iter().enumerate() {
            for x in &g.points {
                s.push_str(&format!("{},0,{x:.12e},0\n", i + 1));
            }
            for (k, line) in g.polylines.iter().enumerate() {
                for p in line {
                    s.push_str(&format!("{},{k},{:.12e},{:.12e}\n", i + 1, p[0], p[1]));
                }
            }
        }
        s
    }
}

/// Level-`τ` sets of every gap `u_i − u_{i+1}`, plus junctions where two
/// distinct boundaries come within `2h`.
pub fn extract_free_boundaries(stack: &MembraneStack, tau: f64) -> FreeBoundarySet {
    let grid = stack.grid();
    let gamma: Vec<FreeBoundary> = (0..stack.n_membranes() - 1)
        .map(|i| {
            let f: Vec<f64> = (0..grid.node_count()).map(|k| stack.gap(k, i) - tau).collect();
            if grid.dim() == 1 {
                FreeBoundary {
                    points: crossings_1d(grid, &f),
                    polylines: Vec::new(),
                }
            } else {
                FreeBoundary {
                    points: Vec::new(),
                    polylines: marching_squares(grid, &f),
                }
            }
        })
        .collect();
    let junctions = find_junctions(&gamma, 2.0 * grid.h_max());
    FreeBoundarySet {
        tau,
        gamma,
        junctions,
    }
}

fn crossings_1d(grid: &Grid, f: &[f64]) -> Vec<f64> {
    f.windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] > 0.0) != (w[1] > 0.0))
        .map(|(k, w)| {
            // f is linear along the cell, so the root is exact
            let t = w[0] / (w[0] - w[1]);
            let (a, b) = (grid.node_point(k)[0], grid.node_point(k + 1)[0]);
            a + t * (b - a)
        })
        .collect()
}

/// Edge ids: `2·node` for the edge to the right of `node`, `2·node + 1` for the edge above.
fn edge_point(grid: &Grid, f: &[f64], edge: usize) -> Point {
    let a = edge / 2;
    let b = if edge % 2 == 0 { a + 1 } else { a + grid.nx() };
    let t = f[a] / (f[a] - f[b]);
    let (pa, pb) = (grid.node_point(a), grid.node_point(b));
    [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
}

fn marching_squares(grid: &Grid, f: &[f64]) -> Vec<Vec<Point>> {
    let nx = grid.nx();
    let mut segments: Vec<[usize; 2]> = Vec::new();
    for cj in 0..grid.cells(1) {
        for ci in 0..grid.cells(0) {
            let n00 = cj * nx + ci;
            let corners = [n00, n00 + 1, n00 + nx + 1, n00 + nx];
            let inside = corners.map(|k| f[k] > 0.0);
            // bottom, right, top, left
            let edges = [2 * n00, 2 * (n00 + 1) + 1, 2 * (n00 + nx), 2 * n00 + 1];
            let cut: Vec<usize> = (0..4)
                .filter(|&e| inside[e] != inside[(e + 1) % 4])
                .collect();
            match cut.len() {
                2 => segments.push([edges[cut[0]], edges[cut[1]]]),
                4 => {
                    let center = corners.iter().map(|&k| f[k]).sum::<f64>() > 0.0;
                    // cut off the two corners whose state differs from the center
                    if center != inside[1] {
                        segments.push([edges[0], edges[1]]);
                        segments.push([edges[2], edges[3]]);
                    } else {
                        segments.push([edges[3], edges[0]]);
                        segments.push([edges[1], edges[2]]);
                    }
                }
                _ => {}
            }
        }
    }
    link(&segments)
        .into_iter()
        .map(|chain| chain.iter().map(|&e| edge_point(grid, f, e)).collect())
        .collect()
}

/// Chain segments sharing edge ids into polylines of edge ids. Open chains
/// start at an edge used once; the remaining segments form closed loops.
fn link(segments: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            by_edge.entry(e).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    let walk = |start_seg: usize, start_edge: usize, used: &mut Vec<bool>| {
        let mut chain = vec![start_edge];
        let (mut seg, mut edge) = (start_seg, start_edge);
        loop {
            used[seg] = true;
            let [a, b] = segments[seg];
            edge = if a == edge { b } else { a };
            chain.push(edge);
            match by_edge[&edge].iter().find(|&&s| !used[s]) {
                Some(&next) => seg = next,
                None => break,
            }
        }
        chain
    };
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        if let Some(&e) = segments[s].iter().find(|e| by_edge[e].len() == 1) {
            chains.push(walk(s, e, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            chains.push(walk(s, segments[s][0], &mut used));
        }
    }
    chains
}

/// One junction per connected cluster of close vertex pairs, located at the
/// closest pair's midpoint.
fn find_junctions(gamma: &[FreeBoundary], reach: f64) -> Vec<Junction> {
    let verts: Vec<Vec<Point>> = gamma.iter().map(|g| g.vertices().collect()).collect();
    let dist = |p: Point, q: Point| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let mut out = Vec::new();
    for a in 0..verts.len() {
        for b in a + 1..verts.len() {
            let mut close: Vec<(f64, Point)> = Vec::new();
            for &p in &verts[a] {
                for &q in &verts[b] {
                    let d = dist(p, q);
                    if d <= reach {
                        close.push((d, [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]));
                    }
                }
            }
            for cluster in clusters(&close, reach) {
                let (d, p) = cluster
                    .iter()
                    .map(|&k| close[k])
                    .fold((f64::INFINITY, [0.0, 0.0]), |best, c| if c.0 < best.0 { c } else { best });
                out.push(Junction {
                    point: p,
                    first: a,
                    second: b,
                    separation: d,
                });
            }
        }
    }
    out
}

/// Single-linkage clusters of midpoints (link length `reach`), in order of first member.
fn clusters(close: &[(f64, Point)], reach: f64) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..close.len()).collect();
    fn root(parent: &mut [usize], mut k: usize) -> usize {
        while parent[k] != k {
            parent[k] = parent[parent[k]];
            k = parent[k];
        }
        k
    }
    for i in 0..close.len() {
        for j in i + 1..close.len() {
            let (p, q) = (close[i].1, close[j].1);
            if (p[0] - q[0]).hypot(p[1] - q[1]) <= reach {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for k in 0..close.len() {
        let r = root(&mut parent, k);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(k);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{sample_cone, ConeSpec};

    #[test]
    fn zero_stack_has_no_boundaries() {
        let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (8, 8)).unwrap();
        let fb = extract_free_boundaries(&MembraneStack::zeros(g, 3).unwrap(), 0.0);
        assert!(fb.gamma.iter().all(FreeBoundary::is_empty));
        assert!(fb.junctions.is_empty());
    }

    #[test]
    fn one_d_cone_boundaries_coincide() {
        let g = Grid::line(-1.0, 1.0, 64).unwrap();
        let s = sample_cone(&ConeSpec::OneD { n: 3, k: 1, reflected: false }, &g, [0.0, 0.0]).unwrap();
        let fb = extract_free_boundaries(&s, 1e-9);
        assert_eq!(fb.gamma[0].points.len(), 1);
        assert!(fb.gamma[0].points[0].abs() <= g.h(0));
        assert!(fb.gamma[1].is_empty());
    }

    #[test]
    fn circle_is_one_closed_loop() {
        let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (40, 40)).unwrap();
        let s = MembraneStack::from_fn(g, 2, 0.0, |p, o| {
            o[0] = 1.25 - p[0] * p[0] - p[1] * p[1];
            o[1] = -1.0;
        })
        .unwrap();
        let fb = extract_free_boundaries(&s, 2.01);
        assert_eq!(fb.gamma[0].polylines.len(), 1);
        let line = &fb.gamma[0].polylines[0];
        assert_eq!(line.first(), line.last());
        let r = (0.24f64).sqrt();
        for p in line {
            assert!((p[0].hypot(p[1]) - r).abs() < 2e-3);
        }
    }

    #[test]
    fn v0_rays_and_junction() {
        let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (64, 64)).unwrap();
        let s = sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &g, [0.0, 0.0]).unwrap();
        let fb = extract_free_boundaries(&s, 1e-9);
        assert_eq!(fb.junctions.len(), 1);
        let j = fb.junctions[0];
        assert!(j.point[0].hypot(j.point[1]) <= 2.0 * g.h(0));
        assert_eq!((j.first, j.second), (0, 1));
    }
}
