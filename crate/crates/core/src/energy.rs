//! Discrete energy: Dirichlet part, sharp and smoothed separation potential,
//! and the gradient of the smoothed functional.
//!
//! The Dirichlet density of a cell averages the squared forward differences
//! over the cell's edges, so the quadrature is exact for affine fields. The
//! potential counts, per cell, the gaps `u_i - u_{i+1}` at the cell center
//! (the mean of the corner gaps) that exceed the threshold `τ`.
//!
//! All sums run through [`crate::reduce`], keyed by cell index, so results do
//! not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Grid, MembraneStack, Region};
use crate::reduce::tree_sum_by;
use crate::{Error, Result};

/// Pieces of `J = ∫ |∇U|² + W(U)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
    pub tau: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    /// Energy density per cell (`|∇U|² + W`), when requested.
    #[serde(skip)]
    pub per_cell: Option<Vec<f64>>,
}

/// Annealing schedule `δ_k = δ₀ ρ^k`, clamped at `δ_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSchedule {
    pub delta0: f64,
    pub ratio: f64,
    pub delta_min: f64,
}

impl SmoothingSchedule {
    pub fn new(delta0: f64, ratio: f64, delta_min: f64) -> Result<Self> {
        if !(delta_min > 0.0 && delta_min.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delta_min must be positive, got {delta_min}"
            )));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ratio must lie in (0, 1), got {ratio}"
            )));
        }
        if !(delta0 >= delta_min && delta0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delta0 = {delta0} must be at least delta_min = {delta_min}"
            )));
        }
        Ok(Self {
            delta0,
            ratio,
            delta_min,
        })
    }

    /// Floor tied to the grid: `2 · max_slope · h`.
    pub fn grid_floor(grid: &Grid, max_slope: f64) -> f64 {
        2.0 * max_slope * grid.h_max()
    }

    /// `δ_k = δ₀ ρ^k` clamped at the floor; the last entry equals the floor.
    pub fn deltas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut d = self.delta0;
        while d > self.delta_min {
            out.push(d);
            d *= self.ratio;
        }
        out.push(self.delta_min);
        out
    }

    /// Default sharp threshold, half the floor.
    pub fn tau(&self) -> f64 {
        0.5 * self.delta_min
    }
}

/// `s_δ(t)`: 0 for `t ≤ 0`, `3x² − 2x³` with `x = t/δ` on `(0, δ)`, 1 beyond.
#[inline]
pub fn smoothstep(t: f64, delta: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= delta {
        1.0
    } else {
        let x = t / delta;
        x * x * (3.0 - 2.0 * x)
    }
}

/// Derivative of [`smoothstep`] in `t`.
#[inline]
pub fn smoothstep_prime(t: f64, delta: f64) -> f64 {
    if t <= 0.0 || t >= delta {
        0.0
    } else {
        let x = t / delta;
        6.0 * x * (1.0 - x) / delta
    }
}

/// Node count above which node loops run on the rayon pool.
const PAR_NODES: usize = 1 << 15;

/// The discrete functional on a grid, restricted to a region.
///
/// Nodes touching a cell outside the region, and nodes on the grid boundary,
/// are held fixed.
#[derive(Debug, Clone)]
pub struct Functional {
    grid: Grid,
    n: usize,
    weights: Vec<f64>,
    free: Vec<bool>,
    /// Lower-left corner node of each cell.
    base: Vec<usize>,
    /// Node offsets of the corners relative to `base` (2 or 4 used).
    offsets: [usize; 4],
    corners: usize,
    inv_h2: [f64; 2],
}

impl Functional {
    pub fn new(grid: Grid, n: usize, region: &Region) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 membranes, got {n}"
            )));
        }
        let base = (0..grid.cell_count()).map(|c| grid.cell_corners(c).0[0]).collect();
        let nx = grid.nx();
        let (offsets, corners) = if grid.dim() == 1 {
            ([0, 1, 0, 1], 2)
        } else {
            ([0, 1, nx, nx + 1], 4)
        };
        let inv = |a: usize| {
            if a < grid.dim() {
                1.0 / (grid.h(a) * grid.h(a))
            } else {
                0.0
            }
        };
        Ok(Self {
            grid,
            n,
            weights: region.cell_weights(&grid),
            free: region.free_nodes(&grid),
            base,
            offsets,
            corners,
            inv_h2: [inv(0), inv(1)],
        })
    }

    pub fn full(grid: Grid, n: usize) -> Result<Self> {
        Self::new(grid, n, &Region::Full)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_membranes(&self) -> usize {
        self.n
    }

    pub fn free_nodes(&self) -> &[bool] {
        &self.free
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_len(&self, u: &[f64]) {
        assert_eq!(u.len(), self.n * self.grid.node_count(), "value length");
    }

    /// `Σ_i |∇_h u_i|²` on one cell (density, not yet multiplied by the cell measure).
    #[inline]
    fn cell_dirichlet(&self, u: &[f64], cell: usize) -> f64 {
        let n = self.n;
        let a = self.base[cell] * n;
        let o = self.offsets.map(|k| a + k * n);
        let mut acc = 0.0;
        if self.corners == 2 {
            for i in 0..n {
                let d = u[o[1] + i] - u[o[0] + i];
                acc += d * d;
            }
            acc * self.inv_h2[0]
        } else {
            let (wx, wy) = (0.5 * self.inv_h2[0], 0.5 * self.inv_h2[1]);
            for i in 0..n {
                let (v0, v1, v2, v3) = (u[o[0] + i], u[o[1] + i], u[o[2] + i], u[o[3] + i]);
                let (dx0, dx1) = (v1 - v0, v3 - v2);
                let (dy0, dy1) = (v2 - v0, v3 - v1);
                acc += wx * (dx0 * dx0 + dx1 * dx1) + wy * (dy0 * dy0 + dy1 * dy1);
            }
            acc
        }
    }

    /// Gap `u_i − u_{i+1}` at the cell center.
    #[inline]
    fn center_gap(&self, u: &[f64], cell: usize, i: usize) -> f64 {
        let n = self.n;
        let a = self.base[cell] * n + i;
        let mut s = 0.0;
        for &k in &self.offsets[..self.corners] {
            let at = a + k * n;
            s += u[at] - u[at + 1];
        }
        s / self.corners as f64
    }

    #[inline]
    fn cell_sharp(&self, u: &[f64], cell: usize, tau: f64) -> f64 {
        (0..self.n - 1)
            .filter(|&i| self.center_gap(u, cell, i) > tau)
            .count() as f64
    }

    #[inline]
    fn cell_smooth(&self, u: &[f64], cell: usize, delta: f64) -> f64 {
        (0..self.n - 1)
            .map(|i| smoothstep(self.center_gap(u, cell, i), delta))
            .sum()
    }

    fn integrate(&self, f: impl Fn(usize) -> f64 + Sync) -> f64 {
        let a = self.grid.cell_measure();
        let w = &self.weights;
        a * tree_sum_by(self.grid.cell_count(), |c| {
            if w[c] == 0.0 {
                0.0
            } else {
                w[c] * f(c)
            }
        })
    }

    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        self.check_len(u);
        self.integrate(|c| self.cell_dirichlet(u, c))
    }

    pub fn potential(&self, u: &[f64], tau: f64) -> f64 {
        self.check_len(u);
        self.integrate(|c| self.cell_sharp(u, c, tau))
    }

    pub fn smoothed_potential(&self, u: &[f64], delta: f64) -> f64 {
        self.check_len(u);
        self.integrate(|c| self.cell_smooth(u, c, delta))
    }

    /// Dirichlet energy plus smoothed potential in a single pass.
    pub fn smoothed_total(&self, u: &[f64], delta: f64) -> f64 {
        self.check_len(u);
        self.integrate(|c| self.cell_dirichlet(u, c) + self.cell_smooth(u, c, delta))
    }

    /// Gradient of [`Self::smoothed_total`] divided by the cell measure, so
    /// that at interior nodes of the full region it reads
    /// `−2Δ_h u_i + mean over adjacent cells of (s′(d_i) − s′(d_{i−1}))`.
    /// Fixed nodes get zero.
    pub fn gradient(&self, u: &[f64], delta: f64, out: &mut [f64]) {
        self.check_len(u);
        assert_eq!(out.len(), u.len(), "gradient length");
        let n = self.n;
        let node_grad = |node: usize, o: &mut [f64]| self.node_gradient(u, delta, node, o);
        if self.grid.node_count() >= PAR_NODES {
            out.par_chunks_mut(n).enumerate().for_each(|(k, o)| node_grad(k, o));
        } else {
            out.chunks_mut(n).enumerate().for_each(|(k, o)| node_grad(k, o));
        }
    }

    fn node_gradient(&self, u: &[f64], delta: f64, node: usize, o: &mut [f64]) {
        o.iter_mut().for_each(|v| *v = 0.0);
        if !self.free[node] {
            return;
        }
        let n = self.n;
        let g = &self.grid;
        let (i, j) = g.ij(node);
        let corners = self.corners as f64;
        // Each corner of a cell sees the x-neighbour across the cell with
        // weight 1/hx² (2/hx² in 1D, where one edge carries the whole cell).
        let (wx, wy) = if self.corners == 2 {
            (2.0 * self.inv_h2[0], 0.0)
        } else {
            (self.inv_h2[0], self.inv_h2[1])
        };
        let mut add_cell = |cell: usize, px: usize, py: usize| {
            let wc = self.weights[cell];
            if wc == 0.0 {
                return;
            }
            let mut down = 0.0;
            for mem in 0..n {
                let here = u[node * n + mem];
                let mut d = wx * (here - u[px * n + mem]);
                if self.corners == 4 {
                    d += wy * (here - u[py * n + mem]);
                }
                let up = if mem + 1 < n {
                    smoothstep_prime(self.center_gap(u, cell, mem), delta)
                } else {
                    0.0
                };
                o[mem] += wc * (d + (up - down) / corners);
                down = up;
            }
        };
        if g.dim() == 1 {
            add_cell(i - 1, node - 1, node);
            add_cell(i, node + 1, node);
        } else {
            let (cx, nx) = (g.cells(0), g.nx());
            add_cell((j - 1) * cx + i - 1, node - 1, node - nx);
            add_cell((j - 1) * cx + i, node + 1, node - nx);
            add_cell(j * cx + i - 1, node - 1, node + nx);
            add_cell(j * cx + i, node + 1, node + nx);
        }
    }

    /// Sharp energy report; `per_cell` adds the density of every cell.
    pub fn report(&self, u: &[f64], tau: f64, delta: Option<f64>, per_cell: bool) -> EnergyReport {
        let dirichlet = self.dirichlet(u);
        let potential = self.potential(u, tau);
        let per_cell = per_cell.then(|| {
            (0..self.grid.cell_count())
                .into_par_iter()
                .map(|c| self.weights[c] * (self.cell_dirichlet(u, c) + self.cell_sharp(u, c, tau)))
                .collect()
        });
        EnergyReport {
            dirichlet,
            potential,
            total: dirichlet + potential,
            tau,
            delta,
            per_cell,
        }
    }
}

fn full(stack: &MembraneStack) -> Functional {
    Functional::full(*stack.grid(), stack.n_membranes()).expect("stacks have N >= 2")
}

/// `Σ_cells |cell| Σ_i |∇_h u_i|²` over the whole grid.
pub fn dirichlet_energy(stack: &MembraneStack) -> f64 {
    full(stack).dirichlet(stack.values())
}

/// `Σ_cells |cell| · #{i : d_i(center) > τ}` over the whole grid.
pub fn potential_energy(stack: &MembraneStack, tau: f64) -> f64 {
    full(stack).potential(stack.values(), tau)
}

pub fn smoothed_potential(stack: &MembraneStack, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(full(stack).smoothed_potential(stack.values(), delta))
}

/// Node-major gradient density of `dirichlet + smoothed_potential`; boundary nodes get 0.
pub fn energy_gradient(stack: &MembraneStack, delta: f64) -> Result<Vec<f64>> {
    check_delta(delta)?;
    let mut out = vec![0.0; stack.values().len()];
    full(stack).gradient(stack.values(), delta, &mut out);
    Ok(out)
}

pub fn total_energy(stack: &MembraneStack, tau: f64) -> EnergyReport {
    full(stack).report(stack.values(), tau, None, false)
}

/// [`total_energy`] with the per-cell density field.
pub fn total_energy_with_density(stack: &MembraneStack, tau: f64) -> EnergyReport {
    full(stack).report(stack.values(), tau, None, true)
}

/// Energy restricted to a region (cell-center inclusion).
pub fn region_energy(stack: &MembraneStack, region: &Region, tau: f64) -> EnergyReport {
    Functional::new(*stack.grid(), stack.n_membranes(), region)
        .expect("stacks have N >= 2")
        .report(stack.values(), tau, None, false)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "smoothing width must be positive, got {delta}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{explicit_1d_minimizer, sample_cone, ConeSpec};
    use approx::assert_relative_eq;

    fn line() -> Grid {
        Grid::line(-1.0, 1.0, 512).unwrap()
    }

    #[test]
    fn zero_stack_has_zero_energy() {
        let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (8, 8)).unwrap();
        let z = MembraneStack::zeros(g, 3).unwrap();
        assert_eq!(dirichlet_energy(&z), 0.0);
        assert_eq!(potential_energy(&z, 0.0), 0.0);
        assert_eq!(total_energy(&z, 0.0).total, 0.0);
        assert!(energy_gradient(&z, 0.1).unwrap().iter().all(|v| *v == 0.0));
        assert!(energy_gradient(&z, 0.0).is_err());
    }

    #[test]
    fn one_d_cone_energies() {
        let g = line();
        let s = sample_cone(&ConeSpec::OneD { n: 3, k: 1, reflected: false }, &g, [0.0, 0.0])
            .unwrap();
        assert_relative_eq!(dirichlet_energy(&s), 1.0, epsilon = 1e-12);
        assert!((potential_energy(&s, g.h(0)) - 1.0).abs() <= 2.0 * g.h(0));
    }

    #[test]
    fn explicit_minimizer_energy() {
        let g = line();
        let s = MembraneStack::from_fn(g, 3, 1e-12, |p, o| {
            o.copy_from_slice(&explicit_1d_minimizer(p[0]))
        })
        .unwrap();
        let x1 = 1.0 - 1.5f64.sqrt();
        let x2 = 1.0 - 0.5f64.sqrt();
        let expected = (x2 - x1) + 2.0 * (1.0 - x2);
        assert_relative_eq!(expected, 1.931852, epsilon = 1e-6);
        // kinks fall inside cells, where the averaged slope is not the exact one
        assert!((dirichlet_energy(&s) - expected).abs() < 4.0 * g.h(0));
        let r = total_energy(&s, 0.5 * g.h(0));
        assert!((r.total - 3.863703).abs() < 10.0 * g.h(0));
        assert_eq!(r.total, r.dirichlet + r.potential);
    }

    #[test]
    fn triple_critical_total_is_four() {
        let g = line();
        let s = sample_cone(&ConeSpec::TripleCritical, &g, [0.0, 0.0]).unwrap();
        let r = total_energy(&s, 0.0);
        assert_relative_eq!(r.dirichlet, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.potential, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn affine_dirichlet_is_exact() {
        let g = Grid::rect((0.0, 1.0), (0.0, 2.0), (7, 5)).unwrap();
        let s = MembraneStack::from_fn(g, 2, 0.0, |p, o| {
            o[0] = 3.0 + 2.0 * p[0] - p[1];
            o[1] = -1.0 + 0.5 * p[0] + 0.25 * p[1];
        })
        .unwrap();
        let exact = (4.0 + 1.0 + 0.25 + 0.0625) * 2.0;
        assert_relative_eq!(dirichlet_energy(&s), exact, epsilon = 1e-12);
    }

    #[test]
    fn v0_potential_on_disk() {
        let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (512, 512)).unwrap();
        let s = sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &g, [0.0, 0.0]).unwrap();
        let disk = Region::Ball {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        let r = region_energy(&s, &disk, 1e-12);
        assert!((r.potential - 5.0 * std::f64::consts::PI / 6.0).abs() < 0.02, "{}", r.potential);
    }

    #[test]
    fn smoothed_saturates_when_gaps_are_wide() {
        let g = Grid::line(0.0, 1.0, 16).unwrap();
        let s = MembraneStack::from_fn(g, 3, 0.0, |p, o| {
            o[0] = 2.0 + p[0];
            o[1] = 1.0;
            o[2] = 0.0;
        })
        .unwrap();
        assert_eq!(smoothed_potential(&s, 0.5).unwrap(), potential_energy(&s, 0.0));
    }

    #[test]
    fn schedule_clamps_at_floor() {
        let s = SmoothingSchedule::new(0.5, 0.5, 0.1).unwrap();
        assert_eq!(s.deltas(), vec![0.5, 0.25, 0.125, 0.1]);
        assert_eq!(s.tau(), 0.05);
        assert!(SmoothingSchedule::new(0.05, 0.5, 0.1).is_err());
        assert!(SmoothingSchedule::new(0.5, 1.0, 0.1).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for g in [
            Grid::line(-1.0, 1.0, 12).unwrap(),
            Grid::rect((-1.0, 1.0), (0.0, 1.5), (6, 5)).unwrap(),
        ] {
            let s = MembraneStack::from_fn(g, 3, 1e-9, |p, o| {
                o[0] = 0.1 * (2.0 * p[0] + p[1]).sin() + 0.4;
                o[1] = 0.1 * p[0] * p[1];
                o[2] = -0.2 * (p[0] - 0.3).abs() - 0.05;
            })
            .unwrap();
            let f = Functional::full(g, 3).unwrap();
            let delta = 0.4;
            let mut grad = vec![0.0; s.values().len()];
            f.gradient(s.values(), delta, &mut grad);
            let a = g.cell_measure();
            let eps = 1e-6;
            for k in 0..grad.len() {
                let mut up = s.values().to_vec();
                let mut dn = up.clone();
                up[k] += eps;
                dn[k] -= eps;
                let fd = (f.smoothed_total(&up, delta) - f.smoothed_total(&dn, delta)) / (2.0 * eps);
                let expect = if f.free_nodes()[k / 3] { fd / a } else { 0.0 };
                assert!((grad[k] - expect).abs() < 1e-5 * (1.0 + expect.abs()), "{k}: {} vs {expect}", grad[k]);
            }
        }
    }

    #[test]
    fn smoothstep_is_c1() {
        let d = 0.3;
        for t in [1e-9, 0.1, 0.15, 0.299999] {
            let fd = (smoothstep(t + 1e-7, d) - smoothstep(t - 1e-7, d)) / 2e-7;
            assert!((fd - smoothstep_prime(t, d)).abs() < 1e-5);
        }
        assert_eq!(smoothstep_prime(d, d), 0.0);
    }
}
