use serde::{Deserialize, Serialize};

use crate::domain::{Grid, MembraneStack, Point};
use crate::energy::total_energy_with_density;
use crate::{Error, Result};

/// Points on each circle for the surface term.
pub const CIRCLE_POINTS: usize = 720;

/// `Φ(r) = r⁻ⁿ ∫_{B_r} (|∇U|² + W) − r⁻ⁿ⁻¹ ∫_{∂B_r} |U|²` at a list of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeissProfile {
    pub center: Point,
    pub radii: Vec<f64>,
    pub phi: Vec<f64>,
    /// Smallest `phi[k+1] − phi[k]`; `+∞` for a single radius.
    pub min_increment: f64,
}

impl WeissProfile {
    /// `r,phi` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,phi\n");
        for (r, p) in self.radii.iter().zip(&self.phi) {
            s.push_str(&format!("{r:.12e},{p:.12e}\n"));
        }
        s
    }
}

/// Weiss energy of `stack` about `center`, after subtracting the nodal average.
///
/// The solid integral weights each cell's constant density by the exact
/// measure of its intersection with the ball. The potential counts, per cell,
/// the measure of `{u_i > u_{i+1}}` reconstructed by [`separated_fraction`].
/// The surface integral uses the trapezoid rule on [`CIRCLE_POINTS`]
/// bilinearly interpolated samples (the two end points in 1D).
pub fn weiss_profile(
    stack: &MembraneStack,
    center: Point,
    radii: &[f64],
    tau: f64,
) -> Result<WeissProfile> {
    let grid = *stack.grid();
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::InvalidArgument(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    for &r in radii {
        check_ball(&grid, center, r)?;
    }
    let u = stack.zero_average();
    let mut density = total_energy_with_density(&u, f64::INFINITY)
        .per_cell
        .expect("density requested");
    for i in 0..stack.n_membranes() - 1 {
        for (d, f) in density.iter_mut().zip(separated_fraction(stack, i, tau)) {
            *d += f;
        }
    }
    let phi: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let solid = ball_integral(&grid, &density, center, r);
            let surface = sphere_integral(&u, center, r);
            if grid.dim() == 1 {
                solid / r - surface / (r * r)
            } else {
                solid / (r * r) - surface / (r * r * r)
            }
        })
        .collect();
    let min_increment = phi
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(WeissProfile {
        center,
        radii: radii.to_vec(),
        phi,
        min_increment,
    })
}

/// Fraction of every cell where the gap `u_i − u_{i+1}` (zero-based `i`) is
/// positive, trusting nodal gaps only above `tau`.
///
/// Nodes with gap above `tau` keep their gap. Any other node takes the most
/// negative linear extrapolation from a separated axis neighbor and the node
/// beyond it, or the mirror of that neighbor when no such slope is available.
/// The set is then cut along linearly interpolated edge crossings, which is
/// exact for piecewise linear gaps.
pub fn separated_fraction(stack: &MembraneStack, i: usize, tau: f64) -> Vec<f64> {
    let grid = stack.grid();
    let dim = grid.dim();
    let nx = grid.nx();
    let ny = if dim == 1 { 1 } else { grid.ny() };
    let f: Vec<f64> = (0..grid.node_count())
        .map(|k| stack.gap(k, i))
        .map(|g| if g > tau { g } else { 0.0 })
        .collect();
    let mut e = f.clone();
    for k in 0..f.len() {
        if f[k] > 0.0 {
            continue;
        }
        let (x, y) = (k % nx, k / nx);
        let mut best = f64::INFINITY;
        let mut any = false;
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            if dim == 1 && dy != 0 {
                continue;
            }
            let at = |s: i64| {
                let (px, py) = (x as i64 + s * dx, y as i64 + s * dy);
                (px >= 0 && py >= 0 && (px as usize) < nx && (py as usize) < ny)
                    .then(|| f[py as usize * nx + px as usize])
            };
            let Some(a) = at(1).filter(|&a| a > 0.0) else { continue };
            any = true;
            let est = match at(2) {
                Some(b) if b > a => 2.0 * a - b,
                _ => -a,
            };
            best = best.min(est);
        }
        e[k] = if any { best } else { f64::NEG_INFINITY };
    }
    let t = |p: f64, q: f64| if q == f64::NEG_INFINITY { 0.0 } else { p / (p - q) };
    if dim == 1 {
        return e
            .windows(2)
            .map(|w| match (w[0] > 0.0, w[1] > 0.0) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                (true, false) => t(w[0], w[1]),
                (false, true) => t(w[1], w[0]),
            })
            .collect();
    }
    let mut out = Vec::with_capacity(grid.cell_count());
    for cj in 0..grid.cells(1) {
        for ci in 0..grid.cells(0) {
            let n00 = cj * nx + ci;
            let v = [e[n00], e[n00 + 1], e[n00 + nx + 1], e[n00 + nx]];
            out.push(square_fraction(v, t));
        }
    }
    out
}

/// Area fraction of `{v > 0}` in the unit square with corner values
/// counter-clockwise from the origin, cut along straight edge crossings.
fn square_fraction(v: [f64; 4], t: impl Fn(f64, f64) -> f64) -> f64 {
    const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let inside = v.map(|x| x > 0.0);
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 {
        return 0.0;
    }
    if count == 4 {
        return 1.0;
    }
    let crossing = |a: usize| {
        let b = (a + 1) % 4;
        let s = if inside[a] { t(v[a], v[b]) } else { 1.0 - t(v[b], v[a]) };
        let (p, q) = (CORNERS[a], CORNERS[b]);
        [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
    };
    let area = |poly: &[[f64; 2]]| {
        let m = poly.len();
        0.5 * (0..m)
            .map(|k| {
                let (p, q) = (poly[k], poly[(k + 1) % m]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>()
    };
    let saddle = count == 2 && inside[0] == inside[2];
    let joined = saddle && {
        let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
        finite.len() == 4 && finite.iter().sum::<f64>() > 0.0
    };
    if saddle && !joined {
        return (0..4)
            .filter(|&a| inside[a])
            .map(|a| area(&[crossing((a + 3) % 4), CORNERS[a], crossing(a)]))
            .sum();
    }
    let mut poly = Vec::with_capacity(6);
    for a in 0..4 {
        if inside[a] {
            poly.push(CORNERS[a]);
        }
        if inside[a] != inside[(a + 1) % 4] {
            poly.push(crossing(a));
        }
    }
    area(&poly)
}

/// Error unless the closed ball (or interval) lies inside the grid.
pub(crate) fn check_ball(grid: &Grid, center: Point, r: f64) -> Result<()> {
    let inside = (0..grid.dim()).all(|a| {
        let (lo, hi) = grid.extent(a);
        let slack = 1e-12 * (hi - lo);
        center[a] - r >= lo - slack && center[a] + r <= hi + slack
    });
    if !inside || !(r > 0.0) {
        return Err(Error::RadiusOutOfDomain { radius: r });
    }
    Ok(())
}

/// `∫_{B_r(center)} ρ` for a cellwise constant density.
pub fn ball_integral(grid: &Grid, density: &[f64], center: Point, r: f64) -> f64 {
    let (x0, _) = grid.extent(0);
    let hx = grid.h(0);
    let cells_x = grid.cells(0);
    let range = |lo: f64, h: f64, c: f64, cells: usize| {
        let a = (((c - r - lo) / h).floor().max(0.0) as usize).min(cells);
        let b = (((c + r - lo) / h).ceil().max(0.0) as usize).min(cells);
        a..b
    };
    let mut total = 0.0;
    if grid.dim() == 1 {
        for ci in range(x0, hx, center[0], cells_x) {
            let a = x0 + ci as f64 * hx - center[0];
            let len = (a + hx).min(r) - a.max(-r);
            if len > 0.0 {
                total += density[ci] * len;
            }
        }
        return total;
    }
    let (y0, _) = grid.extent(1);
    let hy = grid.h(1);
    for cj in range(y0, hy, center[1], grid.cells(1)) {
        let b = y0 + cj as f64 * hy - center[1];
        for ci in range(x0, hx, center[0], cells_x) {
            let a = x0 + ci as f64 * hx - center[0];
            let area = disk_rect_area(r, a, a + hx, b, b + hy);
            if area > 0.0 {
                total += density[cj * cells_x + ci] * area;
            }
        }
    }
    total
}

/// Measure of `B_r(0) ∩ [x0, x1] × [y0, y1]`.
pub fn disk_rect_area(r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    (below(r, x0, x1, y1) - below(r, x0, x1, y0)).max(0.0)
}

/// Measure of `B_r(0) ∩ {x0 ≤ x ≤ x1, y' ≤ y}`.
fn below(r: f64, x0: f64, x1: f64, y: f64) -> f64 {
    let (a, b) = (x0.max(-r), x1.min(r));
    if a >= b || y <= -r {
        return 0.0;
    }
    // ∫ √(r² − x²) dx
    let prim = |x: f64| 0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).clamp(-1.0, 1.0).asin());
    let half = |lo: f64, hi: f64| if lo < hi { prim(hi) - prim(lo) } else { 0.0 };
    if y >= r {
        return 2.0 * half(a, b);
    }
    let q = (r * r - y * y).sqrt();
    let (ma, mb) = (a.max(-q), b.min(q));
    let mut total = 0.0;
    if ma < mb {
        total += y * (mb - ma) + half(ma, mb);
    }
    if y > 0.0 {
        total += 2.0 * (half(a, b.min(-q)) + half(a.max(q), b));
    }
    total
}

/// `∫_{∂B_r} |U|²`: trapezoid on the circle, or the two end points in 1D.
fn sphere_integral(u: &MembraneStack, center: Point, r: f64) -> f64 {
    let sq = |p: Point| u.at(p).iter().map(|v| v * v).sum::<f64>();
    if u.grid().dim() == 1 {
        return sq([center[0] - r, 0.0]) + sq([center[0] + r, 0.0]);
    }
    let dt = std::f64::consts::TAU / CIRCLE_POINTS as f64;
    let sum: f64 = (0..CIRCLE_POINTS)
        .map(|k| {
            let (s, c) = (k as f64 * dt).sin_cos();
            sq([center[0] + r * c, center[1] + r * s])
        })
        .sum();
    sum * dt * r
}
