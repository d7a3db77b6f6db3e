//! Discrete harmonic replacement on a node subset.
//!
//! One dimension: each run of masked nodes is replaced by the straight line
//! between its unmasked neighbours, the exact solution of the 3-point stencil.
//! Two dimensions: conjugate gradients on the 5-point stencil.

use crate::domain::{Grid, ScalarField};
use crate::{Error, Result};

/// Bound on the normalized stencil residual `|u − (weighted neighbour mean)|`.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Solve `Δ_h v = 0` on the masked nodes with `field` as data elsewhere.
pub fn harmonic_replacement(field: &ScalarField, mask: &[bool]) -> Result<ScalarField> {
    let grid = *field.grid();
    if mask.len() != grid.node_count() {
        return Err(Error::InvalidArgument(format!(
            "mask has {} entries for {} nodes",
            mask.len(),
            grid.node_count()
        )));
    }
    if let Some(node) = (0..mask.len()).find(|&k| mask[k] && grid.is_boundary_node(k)) {
        return Err(Error::InvalidArgument(format!(
            "mask contains boundary node {node}"
        )));
    }
    let mut values = field.values().to_vec();
    if !mask.iter().any(|&m| m) {
        return Ok(field.clone());
    }
    if grid.dim() == 1 {
        replace_1d(&mut values, mask);
    } else {
        replace_2d(&grid, &mut values, mask)?;
    }
    ScalarField::new(grid, values)
}

fn replace_1d(v: &mut [f64], mask: &[bool]) {
    let mut k = 0;
    while k < v.len() {
        if !mask[k] {
            k += 1;
            continue;
        }
        let start = k - 1;
        while mask[k] {
            k += 1;
        }
        let (a, b) = (v[start], v[k]);
        let len = (k - start) as f64;
        for (off, x) in v[start + 1..k].iter_mut().enumerate() {
            *x = a + (b - a) * (off + 1) as f64 / len;
        }
    }
}

/// Stencil weights: `diag·u_c − wx(u_e + u_w) − wy(u_n + u_s)`.
fn weights(grid: &Grid) -> (f64, f64, f64) {
    let wx = 1.0 / (grid.h(0) * grid.h(0));
    let wy = 1.0 / (grid.h(1) * grid.h(1));
    (2.0 * (wx + wy), wx, wy)
}

fn replace_2d(grid: &Grid, v: &mut [f64], mask: &[bool]) -> Result<()> {
    let nx = grid.nx();
    let (diag, wx, wy) = weights(grid);
    let unknowns: Vec<usize> = (0..mask.len()).filter(|&k| mask[k]).collect();
    let mut slot = vec![usize::MAX; mask.len()];
    for (s, &k) in unknowns.iter().enumerate() {
        slot[k] = s;
    }
    let m = unknowns.len();
    // right-hand side from fixed neighbours
    let mut b = vec![0.0; m];
    for (s, &k) in unknowns.iter().enumerate() {
        for (nb, w) in [(k - 1, wx), (k + 1, wx), (k - nx, wy), (k + nx, wy)] {
            if !mask[nb] {
                b[s] += w * v[nb];
            }
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for (s, &k) in unknowns.iter().enumerate() {
            let mut acc = diag * x[s];
            for (nb, w) in [(k - 1, wx), (k + 1, wx), (k - nx, wy), (k + nx, wy)] {
                if mask[nb] {
                    acc -= w * x[slot[nb]];
                }
            }
            out[s] = acc;
        }
    };
    let mut x: Vec<f64> = unknowns.iter().map(|&k| v[k]).collect();
    let mut ax = vec![0.0; m];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let tol = RESIDUAL_TOL * diag;
    let max_iter = 20 * m + 100;
    let mut converged = sup(&r) <= tol;
    for _ in 0..max_iter {
        if converged {
            break;
        }
        apply(&p, &mut ax);
        let pap: f64 = p.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let alpha = rr / pap;
        for s in 0..m {
            x[s] += alpha * p[s];
            r[s] -= alpha * ax[s];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if sup(&r) <= 0.5 * tol {
            // confirm with the true residual
            apply(&x, &mut ax);
            let true_sup = b
                .iter()
                .zip(&ax)
                .map(|(b, a)| (b - a).abs())
                .fold(0.0, f64::max);
            if true_sup <= tol {
                converged = true;
                break;
            }
            for s in 0..m {
                r[s] = b[s] - ax[s];
            }
            p.copy_from_slice(&r);
            rr = r.iter().map(|v| v * v).sum();
            continue;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for s in 0..m {
            p[s] = r[s] + beta * p[s];
        }
    }
    if !converged {
        return Err(Error::InvalidArgument(
            "harmonic replacement did not reach its residual tolerance".into(),
        ));
    }
    for (s, &k) in unknowns.iter().enumerate() {
        v[k] = x[s];
    }
    Ok(())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `Δ_h f` at every interior node (3- or 5-point stencil); zero on the boundary.
pub fn discrete_laplacian(field: &ScalarField) -> Vec<f64> {
    let grid = field.grid();
    let v = field.values();
    let nx = grid.nx();
    (0..grid.node_count())
        .map(|k| {
            if grid.is_boundary_node(k) {
                return 0.0;
            }
            let hx2 = grid.h(0) * grid.h(0);
            let mut lap = (v[k - 1] - 2.0 * v[k] + v[k + 1]) / hx2;
            if grid.dim() == 2 {
                let hy2 = grid.h(1) * grid.h(1);
                lap += (v[k - nx] - 2.0 * v[k] + v[k + nx]) / hy2;
            }
            lap
        })
        .collect()
}

/// Mask of every node off the grid boundary.
pub fn interior_mask(grid: &Grid) -> Vec<bool> {
    (0..grid.node_count())
        .map(|k| !grid.is_boundary_node(k))
        .collect()
}

/// Mask of interior nodes inside the closed ball `B_r(center)`.
pub fn ball_mask(grid: &Grid, center: [f64; 2], radius: f64) -> Vec<bool> {
    (0..grid.node_count())
        .map(|k| {
            let p = grid.node_point(k);
            let d2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
            !grid.is_boundary_node(k) && d2 <= radius * radius
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_fields_are_fixed_points() {
        let g = Grid::rect((-1.0, 1.0), (0.0, 3.0), (20, 30)).unwrap();
        let f = ScalarField::from_fn(g, |p| 0.3 + 2.0 * p[0] - 1.5 * p[1]).unwrap();
        let r = harmonic_replacement(&f, &interior_mask(&g)).unwrap();
        for (a, b) in r.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn abs_becomes_a_line() {
        let g = Grid::line(-1.0, 1.0, 64).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0].abs()).unwrap();
        let r = harmonic_replacement(&f, &interior_mask(&g)).unwrap();
        assert!(r.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn empty_mask_is_identity_and_boundary_mask_is_rejected() {
        let g = Grid::rect((0.0, 1.0), (0.0, 1.0), (4, 4)).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0] * p[0]).unwrap();
        assert_eq!(harmonic_replacement(&f, &vec![false; 25]).unwrap(), f);
        let mut bad = vec![false; 25];
        bad[0] = true;
        assert!(harmonic_replacement(&f, &bad).is_err());
    }

    #[test]
    fn residual_is_small_in_2d() {
        let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (40, 40)).unwrap();
        let f = ScalarField::from_fn(g, |p| (3.0 * p[0]).sin() * p[1].abs()).unwrap();
        let mask = ball_mask(&g, [0.1, -0.2], 0.7);
        let r = harmonic_replacement(&f, &mask).unwrap();
        let lap = discrete_laplacian(&r);
        let diag = 2.0 * 2.0 / (g.h(0) * g.h(0));
        for k in 0..mask.len() {
            if mask[k] {
                assert!(lap[k].abs() / diag <= 1e-10);
            } else {
                assert_eq!(r.values()[k], f.values()[k]);
            }
        }
    }
}
