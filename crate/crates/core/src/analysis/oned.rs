use serde::{Deserialize, Serialize};

use crate::domain::{Grid, MembraneStack};
use crate::{Error, Result};

/// Slope jump of the top or bottom group at a branch point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeJump {
    /// Zero-based index of the group's first membrane.
    pub first: usize,
    /// Number of membranes in the group.
    pub size: usize,
    /// Top group of the branching set (otherwise the bottom group).
    pub top: bool,
    /// `a⁺ − a⁻` for the top group; for the bottom group, the same for `−u`.
    pub jump: f64,
}

impl SlopeJump {
    /// `1/√k`.
    pub fn bound(&self) -> f64 {
        1.0 / (self.size as f64).sqrt()
    }
}

/// Membranes `first..first + size` coincide at the branch point and split on one side.
#[derive(Debug, Clone)]
struct Branch {
    first: usize,
    size: usize,
    /// `true` when they separate for `x > point`.
    right: bool,
    /// Zero-based starts of the groups that stay together on the separated side.
    groups: Vec<usize>,
    /// Number of separated consecutive pairs among the set.
    separations: usize,
}

fn window_nodes(grid: &Grid, point: f64, window: f64, right: bool) -> Vec<usize> {
    (0..grid.node_count())
        .filter(|&k| {
            let x = grid.node_point(k)[0];
            if right {
                x > point && x <= point + window
            } else {
                x < point && x >= point - window
            }
        })
        .collect()
}

/// Least-squares slope of `f` over the nodes.
fn ls_slope(grid: &Grid, nodes: &[usize], f: impl Fn(usize) -> f64) -> f64 {
    let m = nodes.len() as f64;
    let xs: Vec<f64> = nodes.iter().map(|&k| grid.node_point(k)[0]).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let vm = nodes.iter().map(|&k| f(k)).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&k, &x) in nodes.iter().zip(&xs) {
        sxy += (x - xm) * (f(k) - vm);
        sxx += (x - xm) * (x - xm);
    }
    sxy / sxx
}

/// Gap threshold for "coinciding": one cell's worth of the steepest gap slope.
fn coincidence_tol(stack: &MembraneStack) -> f64 {
    let g = stack.grid();
    let h = g.h(0);
    let mut slope = 0.0f64;
    for k in 0..g.node_count() - 1 {
        for i in 0..stack.n_membranes() - 1 {
            slope = slope.max((stack.gap(k + 1, i) - stack.gap(k, i)).abs() / h);
        }
    }
    slope * h + 1e-12
}

fn branch(stack: &MembraneStack, point: f64, window: f64) -> Result<(Branch, f64)> {
    let g = stack.grid();
    if g.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: g.dim(),
        });
    }
    let h = g.h(0);
    if window < 8.0 * h - 1e-12 * h {
        return Err(Error::InvalidArgument(format!(
            "window {window} is shorter than 8 cells"
        )));
    }
    let (lo, hi) = g.extent(0);
    if point - window < lo || point + window > hi {
        return Err(Error::RadiusOutOfDomain { radius: window });
    }
    let tol = coincidence_tol(stack);
    let n = stack.n_membranes();
    let gaps_at = |x: f64| -> Vec<f64> {
        let u = stack.at([x, 0.0]);
        u.windows(2).map(|w| w[0] - w[1]).collect()
    };
    let here = gaps_at(point);
    let ends = [gaps_at(point - window), gaps_at(point + window)];
    let mut i = 0;
    while i < n - 1 {
        if here[i] > tol {
            i += 1;
            continue;
        }
        let first = i;
        while i < n - 1 && here[i] <= tol {
            i += 1;
        }
        let size = i - first + 1;
        let count = |side: &[f64]| (first..i).filter(|&p| side[p] > tol).count();
        let (left, right) = (count(&ends[0]), count(&ends[1]));
        if left == 0 && right == 0 {
            continue;
        }
        let on_right = right >= left;
        let side = &ends[usize::from(on_right)];
        let mut groups = vec![first];
        groups.extend((first..i).filter(|&p| side[p] > tol).map(|p| p + 1));
        return Ok((
            Branch {
                first,
                size,
                right: on_right,
                groups,
                separations: left.max(right),
            },
            tol,
        ));
    }
    Err(Error::InvalidArgument(format!(
        "no membranes branch at x = {point}"
    )))
}

/// Error when some gap crosses the coincidence level inside the window,
/// away from the branch point itself.
fn check_clear(stack: &MembraneStack, point: f64, window: f64, right: bool, tol: f64) -> Result<()> {
    let g = stack.grid();
    let h = g.h(0);
    let nodes = window_nodes(g, point, window, right);
    for i in 0..stack.n_membranes() - 1 {
        for w in nodes.windows(2) {
            let (a, b) = (stack.gap(w[0], i) > tol, stack.gap(w[1], i) > tol);
            let x = g.node_point(w[0])[0];
            if a != b && (x - point).abs() > 2.0 * h {
                return Err(Error::InvalidArgument(format!(
                    "window around x = {point} crosses another branch point of gap {}",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// `|Σ_{i∈I} slope(u_i − u_I)² − W|` on the separated side of a branch point,
/// with `I` the membranes coinciding there, slopes fitted by least squares
/// over the window and `W` the number of separated pairs among `I`.
pub fn equipartition_residual(stack: &MembraneStack, point: f64, window: f64) -> Result<f64> {
    let (b, tol) = branch(stack, point, window)?;
    check_clear(stack, point, window, b.right, tol)?;
    let g = stack.grid();
    let nodes = window_nodes(g, point, window, b.right);
    let slopes: Vec<f64> = (b.first..b.first + b.size)
        .map(|i| ls_slope(g, &nodes, |k| stack.get(k, i)))
        .collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let kinetic: f64 = slopes.iter().map(|s| (s - mean).powi(2)).sum();
    Ok((kinetic - b.separations as f64).abs())
}

/// Slope jumps of the top and bottom groups splitting at a branch point.
pub fn slope_jumps(stack: &MembraneStack, point: f64, window: f64) -> Result<Vec<SlopeJump>> {
    let (b, tol) = branch(stack, point, window)?;
    check_clear(stack, point, window, true, tol)?;
    check_clear(stack, point, window, false, tol)?;
    let g = stack.grid();
    let left = window_nodes(g, point, window, false);
    let right = window_nodes(g, point, window, true);
    let end = b.first + b.size;
    let mut bounds: Vec<(usize, usize)> = Vec::new();
    for (k, &start) in b.groups.iter().enumerate() {
        let stop = b.groups.get(k + 1).copied().unwrap_or(end);
        bounds.push((start, stop));
    }
    let group_slope = |nodes: &[usize], (s, e): (usize, usize)| {
        ls_slope(g, nodes, |k| (s..e).map(|i| stack.get(k, i)).sum::<f64>() / (e - s) as f64)
    };
    let jump = |grp: (usize, usize)| group_slope(&right, grp) - group_slope(&left, grp);
    let top = bounds[0];
    let bottom = *bounds.last().expect("at least two groups");
    Ok(vec![
        SlopeJump {
            first: top.0,
            size: top.1 - top.0,
            top: true,
            jump: jump(top),
        },
        SlopeJump {
            first: bottom.0,
            size: bottom.1 - bottom.0,
            top: false,
            jump: -jump(bottom),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{explicit_1d_minimizer, explicit_kink_1, explicit_kink_2, sample_cone, ConeSpec};

    fn explicit() -> MembraneStack {
        let g = Grid::line(-1.0, 1.0, 512).unwrap();
        MembraneStack::from_fn(g, 3, 1e-12, |p, o| {
            o.copy_from_slice(&explicit_1d_minimizer(p[0]))
        })
        .unwrap()
    }

    #[test]
    fn explicit_kinks_are_in_equipartition() {
        let s = explicit();
        for x in [explicit_kink_1(), explicit_kink_2()] {
            let r = equipartition_residual(&s, x, 0.1).unwrap();
            assert!(r <= 1e-10, "{x}: {r}");
        }
    }

    #[test]
    fn non_critical_kink() {
        let g = Grid::line(-1.0, 1.0, 64).unwrap();
        let s = MembraneStack::from_fn(g, 2, 0.0, |p, o| {
            o[0] = 0.5 * p[0].max(0.0);
            o[1] = -o[0];
        })
        .unwrap();
        let r = equipartition_residual(&s, 0.0, 0.5).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn explicit_slope_jumps() {
        let s = explicit();
        let j = slope_jumps(&s, explicit_kink_1(), 0.1).unwrap();
        let lambda = (2.0f64 / 3.0).sqrt();
        assert_eq!((j[0].first, j[0].size, j[1].first, j[1].size), (0, 1, 1, 2));
        assert!((j[0].jump - lambda).abs() < 1e-10);
        assert!((j[1].jump - lambda / 2.0).abs() < 1e-10);
        assert!(j.iter().all(|j| j.jump >= 0.0 && j.jump <= j.bound()));
    }

    #[test]
    fn reflected_cone_branches_to_the_left() {
        let g = Grid::line(-1.0, 1.0, 64).unwrap();
        let s = sample_cone(&ConeSpec::OneD { n: 4, k: 2, reflected: true }, &g, [0.0, 0.0]).unwrap();
        let j = slope_jumps(&s, 0.0, 0.5).unwrap();
        assert!((j[0].jump - 0.5).abs() < 1e-12 && (j[1].jump - 0.5).abs() < 1e-12);
        assert!(equipartition_residual(&s, 0.0, 0.5).unwrap() < 1e-12);
    }

    #[test]
    fn window_errors() {
        let s = explicit();
        assert!(equipartition_residual(&s, explicit_kink_1(), 0.01).is_err());
        assert!(equipartition_residual(&s, explicit_kink_1(), 0.6).is_err());
        assert!(equipartition_residual(&s, -0.6, 0.1).is_err());
    }
}
