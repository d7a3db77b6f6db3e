use serde::{Deserialize, Serialize};

use super::field::MembraneStack;
use super::grid::{Grid, Point};
use crate::cones::ConeSpec;
use crate::{Error, Result};

/// Transition profile `φ(x₁)` of a blended trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlendProfile {
    /// `0` for `x ≤ lo`, `1` for `x ≥ hi`, cubic smoothstep in between.
    Smoothstep { lo: f64, hi: f64 },
    Constant { value: f64 },
}

impl Default for BlendProfile {
    fn default() -> Self {
        BlendProfile::Smoothstep { lo: -1.0, hi: 1.0 }
    }
}

impl BlendProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            BlendProfile::Constant { value } => value,
            BlendProfile::Smoothstep { lo, hi } => {
                let t = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
                t * t * (3.0 - 2.0 * t)
            }
        }
    }
}

/// Dirichlet data for the membranes on the outer boundary of a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    /// Trace of a closed-form cone with its vertex at `center`.
    Cone { spec: ConeSpec, center: Point },
    /// `φ(x₁) one(x₂) + (1 − φ(x₁)) zero(x₂)`, with `one` and `zero` one-dimensional cones.
    Blend {
        one: ConeSpec,
        zero: ConeSpec,
        profile: BlendProfile,
    },
    /// Boundary values read from a stack on the same grid.
    Explicit(MembraneStack),
    /// Values at the two ends of an interval.
    Ends { left: Vec<f64>, right: Vec<f64> },
    /// Node-major values along each edge of a rectangle, ordered by increasing
    /// coordinate. Corners take the average of the two edges meeting there.
    Edges {
        n: usize,
        left: Vec<f64>,
        right: Vec<f64>,
        bottom: Vec<f64>,
        top: Vec<f64>,
    },
}

impl BoundaryData {
    /// Number of membranes the data describes.
    pub fn n_membranes(&self) -> usize {
        match self {
            BoundaryData::Cone { spec, .. } => spec.n_membranes(),
            BoundaryData::Blend { one, .. } => one.n_membranes(),
            BoundaryData::Explicit(s) => s.n_membranes(),
            BoundaryData::Ends { left, .. } => left.len(),
            BoundaryData::Edges { n, .. } => *n,
        }
    }

    /// Validate compatibility with a grid and `n` membranes.
    pub fn check(&self, grid: &Grid, n: usize) -> Result<()> {
        let dim_err = |expected: usize| Error::DimensionMismatch {
            expected,
            got: grid.dim(),
        };
        match self {
            BoundaryData::Cone { spec, .. } => {
                spec.validate()?;
                if !spec.supports_dim(grid.dim()) {
                    return Err(dim_err(3 - grid.dim()));
                }
                expect_n(spec.n_membranes(), n)
            }
            BoundaryData::Blend { one, zero, .. } => {
                if grid.dim() != 2 {
                    return Err(dim_err(2));
                }
                one.validate()?;
                zero.validate()?;
                for c in [one, zero] {
                    if !matches!(c, ConeSpec::OneD { .. } | ConeSpec::TripleCritical) {
                        return Err(Error::InvalidArgument(format!(
                            "blend components must be one-dimensional cones, got '{c}'"
                        )));
                    }
                }
                expect_n(one.n_membranes(), n)?;
                expect_n(zero.n_membranes(), n)
            }
            BoundaryData::Explicit(s) => {
                if s.grid() != grid {
                    return Err(Error::InvalidArgument(
                        "explicit boundary stack lives on another grid".into(),
                    ));
                }
                expect_n(s.n_membranes(), n)
            }
            BoundaryData::Ends { left, right } => {
                if grid.dim() != 1 {
                    return Err(dim_err(1));
                }
                expect_n(left.len(), n)?;
                expect_n(right.len(), n)
            }
            BoundaryData::Edges {
                n: edge_n,
                left,
                right,
                bottom,
                top,
            } => {
                if grid.dim() != 2 {
                    return Err(dim_err(2));
                }
                expect_n(*edge_n, n)?;
                for (name, edge, len) in [
                    ("left", left, grid.ny()),
                    ("right", right, grid.ny()),
                    ("bottom", bottom, grid.nx()),
                    ("top", top, grid.nx()),
                ] {
                    if edge.len() != n * len {
                        return Err(Error::InvalidArgument(format!(
                            "{name} edge has {} values, expected {} x {}",
                            edge.len(),
                            n,
                            len
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Boundary value at a node into `out` (length `n`). Assumes `check` passed.
    pub fn value_at(&self, grid: &Grid, node: usize, out: &mut [f64]) {
        let p = grid.node_point(node);
        match self {
            BoundaryData::Cone { spec, center } => {
                spec.evaluate_into([p[0] - center[0], p[1] - center[1]], out)
            }
            BoundaryData::Blend { one, zero, profile } => {
                let phi = profile.eval(p[0]);
                let mut b = vec![0.0; out.len()];
                one.evaluate_into([p[1], 0.0], out);
                zero.evaluate_into([p[1], 0.0], &mut b);
                for (o, z) in out.iter_mut().zip(&b) {
                    *o = phi * *o + (1.0 - phi) * z;
                }
            }
            BoundaryData::Explicit(s) => out.copy_from_slice(s.node(node)),
            BoundaryData::Ends { left, right } => {
                let (i, _) = grid.ij(node);
                let src = if i == 0 { left } else { right };
                out.copy_from_slice(src);
            }
            BoundaryData::Edges {
                n,
                left,
                right,
                bottom,
                top,
            } => {
                let n = *n;
                let (i, j) = grid.ij(node);
                let (cx, cy) = (grid.cells(0), grid.cells(1));
                let mut hits = 0usize;
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut add = |edge: &[f64], k: usize| {
                    for (o, v) in out.iter_mut().zip(&edge[k * n..(k + 1) * n]) {
                        *o += v;
                    }
                    hits += 1;
                };
                if i == 0 {
                    add(left, j);
                }
                if i == cx {
                    add(right, j);
                }
                if j == 0 {
                    add(bottom, i);
                }
                if j == cy {
                    add(top, i);
                }
                if hits > 1 {
                    out.iter_mut().for_each(|v| *v /= hits as f64);
                }
            }
        }
    }
}

fn expect_n(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::InvalidArgument(format!(
            "boundary data has {got} membranes, expected {expected}"
        )));
    }
    Ok(())
}

/// Overwrite the boundary nodes of `stack` with `data`; interior nodes are untouched.
pub fn apply_boundary(stack: &MembraneStack, data: &BoundaryData) -> Result<MembraneStack> {
    let grid = *stack.grid();
    let n = stack.n_membranes();
    data.check(&grid, n)?;
    let tol = stack.feasibility_tol();
    let mut values = stack.values().to_vec();
    let mut buf = vec![0.0; n];
    for node in (0..grid.node_count()).filter(|&k| grid.is_boundary_node(k)) {
        data.value_at(&grid, node, &mut buf);
        for (i, w) in buf.windows(2).enumerate() {
            if !(w[0] - w[1] >= -tol) {
                return Err(Error::OrderingViolated {
                    node,
                    upper: i + 1,
                    lower: i + 2,
                    gap: w[0] - w[1],
                });
            }
        }
        values[node * n..(node + 1) * n].copy_from_slice(&buf);
    }
    stack.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> Grid {
        Grid::rect((-4.0, 4.0), (-1.0, 1.0), (16, 8)).unwrap()
    }

    fn u01() -> ConeSpec {
        ConeSpec::OneD {
            n: 3,
            k: 1,
            reflected: false,
        }
    }

    fn u02() -> ConeSpec {
        ConeSpec::OneD {
            n: 3,
            k: 2,
            reflected: false,
        }
    }

    #[test]
    fn blend_degenerates_to_components() {
        let g = rect();
        let zeros = MembraneStack::zeros(g, 3).unwrap();
        for (value, spec) in [(1.0, u01()), (0.0, u02())] {
            let data = BoundaryData::Blend {
                one: u01(),
                zero: u02(),
                profile: BlendProfile::Constant { value },
            };
            let s = apply_boundary(&zeros, &data).unwrap();
            for node in 0..g.node_count() {
                if g.is_boundary_node(node) {
                    let p = g.node_point(node);
                    assert_eq!(s.node(node), spec.evaluate(&[p[1]]).unwrap().as_slice());
                } else {
                    assert_eq!(s.node(node), &[0.0, 0.0, 0.0]);
                }
            }
        }
    }

    #[test]
    fn smoothstep_profile_endpoints() {
        let p = BlendProfile::default();
        assert_eq!(p.eval(-3.0), 0.0);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(0.0), 0.5);
    }

    #[test]
    fn explicit_disorder_is_rejected() {
        let g = Grid::line(0.0, 1.0, 4).unwrap();
        let zeros = MembraneStack::zeros(g, 2).unwrap();
        let data = BoundaryData::Ends {
            left: vec![0.0, 1.0],
            right: vec![0.0, 0.0],
        };
        assert!(matches!(
            apply_boundary(&zeros, &data),
            Err(Error::OrderingViolated { node: 0, .. })
        ));
    }

    #[test]
    fn edge_corners_are_averaged() {
        let g = Grid::rect((0.0, 1.0), (0.0, 1.0), (2, 2)).unwrap();
        let data = BoundaryData::Edges {
            n: 2,
            left: vec![2.0, 0.0, 2.0, 0.0, 2.0, 0.0],
            right: vec![0.0; 6],
            bottom: vec![4.0, 0.0, 4.0, 0.0, 4.0, 0.0],
            top: vec![0.0; 6],
        };
        let s = apply_boundary(&MembraneStack::zeros(g, 2).unwrap(), &data).unwrap();
        assert_eq!(s.node(0), &[3.0, 0.0]);
        assert_eq!(s.node(g.index(0, 1)), &[2.0, 0.0]);
        assert_eq!(s.node(g.index(1, 0)), &[4.0, 0.0]);
        assert_eq!(s.node(g.index(2, 2)), &[0.0, 0.0]);
    }
}
