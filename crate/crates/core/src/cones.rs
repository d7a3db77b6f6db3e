//! Closed-form homogeneous solutions and critical configurations.
//!
//! * `OneD { n, k }`: the two-branch cone. All membranes vanish for `x ≤ 0`;
//!   for `x > 0` the top `k` rise with slope `a` and the bottom `n - k`
//!   descend with slope `b`, where
//!   `a = √((n-k)/(k n))`, `b = √(k/((n-k) n))`. These are the unique slopes
//!   with zero average (`k a = (n-k) b`) and unit Dirichlet density
//!   (`k a² + (n-k) b² = 1`), matching `W = 1` on `{x > 0}`.
//! * `V0`, `Vs`: the two planar three-membrane cones with a junction at the origin.
//! * `TripleCritical`: `(x⁺, 0, -x⁺)`, critical under graph deformations only.
//! * `Explicit1D`: the minimizer on `[-1, 1]` with the trace of `TripleCritical`.
//!
//! In two dimensions the one-dimensional shapes depend on `x₁` only.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Grid, MembraneStack, Point};
use crate::{Error, Result};

/// Slopes of the explicit 1D minimizer.
pub const EXPLICIT_LAMBDA: f64 = 0.816_496_580_927_726; // √(2/3)
pub const EXPLICIT_MU: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Location of the triple branch point `1 - 1/λ = 1 - √(3/2)`.
pub fn explicit_kink_1() -> f64 {
    1.0 - 1.0 / EXPLICIT_LAMBDA
}

/// Location of the pair branch point `1 - 1/(2μ) = 1 - 1/√2`.
pub fn explicit_kink_2() -> f64 {
    1.0 - 1.0 / (2.0 * EXPLICIT_MU)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConeSpec {
    OneD { n: usize, k: usize, reflected: bool },
    V0 { rotation: f64 },
    Vs { rotation: f64 },
    TripleCritical,
    Explicit1D,
}

/// Top-group slope `a` and bottom-group slope magnitude `b` of a 1D cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopePair {
    pub a: f64,
    pub b: f64,
}

/// Normalized slopes of the `(n, k)` one-dimensional cone.
pub fn one_d_slopes(n: usize, k: usize) -> Result<SlopePair> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n-1, got n={n}, k={k}"
        )));
    }
    let (n, k) = (n as f64, k as f64);
    Ok(SlopePair {
        a: ((n - k) / (k * n)).sqrt(),
        b: (k / ((n - k) * n)).sqrt(),
    })
}

/// Closed form of the explicit 1D minimizer with trace `(0,0,0)` at -1 and `(1,0,-1)` at 1.
pub fn explicit_1d_minimizer(x: f64) -> [f64; 3] {
    let l = EXPLICIT_LAMBDA;
    let m = EXPLICIT_MU;
    let u1 = l * (x - 1.0 + 1.0 / l).max(0.0);
    let u2 = -0.5 * u1 + m * (x - 1.0 + 1.0 / (2.0 * m)).max(0.0);
    [u1, u2, -u1 - u2]
}

impl ConeSpec {
    pub fn n_membranes(&self) -> usize {
        match *self {
            ConeSpec::OneD { n, .. } => n,
            _ => 3,
        }
    }

    /// Whether the spec can be evaluated on a grid of this dimension.
    pub fn supports_dim(&self, dim: usize) -> bool {
        match self {
            ConeSpec::OneD { .. } | ConeSpec::TripleCritical => dim == 1 || dim == 2,
            ConeSpec::V0 { .. } | ConeSpec::Vs { .. } => dim == 2,
            ConeSpec::Explicit1D => dim == 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ConeSpec::OneD { n, k, .. } = *self {
            one_d_slopes(n, k)?;
        }
        Ok(())
    }

    /// Evaluate at a point given by its coordinates (length 1 or 2).
    pub fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>> {
        if !self.supports_dim(p.len()) {
            let expected = if p.len() == 1 { 2 } else { 1 };
            return Err(Error::DimensionMismatch {
                expected,
                got: p.len(),
            });
        }
        self.validate()?;
        let mut out = vec![0.0; self.n_membranes()];
        let q = [p[0], p.get(1).copied().unwrap_or(0.0)];
        self.evaluate_into(q, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into `out` (length `n_membranes()`); 1D shapes read `p[0]`.
    pub fn evaluate_into(&self, p: Point, out: &mut [f64]) {
        match *self {
            ConeSpec::OneD { n, k, reflected } => {
                let s = one_d_slopes(n, k).expect("validated cone");
                let x = if reflected { -p[0] } else { p[0] };
                let xp = x.max(0.0);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = if i < k { s.a * xp } else { -s.b * xp };
                }
            }
            ConeSpec::TripleCritical => {
                let xp = p[0].max(0.0);
                out[0] = xp;
                out[1] = 0.0;
                out[2] = -xp;
            }
            ConeSpec::Explicit1D => out.copy_from_slice(&explicit_1d_minimizer(p[0])),
            ConeSpec::V0 { rotation } => {
                let q = rotate(p, -rotation);
                let u1 = v0_top(q);
                let u3 = -v0_top([q[0], -q[1]]);
                write_three(out, u1, u3);
            }
            ConeSpec::Vs { rotation } => {
                let q = rotate(p, -rotation);
                let u1 = q[0].abs().max(2.0 * q[1].abs()) / 10f64.sqrt();
                let u3 = -(q[1].abs().max(2.0 * q[0].abs())) / 10f64.sqrt();
                write_three(out, u1, u3);
            }
        }
    }

    /// `∫_{B_1} W` of the cone (1D shapes extended trivially to the plane).
    pub fn cone_energy(&self) -> Result<f64> {
        self.validate()?;
        match self {
            // a single separation on a half disk
            ConeSpec::OneD { .. } => Ok(FRAC_PI_2),
            // two separations on a half disk
            ConeSpec::TripleCritical => Ok(PI),
            // {u1 > u2} and {u2 > u3} are sectors of opening 5π/6 each
            ConeSpec::V0 { .. } => Ok(5.0 * PI / 6.0),
            // {u1 = u2} = {|x1| ≥ 2|x2|}, {u2 = u3} = {|x2| ≥ 2|x1|}
            ConeSpec::Vs { .. } => Ok(2.0 * PI - 4.0 * 0.5f64.atan()),
            ConeSpec::Explicit1D => Err(Error::InvalidArgument(
                "the explicit minimizer is not homogeneous".into(),
            )),
        }
    }

    /// Largest slope magnitude of any membrane.
    pub fn max_slope(&self) -> f64 {
        match *self {
            ConeSpec::OneD { n, k, .. } => {
                let s = one_d_slopes(n, k).expect("validated cone");
                s.a.max(s.b)
            }
            ConeSpec::TripleCritical => 1.0,
            ConeSpec::Explicit1D => 0.5 * EXPLICIT_LAMBDA + EXPLICIT_MU,
            ConeSpec::V0 { .. } => (2.0f64 / 3.0).sqrt(),
            ConeSpec::Vs { .. } => 2.0 * (2.0f64 / 10.0).sqrt(),
        }
    }
}

/// `u_1` of V0: `(1/√6) max{x·e_{π/6}, 2 x·e_{-π/6}, 0}`.
fn v0_top(x: Point) -> f64 {
    let (c, s) = ((PI / 6.0).cos(), 0.5);
    let plus = x[0] * c + x[1] * s;
    let minus = x[0] * c - x[1] * s;
    plus.max(2.0 * minus).max(0.0) / 6f64.sqrt()
}

/// Fill `(u1, u2, u3)` with `u2 = -u1 - u3`, clamped into `[u3, u1]` against roundoff.
fn write_three(out: &mut [f64], u1: f64, u3: f64) {
    out[0] = u1;
    out[1] = (-u1 - u3).clamp(u3, u1);
    out[2] = u3;
}

fn rotate(p: Point, angle: f64) -> Point {
    if angle == 0.0 {
        return p;
    }
    let (s, c) = angle.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

/// Sample a cone on every node of the grid, with its vertex at `center`.
pub fn sample_cone(spec: &ConeSpec, grid: &Grid, center: Point) -> Result<MembraneStack> {
    if !spec.supports_dim(grid.dim()) {
        return Err(Error::DimensionMismatch {
            expected: if grid.dim() == 1 { 2 } else { 1 },
            got: grid.dim(),
        });
    }
    spec.validate()?;
    MembraneStack::from_fn(
        *grid,
        spec.n_membranes(),
        MembraneStack::CLOSED_FORM_TOL,
        |p, out| spec.evaluate_into([p[0] - center[0], p[1] - center[1]], out),
    )
}

/// Result of matching a 1D stack against the two-branch cones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub k: usize,
    pub reflected: bool,
    pub residual: f64,
}

/// Default tolerance for [`classify_1d`]: `10 h` times the largest cone slope for `n`.
pub fn classify_tolerance(grid: &Grid, n: usize) -> f64 {
    let slope = (1..n)
        .filter_map(|k| one_d_slopes(n, k).ok())
        .map(|s| s.a.max(s.b))
        .fold(0.0, f64::max);
    10.0 * grid.h(0) * slope
}

/// Identify a sampled 1D stack (vertex at 0) as one of the cones `U_{0,k}` or
/// their reflections. The candidate with the smallest least-squares misfit is
/// accepted when its sup-norm residual is within `tol`.
pub fn classify_1d(stack: &MembraneStack, tol: f64) -> Result<Option<Classification>> {
    let grid = stack.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: grid.dim(),
        });
    }
    let n = stack.n_membranes();
    let avg = stack.average();
    let drift = avg.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if drift * n as f64 > tol {
        return Err(Error::InvalidArgument(format!(
            "stack does not have zero average (sup |Σu| = {:e})",
            drift * n as f64
        )));
    }
    let mut best: Option<(f64, Classification)> = None;
    let mut cone = vec![0.0; n];
    for k in 1..n {
        for reflected in [false, true] {
            let spec = ConeSpec::OneD { n, k, reflected };
            let (mut l2, mut sup) = (0.0, 0.0f64);
            for node in 0..grid.node_count() {
                spec.evaluate_into(grid.node_point(node), &mut cone);
                for (u, c) in stack.node(node).iter().zip(&cone) {
                    let d = u - c;
                    l2 += d * d;
                    sup = sup.max(d.abs());
                }
            }
            let cand = Classification {
                k,
                reflected,
                residual: sup,
            };
            if best.as_ref().is_none_or(|(b, _)| l2 < *b) {
                best = Some((l2, cand));
            }
        }
    }
    Ok(best.map(|(_, c)| c).filter(|c| c.residual <= tol))
}

impl fmt::Display for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeSpec::OneD { n, k, reflected } => {
                write!(f, "oned N={n} k={k} reflected={reflected}")
            }
            ConeSpec::V0 { rotation } => write!(f, "v0 rot={rotation}"),
            ConeSpec::Vs { rotation } => write!(f, "vs rot={rotation}"),
            ConeSpec::TripleCritical => write!(f, "triple"),
            ConeSpec::Explicit1D => write!(f, "explicit1d"),
        }
    }
}

impl FromStr for ConeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let kind = words
            .next()
            .ok_or_else(|| Error::Parse("empty cone spec".into()))?
            .to_ascii_lowercase();
        let mut n = None;
        let mut k = None;
        let mut reflected = false;
        let mut rotation = 0.0;
        for w in words {
            let (key, value) = w
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{w}'")))?;
            let bad = |_| Error::Parse(format!("bad value in '{w}'"));
            match key.to_ascii_lowercase().as_str() {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad(()))?),
                "k" => k = Some(value.parse::<usize>().map_err(|_| bad(()))?),
                "reflected" => reflected = value.parse::<bool>().map_err(|_| bad(()))?,
                "rot" => rotation = value.parse::<f64>().map_err(|_| bad(()))?,
                other => return Err(Error::Parse(format!("unknown cone key '{other}'"))),
            }
        }
        let spec = match kind.as_str() {
            "oned" => ConeSpec::OneD {
                n: n.ok_or_else(|| Error::Parse("oned needs N=".into()))?,
                k: k.ok_or_else(|| Error::Parse("oned needs k=".into()))?,
                reflected,
            },
            "v0" => ConeSpec::V0 { rotation },
            "vs" => ConeSpec::Vs { rotation },
            "triple" => ConeSpec::TripleCritical,
            "explicit1d" => ConeSpec::Explicit1D,
            other => return Err(Error::Parse(format!("unknown cone kind '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for ConeSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConeSpec> for String {
    fn from(c: ConeSpec) -> String {
        c.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slopes_examples() {
        let s = one_d_slopes(3, 1).unwrap();
        assert_relative_eq!(s.a, (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.b, (1.0f64 / 6.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.a, 0.816497, epsilon = 1e-6);
        assert_relative_eq!(s.b, 0.408248, epsilon = 1e-6);
        let s = one_d_slopes(2, 1).unwrap();
        assert_relative_eq!(s.a, 0.707107, epsilon = 1e-6);
        assert_relative_eq!(s.b, s.a, epsilon = 1e-15);
        let s = one_d_slopes(4, 2).unwrap();
        assert_relative_eq!(s.a, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.b, 0.5, epsilon = 1e-15);
        assert!(one_d_slopes(3, 0).is_err());
        assert!(one_d_slopes(3, 3).is_err());
    }

    #[test]
    fn slope_constraints_hold_for_all_n_k() {
        for n in 2..12 {
            for k in 1..n {
                let s = one_d_slopes(n, k).unwrap();
                let (nf, kf) = (n as f64, k as f64);
                assert!((kf * s.a - (nf - kf) * s.b).abs() < 1e-15);
                assert!((kf * s.a * s.a + (nf - kf) * s.b * s.b - 1.0).abs() < 1e-15);
            }
        }
    }

    /// The coefficients `1/k - 1/N` and `1/(N-k) - 1/N` violate both the
    /// zero-average and the unit-density identity unless `k = N/2`.
    #[test]
    fn printed_coefficients_are_inconsistent() {
        let printed = |n: f64, k: f64| (1.0 / k - 1.0 / n, 1.0 / (n - k) - 1.0 / n);
        let (a, b) = printed(3.0, 1.0);
        let average = 1.0 * a - 2.0 * b;
        let density = a * a + 2.0 * b * b;
        assert!(average.abs() > 0.1, "zero average unexpectedly holds");
        assert!((density - 1.0).abs() > 0.1, "unit density unexpectedly holds");
        // the normalized slopes agree with the printed ones only in the symmetric split
        let (a, b) = printed(4.0, 2.0);
        assert!((2.0 * a - 2.0 * b).abs() < 1e-15);
        assert!((2.0 * a * a + 2.0 * b * b - 1.0).abs() > 0.1);
    }

    #[test]
    fn v0_branch_values() {
        let v0 = ConeSpec::V0 { rotation: 0.0 };
        let t = PI / 6.0;
        let u = v0.evaluate(&[t.cos(), t.sin()]).unwrap();
        assert_relative_eq!(u[0], (1.0f64 / 6.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(u[0], u[1], epsilon = 1e-15);
        // inside the coincidence sector everything vanishes
        let u = v0.evaluate(&[-1.0, 0.1]).unwrap();
        assert_eq!(u, vec![0.0, 0.0, 0.0]);
    }

    /// Piecewise sector definition of `v_{0,1}` as an independent oracle.
    fn v0_piecewise(x: Point) -> f64 {
        let theta = x[1].atan2(x[0]);
        let e = |t: f64| [t.cos(), t.sin()];
        let dot = |a: Point, b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        if (-2.0 * PI / 3.0..=PI / 6.0).contains(&theta) {
            (2.0f64 / 3.0).sqrt() * dot(x, e(-PI / 6.0))
        } else if (PI / 6.0..=2.0 * PI / 3.0).contains(&theta) {
            (1.0f64 / 6.0).sqrt() * dot(x, e(PI / 6.0))
        } else {
            0.0
        }
    }

    #[test]
    fn v0_matches_sector_definition_and_invariants() {
        let v0 = ConeSpec::V0 { rotation: 0.0 };
        for i in 0..720 {
            let t = -PI + (i as f64 + 0.37) * PI / 360.0;
            let r = 0.3 + 0.5 * ((i * 7) % 11) as f64 / 11.0;
            let x = [r * t.cos(), r * t.sin()];
            let u = v0.evaluate(&x).unwrap();
            assert!((u[0] - v0_piecewise(x)).abs() < 1e-14, "theta {t}");
            assert!((u[2] + v0_piecewise([x[0], -x[1]])).abs() < 1e-14);
            assert!(u[0] >= u[1] && u[1] >= u[2]);
            assert!((u[0] + u[1] + u[2]).abs() < 1e-14);
        }
        // continuity across θ = π/6
        let t = PI / 6.0;
        let a = v0.evaluate(&[(t - 1e-9).cos(), (t - 1e-9).sin()]).unwrap();
        let b = v0.evaluate(&[(t + 1e-9).cos(), (t + 1e-9).sin()]).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-8);
    }

    #[test]
    fn vs_value_and_structure() {
        let vs = ConeSpec::Vs { rotation: 0.0 };
        let u = vs.evaluate(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(u[0], 0.316228, epsilon = 1e-6);
        assert_relative_eq!(u[0], 1.0 / 10f64.sqrt(), epsilon = 1e-15);
        assert!((u.iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn triple_and_explicit_values() {
        let t = ConeSpec::TripleCritical.evaluate(&[-1.0]).unwrap();
        assert_eq!(t, vec![0.0, 0.0, 0.0]);
        let e = explicit_1d_minimizer(1.0);
        assert!((e[0] - 1.0).abs() < 1e-15 && e[1].abs() < 1e-15 && (e[2] + 1.0).abs() < 1e-15);
        assert_eq!(explicit_1d_minimizer(-1.0), [0.0, 0.0, 0.0]);
        let e = explicit_1d_minimizer(0.0);
        let expected = EXPLICIT_LAMBDA * (1.5f64.sqrt() - 1.0);
        assert_relative_eq!(e[0], expected, epsilon = 1e-15);
        assert_relative_eq!(e[0], 0.183503, epsilon = 1e-6);
        assert_relative_eq!(e[1], -e[0] / 2.0, epsilon = 1e-15);
        assert_relative_eq!(e[2], -e[0] / 2.0, epsilon = 1e-15);
        assert_relative_eq!(explicit_kink_1(), -0.224745, epsilon = 1e-6);
        assert_relative_eq!(explicit_kink_2(), 0.292893, epsilon = 1e-6);
    }

    #[test]
    fn explicit_equipartition_and_slope_jumps() {
        let (l, m) = (EXPLICIT_LAMBDA, EXPLICIT_MU);
        // triple split: slopes λ, -λ/2, -λ/2 around the mean 0
        assert!((1.5 * l * l - 1.0).abs() < 1e-15);
        // pair split: ±μ around the pair mean
        assert!((2.0 * m * m - 1.0).abs() < 1e-15);
        // the top membrane jumps by λ, bounded by 1/√1
        assert!(l <= 1.0);
        // the splitting pair's upper member jumps by μ = 1/√2
        assert!(m >= 0.0 && m <= 1.0 / 2f64.sqrt() + 1e-15);
    }

    #[test]
    fn cone_energies() {
        assert_relative_eq!(
            ConeSpec::OneD { n: 3, k: 1, reflected: false }.cone_energy().unwrap(),
            1.570796,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            ConeSpec::V0 { rotation: 0.3 }.cone_energy().unwrap(),
            2.617994,
            epsilon = 1e-6
        );
        assert!(ConeSpec::Explicit1D.cone_energy().is_err());
    }

    #[test]
    fn text_form_round_trip() {
        for s in [
            "oned N=3 k=1 reflected=false",
            "v0 rot=0.5236",
            "vs rot=-0.25",
            "triple",
            "explicit1d",
        ] {
            let spec: ConeSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("oned N=3 k=3".parse::<ConeSpec>().is_err());
        assert!("v0 angle=1".parse::<ConeSpec>().is_err());
        assert!("hexagon".parse::<ConeSpec>().is_err());
    }

    #[test]
    fn sample_cone_respects_dimension_and_vertex() {
        let g1 = Grid::line(-1.0, 1.0, 64).unwrap();
        let g2 = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (16, 16)).unwrap();
        assert!(sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &g1, [0.0, 0.0]).is_err());
        assert!(sample_cone(&ConeSpec::Explicit1D, &g2, [0.0, 0.0]).is_err());
        let s = sample_cone(&ConeSpec::OneD { n: 3, k: 1, reflected: false }, &g1, [0.0, 0.0])
            .unwrap();
        assert_relative_eq!(s.get(64, 0), 0.816497, epsilon = 1e-6);
        assert_eq!(s.node(32), &[0.0, 0.0, 0.0]);
        let s = sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &g2, [0.0, 0.0]).unwrap();
        assert_eq!(s.node(g2.index(8, 8)), &[0.0, 0.0, 0.0]);
        for node in 0..g2.node_count() {
            let p = g2.node_point(node);
            let theta = p[1].atan2(p[0]).rem_euclid(2.0 * PI);
            if theta > 2.0 * PI / 3.0 + 1e-12 && theta < 4.0 * PI / 3.0 - 1e-12 {
                assert_eq!(s.node(node), &[0.0, 0.0, 0.0]);
            }
        }
    }

    #[test]
    fn classify_examples() {
        let g = Grid::line(-1.0, 1.0, 64).unwrap();
        let tol = classify_tolerance(&g, 4);
        let s = sample_cone(&ConeSpec::OneD { n: 4, k: 2, reflected: false }, &g, [0.0, 0.0])
            .unwrap();
        let c = classify_1d(&s, tol).unwrap().unwrap();
        assert_eq!((c.k, c.reflected), (2, false));
        assert!(c.residual < 1e-15);

        let s = sample_cone(&ConeSpec::OneD { n: 3, k: 1, reflected: true }, &g, [0.0, 0.0])
            .unwrap();
        let c = classify_1d(&s, classify_tolerance(&g, 3)).unwrap().unwrap();
        assert_eq!((c.k, c.reflected), (1, true));

        let s = sample_cone(&ConeSpec::TripleCritical, &g, [0.0, 0.0]).unwrap();
        assert!(classify_1d(&s, classify_tolerance(&g, 3)).unwrap().is_none());
    }

    /// Residuals of the triple junction against every two-branch cone, computed
    /// at x = 1 where they are largest.
    #[test]
    fn triple_residuals_exceed_tolerance() {
        let g = Grid::line(-1.0, 1.0, 64).unwrap();
        let tol = classify_tolerance(&g, 3);
        let triple = [1.0, 0.0, -1.0];
        for k in 1..3 {
            for reflected in [false, true] {
                let c = ConeSpec::OneD { n: 3, k, reflected }.evaluate(&[1.0]).unwrap();
                let r = triple
                    .iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(r > tol, "k={k} reflected={reflected}: {r}");
            }
        }
    }

    #[test]
    fn homogeneity() {
        let spec = ConeSpec::Vs { rotation: 0.4 };
        let x = [0.3, -0.7];
        let base = spec.evaluate(&x).unwrap();
        for s in [0.1, 2.0, 7.5] {
            let scaled = spec.evaluate(&[s * x[0], s * x[1]]).unwrap();
            for (a, b) in scaled.iter().zip(&base) {
                assert!((a - s * b).abs() <= 1e-12 * (1.0 + (s * b).abs()));
            }
        }
    }
}
