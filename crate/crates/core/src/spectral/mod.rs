//! Transmission eigenproblem on two overlapping sectors.
//!
//! A pair `W = (w₁, w₃)` lives on the arcs `S₁ = (−b, a)` and `S₃ = (−a, b)`
//! with `a = π/6`, `b = 2π/3`. The angular quadratic form weighs `|w'|²` by
//! `3/2` off the overlap and couples the pair on it through
//! `|w₁'|² + |w₃'|² + |w₁' − w₃'|²`; the mass form has the same pattern.
//!
//! Eigenfunctions are `w₁ = μ₁ cos(√λ(θ + b))`, `w₃ = μ₃ cos(√λ(θ − b))`, and
//! with `t = √λ π/6` the eigenvalue condition reads `|sin 3t| = 2|sin 5t|`.
//! Dividing by `sin t` leaves `β² + 2β − 4 = ±(β + 2)` in `β = 4 cos 2t`,
//! so every root is available in closed form.

mod rayleigh;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use rayleigh::{q_energy, rayleigh_eigen, QFunctionalMesh, MIN_INTERVALS};

/// Half opening of the overlap and the outer arc end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorGeometry {
    pub a: f64,
    pub b: f64,
}

impl Default for SectorGeometry {
    fn default() -> Self {
        Self {
            a: PI / 6.0,
            b: 2.0 * PI / 3.0,
        }
    }
}

impl SectorGeometry {
    pub fn s1_arc(&self) -> (f64, f64) {
        (-self.b, self.a)
    }

    pub fn s3_arc(&self) -> (f64, f64) {
        (-self.a, self.b)
    }

    pub fn overlap(&self) -> (f64, f64) {
        (-self.a, self.a)
    }
}

/// Which quadratic in `β = 4 cos 2t` a root solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `β² + 2β − 4 = β + 2`, i.e. `sin 3t = 2 sin 5t`.
    Plus,
    /// `β² + 2β − 4 = −(β + 2)`, i.e. `sin 3t = −2 sin 5t`.
    Minus,
    /// `sin t = 0`: both sides vanish and the pair decouples.
    Kernel,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
            Branch::Kernel => "0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRoot {
    /// Position of the first copy in the eigenvalue list `λ₁ ≤ λ₂ ≤ …`.
    pub index: usize,
    pub t: f64,
    pub lambda: f64,
    pub branch: Branch,
    pub multiplicity: usize,
    /// `(μ₁, μ₃)`; the first basis pair `(1, 0)` for double roots.
    pub amplitudes: (f64, f64),
}

impl SpectralRoot {
    fn new(index: usize, t: f64, branch: Branch) -> Self {
        let s = 6.0 * t / PI;
        let (multiplicity, amplitudes) = match branch {
            Branch::Kernel => (2, (1.0, 0.0)),
            Branch::Plus => (1, (1.0, -1.0)),
            Branch::Minus => (1, (1.0, 1.0)),
        };
        Self {
            index,
            t,
            lambda: s * s,
            branch,
            multiplicity,
            amplitudes,
        }
    }

    pub fn sqrt_lambda(&self) -> f64 {
        6.0 * self.t / PI
    }

    /// `β = 4 cos 2t`.
    pub fn beta(&self) -> f64 {
        4.0 * (2.0 * self.t).cos()
    }

    /// `(w₁(θ), w₃(θ))` from the closed-form eigenfunctions.
    pub fn eigenfunction(&self, theta: f64) -> (f64, f64) {
        let (s, b) = (self.sqrt_lambda(), SectorGeometry::default().b);
        (
            self.amplitudes.0 * (s * (theta + b)).cos(),
            self.amplitudes.1 * (s * (theta - b)).cos(),
        )
    }

    /// `(w₁'(θ), w₃'(θ))`.
    pub fn derivative(&self, theta: f64) -> (f64, f64) {
        let (s, b) = (self.sqrt_lambda(), SectorGeometry::default().b);
        (
            -self.amplitudes.0 * s * (s * (theta + b)).sin(),
            -self.amplitudes.1 * s * (s * (theta - b)).sin(),
        )
    }
}

/// Distinct roots in `[0, π)`, increasing, with their branches.
fn base_roots() -> Vec<(f64, Branch)> {
    let s17 = 17f64.sqrt();
    let mut out = vec![(0.0, Branch::Kernel)];
    // β = 2 and β = −3 solve the plus branch, β = (−3 ± √17)/2 the minus branch
    for (c, branch) in [
        (0.5, Branch::Plus),
        (-0.75, Branch::Plus),
        ((s17 - 3.0) / 8.0, Branch::Minus),
        ((-3.0 - s17) / 8.0, Branch::Minus),
    ] {
        let t = 0.5 * f64::acos(c);
        out.push((t, branch));
        out.push((PI - t, branch));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// The first `count` distinct roots of `|sin 3t| = 2|sin 5t|` in increasing `t`.
pub fn eigen_roots(count: usize) -> Vec<SpectralRoot> {
    let base = base_roots();
    let mut out = Vec::with_capacity(count);
    let mut index = 1;
    'periods: for period in 0.. {
        for &(t, branch) in &base {
            if out.len() == count {
                break 'periods;
            }
            let root = SpectralRoot::new(index, t + period as f64 * PI, branch);
            index += root.multiplicity;
            out.push(root);
        }
    }
    out
}

/// `α₀ = √λ₄ − 1` with `cos(π/3 · √λ₄) = (√17 − 3)/8`.
pub fn alpha0() -> f64 {
    f64::acos((17f64.sqrt() - 3.0) / 8.0) * 3.0 / PI - 1.0
}

/// Residuals of the interface conditions of an eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingResiduals {
    /// `w₁'(−a) − 2 w₃'(−a)`.
    pub at_minus_a: f64,
    /// `w₃'(a) − 2 w₁'(a)`.
    pub at_plus_a: f64,
    /// `(3/2) w₁'(−a)₋ + w₃'(−a)₊ − 2 w₁'(−a)₊`.
    pub flux: f64,
}

impl MatchingResiduals {
    pub fn max_abs(&self) -> f64 {
        self.at_minus_a.abs().max(self.at_plus_a.abs()).max(self.flux.abs())
    }
}

/// Interface residuals of the closed-form pair of `root`; `w₁` is smooth
/// across `−a`, so its one-sided derivatives agree.
pub fn matching_check(root: &SpectralRoot) -> MatchingResiduals {
    let a = SectorGeometry::default().a;
    let (d1m, d3m) = root.derivative(-a);
    let (d1p, d3p) = root.derivative(a);
    MatchingResiduals {
        at_minus_a: d1m - 2.0 * d3m,
        at_plus_a: d3p - 2.0 * d1p,
        flux: 1.5 * d1m + d3m - 2.0 * d1m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_roots_per_period() {
        let r = eigen_roots(10);
        assert!(r[..9].iter().all(|x| x.t < PI));
        assert!((r[9].t - PI).abs() < 1e-15);
        assert_eq!(r.iter().map(|x| x.index).collect::<Vec<_>>(), [1, 3, 4, 5, 6, 7, 8, 9, 10, 11]);
    }

    #[test]
    fn roots_satisfy_their_branch() {
        for r in eigen_roots(40) {
            let (s3, s5) = ((3.0 * r.t).sin(), (5.0 * r.t).sin());
            assert!((s3.abs() - 2.0 * s5.abs()).abs() < 1e-12, "{r:?}");
            let b = r.beta();
            let lhs = b * b + 2.0 * b - 4.0;
            match r.branch {
                Branch::Plus => assert!((lhs - (b + 2.0)).abs() < 1e-12),
                Branch::Minus => assert!((lhs + (b + 2.0)).abs() < 1e-12),
                Branch::Kernel => assert!(r.t.sin().abs() < 1e-12),
            }
        }
    }

    #[test]
    fn first_roots() {
        let r = eigen_roots(5);
        assert_eq!((r[0].t, r[0].multiplicity), (0.0, 2));
        assert!((r[1].sqrt_lambda() - 1.0).abs() < 1e-14);
        // high-precision inversions of cos 2t = (√17 − 3)/8, −3/4, (−3 − √17)/8
        assert!((r[2].sqrt_lambda() - 1.365_494_824_855_043).abs() < 1e-14);
        assert!((r[3].sqrt_lambda() - 2.309_839_631_512_152).abs() < 1e-14);
        assert!((r[4].sqrt_lambda() - 2.548_701_148_619_793).abs() < 1e-14);
        assert!((1.0 + alpha0() - r[2].sqrt_lambda()).abs() < 1e-14);
    }

    #[test]
    fn listed_eigenpairs_match() {
        let r = eigen_roots(3);
        assert_eq!(r[1].amplitudes, (1.0, -1.0));
        assert_eq!(r[2].amplitudes, (1.0, 1.0));
        assert!(matching_check(&r[1]).max_abs() <= 1e-12);
        assert!(matching_check(&r[2]).max_abs() <= 1e-12);
        let bent = SpectralRoot {
            amplitudes: (1.0, -1.1),
            ..r[1]
        };
        assert!(matching_check(&bent).max_abs() > 1e-3);
    }
}
