//! Piecewise linear discretization of the angular forms and the Q functional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SectorGeometry;
use crate::{Error, Result};

/// Coarsest accepted angular mesh.
pub const MIN_INTERVALS: usize = 64;

const MAX_ITERATIONS: usize = 5_000;
const VECTOR_TOL: f64 = 1e-12;

/// Symmetric band matrix, lower band stored row by row.
#[derive(Debug, Clone)]
struct Band {
    n: usize,
    width: usize,
    data: Vec<f64>,
}

impl Band {
    fn new(n: usize, width: usize) -> Self {
        Self {
            n,
            width,
            data: vec![0.0; n * (width + 1)],
        }
    }

    /// Entry `(i, j)` with `j ≤ i ≤ j + width`.
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        &mut self.data[i * (self.width + 1) + (i - j)]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.width {
            0.0
        } else {
            self.data[i * (self.width + 1) + (i - j)]
        }
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let d = self.data[i * (self.width + 1)];
            y[i] += d * x[i];
            for k in 1..=self.width.min(i) {
                let v = self.data[i * (self.width + 1) + k];
                y[i] += v * x[i - k];
                y[i - k] += v * x[i];
            }
        }
        y
    }

    fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    fn add(&self, other: &Band) -> Band {
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(&other.data) {
            *o += v;
        }
        out
    }

    /// Cholesky factor in the same band layout.
    fn cholesky(&self) -> Result<Band> {
        let mut l = Band::new(self.n, self.width);
        for i in 0..self.n {
            for j in i.saturating_sub(self.width)..=i {
                let mut s = self.get(i, j);
                for k in i.saturating_sub(self.width)..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::InvalidArgument("form is not positive definite".into()));
                    }
                    *l.at(i, i) = s.sqrt();
                } else {
                    *l.at(i, j) = s / l.get(j, j);
                }
            }
        }
        Ok(l)
    }

    /// Solve `L Lᵀ x = b` with `self = L`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for i in 0..self.n {
            for k in i.saturating_sub(self.width)..i {
                y[i] -= self.get(i, k) * y[k];
            }
            y[i] /= self.get(i, i);
        }
        for i in (0..self.n).rev() {
            for k in i + 1..=(i + self.width).min(self.n - 1) {
                y[i] -= self.get(k, i) * y[k];
            }
            y[i] /= self.get(i, i);
        }
        y
    }
}

/// Uniform P1 mesh of the union arc `(−b, b)` with the stiffness and mass
/// forms of the transmission problem. Each interval belongs to `S₁`, `S₃`
/// or both according to its midpoint.
#[derive(Debug, Clone)]
pub struct QFunctionalMesh {
    pub geometry: SectorGeometry,
    pub intervals: usize,
    /// Node angles.
    pub theta: Vec<f64>,
    /// Per interval: `(in S₁, in S₃)`.
    pub membership: Vec<(bool, bool)>,
    /// Per node: degrees of freedom of `w₁` and `w₃`.
    dofs: Vec<(Option<usize>, Option<usize>)>,
    stiffness: Band,
    mass: Band,
}

impl QFunctionalMesh {
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals < MIN_INTERVALS {
            return Err(Error::InvalidArgument(format!(
                "angular mesh needs at least {MIN_INTERVALS} intervals, got {intervals}"
            )));
        }
        let geometry = SectorGeometry::default();
        let (lo, hi) = (-geometry.b, geometry.b);
        let d = (hi - lo) / intervals as f64;
        let theta: Vec<f64> = (0..=intervals).map(|j| lo + j as f64 * d).collect();
        let (s1, s3) = (geometry.s1_arc(), geometry.s3_arc());
        let membership: Vec<(bool, bool)> = (0..intervals)
            .map(|j| {
                let m = lo + (j as f64 + 0.5) * d;
                (m > s1.0 && m < s1.1, m > s3.0 && m < s3.1)
            })
            .collect();
        let mut dofs = vec![(None, None); intervals + 1];
        let mut next = 0;
        for (j, slot) in dofs.iter_mut().enumerate() {
            let touches = |f: fn(&(bool, bool)) -> bool| {
                (j > 0 && f(&membership[j - 1])) || (j < intervals && f(&membership[j]))
            };
            if touches(|m| m.0) {
                slot.0 = Some(next);
                next += 1;
            }
            if touches(|m| m.1) {
                slot.1 = Some(next);
                next += 1;
            }
        }
        let mut stiffness = Band::new(next, 3);
        let mut mass = Band::new(next, 3);
        let ek = [[1.0 / d, -1.0 / d], [-1.0 / d, 1.0 / d]];
        let em = [[d / 3.0, d / 6.0], [d / 6.0, d / 3.0]];
        for (j, &(in1, in3)) in membership.iter().enumerate() {
            // coupling between the w₁ and w₃ components on this interval
            let c = match (in1, in3) {
                (true, true) => [[2.0, -1.0], [-1.0, 2.0]],
                (true, false) => [[1.5, 0.0], [0.0, 0.0]],
                (false, true) => [[0.0, 0.0], [0.0, 1.5]],
                (false, false) => continue,
            };
            let comp = |node: usize, f: usize| if f == 0 { dofs[node].0 } else { dofs[node].1 };
            for (fa, row) in c.iter().enumerate() {
                for (fb, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for a in 0..2 {
                        for b in 0..2 {
                            let (Some(p), Some(q)) = (comp(j + a, fa), comp(j + b, fb)) else {
                                continue;
                            };
                            if p >= q {
                                *stiffness.at(p, q) += w * ek[a][b];
                                *mass.at(p, q) += w * em[a][b];
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            geometry,
            intervals,
            theta,
            membership,
            dofs,
            stiffness,
            mass,
        })
    }

    pub fn dof_count(&self) -> usize {
        self.mass.n
    }

    /// `⟨∇W, ∇W⟩` and `⟨W, W⟩` of nodal values `(w₁, w₃)` on the union mesh.
    pub fn forms(&self, w1: impl Fn(f64) -> f64, w3: impl Fn(f64) -> f64) -> (f64, f64) {
        let mut x = vec![0.0; self.dof_count()];
        for (j, &(a, b)) in self.dofs.iter().enumerate() {
            if let Some(a) = a {
                x[a] = w1(self.theta[j]);
            }
            if let Some(b) = b {
                x[b] = w3(self.theta[j]);
            }
        }
        (self.stiffness.dot(&x, &x), self.mass.dot(&x, &x))
    }

    /// The `k` smallest eigenvalues of `K x = λ M x`, with multiplicity.
    ///
    /// Each eigenpair comes from inverse iteration with `K + M`, restricted to
    /// the `M`-orthogonal complement of the pairs found before it.
    pub fn eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if k > self.dof_count() {
            return Err(Error::InvalidArgument(format!(
                "mesh has only {} degrees of freedom",
                self.dof_count()
            )));
        }
        let factor = self.stiffness.add(&self.mass).cholesky()?;
        let n = self.dof_count();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut values = Vec::with_capacity(k);
        for idx in 0..k {
            let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            self.deflate(&mut x, &vectors);
            for _ in 0..MAX_ITERATIONS {
                let mut y = factor.solve(&self.mass.mul(&x));
                self.deflate(&mut y, &vectors);
                let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
                let change = self.mass.dot(&diff, &diff).sqrt();
                x = y;
                if change <= VECTOR_TOL {
                    break;
                }
            }
            values.push(self.stiffness.dot(&x, &x));
            vectors.push(x);
        }
        Ok(values)
    }

    /// Remove the `M`-components along `basis` and normalize in `M`.
    fn deflate(&self, x: &mut [f64], basis: &[Vec<f64>]) {
        for _ in 0..2 {
            for v in basis {
                let c = self.mass.dot(v, x);
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi -= c * vi;
                }
            }
        }
        let norm = self.mass.dot(x, x).sqrt();
        for xi in x.iter_mut() {
            *xi /= norm;
        }
    }
}

/// `λ_k` of the discrete angular problem on a mesh of `intervals` intervals.
pub fn rayleigh_eigen(k: usize, intervals: usize) -> Result<f64> {
    let values = QFunctionalMesh::new(intervals)?.eigenvalues(k)?;
    Ok(values[k - 1])
}

/// `Q(r^p w₁(θ), r^p w₃(θ))` on the unit sectors.
///
/// `w1` samples `S₁ = (−b, a)` and `w3` samples `S₃ = (−a, b)` on uniform
/// meshes with the same spacing, so the overlap `(−a, a)` spans whole
/// intervals of both. With `∫₀¹ r^{2p−1} dr = 1/(2p)` the radial integral is
/// exact; the angular terms use the piecewise linear interpolant for `|w'|²`
/// and the trapezoid rule for `|w|²`. For `p = 0` the result is `0` when the
/// angular derivatives vanish and `+∞` otherwise.
pub fn q_energy(w1: &[f64], w3: &[f64], p: f64) -> Result<f64> {
    let n = w1.len();
    if n != w3.len() || n < 6 || (n - 1) % 5 != 0 {
        return Err(Error::InvalidArgument(format!(
            "sector meshes must have equal length 5m + 1, got {} and {}",
            w1.len(),
            w3.len()
        )));
    }
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("radial power must be nonnegative, got {p}")));
    }
    let g = SectorGeometry::default();
    let m = n - 1;
    let d = (g.a + g.b) / m as f64;
    // S₁ index of −a and the number of overlap intervals
    let shift = 3 * m / 5;
    let overlap = 2 * m / 5;
    let (mut grad, mut mass) = (0.0, 0.0);
    let trap = |f: &dyn Fn(usize) -> f64, j: usize| 0.5 * d * (f(j) + f(j + 1));
    let slope = |w: &[f64], j: usize| (w[j + 1] - w[j]) / d;
    for j in 0..m {
        // interval j of S₁ and of S₃
        let in_overlap_1 = j >= shift;
        let in_overlap_3 = j < overlap;
        if !in_overlap_1 {
            grad += 1.5 * d * slope(w1, j).powi(2);
            mass += 1.5 * trap(&|i| w1[i] * w1[i], j);
        }
        if !in_overlap_3 {
            grad += 1.5 * d * slope(w3, j).powi(2);
            mass += 1.5 * trap(&|i| w3[i] * w3[i], j);
        }
        if in_overlap_1 {
            let k = j - shift;
            let (s1, s3) = (slope(w1, j), slope(w3, k));
            grad += d * (s1 * s1 + s3 * s3 + (s1 - s3).powi(2));
            mass += trap(
                &|i| {
                    let (x, y) = (w1[i + shift], w3[i]);
                    x * x + y * y + (x - y) * (x - y)
                },
                k,
            );
        }
    }
    if p == 0.0 {
        return Ok(if grad == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((p * p * mass + grad) / (2.0 * p))
}
