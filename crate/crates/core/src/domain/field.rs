use super::grid::{Grid, Point};
use crate::{Error, Result};

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node, membrane: 0 });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..grid.node_count()).map(|n| f(grid.node_point(n))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.node_count()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, p: Point) -> f64 {
        self.grid.interpolate(&self.values, 1, 0, p)
    }
}

/// `N` ordered scalar fields `u_1 ≥ u_2 ≥ … ≥ u_N` sharing one grid.
///
/// Values are stored node-major: the `N` heights of a node are contiguous,
/// which keeps the node-wise projection and gap evaluations local.
#[derive(Debug, Clone, PartialEq)]
pub struct MembraneStack {
    grid: Grid,
    n: usize,
    values: Vec<f64>,
    feasibility_tol: f64,
}

impl MembraneStack {
    /// Ordering slack for closed-form samples.
    pub const CLOSED_FORM_TOL: f64 = 1e-12;
    /// Ordering slack for solver output.
    pub const SOLVER_TOL: f64 = 1e-9;

    /// Node-major values; validates shape, finiteness and ordering.
    pub fn new(grid: Grid, n: usize, values: Vec<f64>, feasibility_tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a stack needs at least 2 membranes, got {n}"
            )));
        }
        if !(feasibility_tol >= 0.0) {
            return Err(Error::InvalidArgument(
                "feasibility tolerance must be nonnegative".into(),
            ));
        }
        if values.len() != n * grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "stack has {} values, expected {} x {}",
                values.len(),
                n,
                grid.node_count()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                node: k / n,
                membrane: k % n + 1,
            });
        }
        let stack = Self {
            grid,
            n,
            values,
            feasibility_tol,
        };
        stack.check_ordering(feasibility_tol)?;
        Ok(stack)
    }

    pub fn zeros(grid: Grid, n: usize) -> Result<Self> {
        Self::new(grid, n, vec![0.0; n * grid.node_count()], Self::CLOSED_FORM_TOL)
    }

    /// Evaluate `f(point, out)` at every node.
    pub fn from_fn(
        grid: Grid,
        n: usize,
        feasibility_tol: f64,
        mut f: impl FnMut(Point, &mut [f64]),
    ) -> Result<Self> {
        let mut values = vec![0.0; n * grid.node_count()];
        for (node, chunk) in values.chunks_mut(n).enumerate() {
            f(grid.node_point(node), chunk);
        }
        Self::new(grid, n, values, feasibility_tol)
    }

    pub fn from_fields(fields: &[ScalarField], feasibility_tol: f64) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidArgument("no fields".into()))?;
        let grid = *first.grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::InvalidArgument(
                "all membranes must share one grid".into(),
            ));
        }
        let n = fields.len();
        let mut values = vec![0.0; n * grid.node_count()];
        for (i, f) in fields.iter().enumerate() {
            for (node, v) in f.values().iter().enumerate() {
                values[node * n + i] = *v;
            }
        }
        Self::new(grid, n, values, feasibility_tol)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_membranes(&self) -> usize {
        self.n
    }

    pub fn feasibility_tol(&self) -> f64 {
        self.feasibility_tol
    }

    /// Node-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Heights `(u_1, …, u_N)` at a node.
    #[inline]
    pub fn node(&self, node: usize) -> &[f64] {
        &self.values[node * self.n..(node + 1) * self.n]
    }

    /// `u_i` at a node, `i` zero-based.
    #[inline]
    pub fn get(&self, node: usize, i: usize) -> f64 {
        self.values[node * self.n + i]
    }

    /// Gap `u_i - u_{i+1}` at a node, `i` zero-based in `0..N-1`.
    #[inline]
    pub fn gap(&self, node: usize, i: usize) -> f64 {
        self.values[node * self.n + i] - self.values[node * self.n + i + 1]
    }

    /// Membrane `i` (zero-based) as a scalar field.
    pub fn field(&self, i: usize) -> ScalarField {
        let values = self.values.iter().skip(i).step_by(self.n).copied().collect();
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn fields(&self) -> Vec<ScalarField> {
        (0..self.n).map(|i| self.field(i)).collect()
    }

    /// Nodal average `(Σ u_i) / N`.
    pub fn average(&self) -> ScalarField {
        let values = self
            .values
            .chunks(self.n)
            .map(|c| c.iter().sum::<f64>() / self.n as f64)
            .collect();
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    /// The stack with its nodal average subtracted from every membrane.
    pub fn zero_average(&self) -> Self {
        let n = self.n;
        let mut values = self.values.clone();
        for chunk in values.chunks_mut(n) {
            let m = chunk.iter().sum::<f64>() / n as f64;
            chunk.iter_mut().for_each(|v| *v -= m);
        }
        Self { values, ..*self }
    }

    /// Interpolated heights at an arbitrary point of the domain.
    pub fn at(&self, p: Point) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.grid.interpolate(&self.values, self.n, i, p))
            .collect()
    }

    /// Sup-norm of the difference to another stack on the same grid.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid || self.n != other.n {
            return Err(Error::InvalidArgument("stacks are not comparable".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_ordering(&self, tol: f64) -> Result<()> {
        for (node, chunk) in self.values.chunks(self.n).enumerate() {
            for i in 0..self.n - 1 {
                let gap = chunk[i] - chunk[i + 1];
                if gap < -tol {
                    return Err(Error::OrderingViolated {
                        node,
                        upper: i + 1,
                        lower: i + 2,
                        gap,
                    });
                }
            }
        }
        Ok(())
    }

    /// Largest ordering violation `max(u_{i+1} - u_i, 0)` over all nodes.
    pub fn ordering_violation(&self) -> f64 {
        self.values
            .chunks(self.n)
            .flat_map(|c| c.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Replace the values, keeping grid and `N`; validates with the same tolerance.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid, self.n, values, self.feasibility_tol)
    }

    pub fn with_tolerance(self, feasibility_tol: f64) -> Result<Self> {
        Self::new(self.grid, self.n, self.values, feasibility_tol)
    }

    /// Add the same scalar field to every membrane.
    pub fn shifted(&self, psi: &ScalarField) -> Result<Self> {
        if *psi.grid() != self.grid {
            return Err(Error::InvalidArgument("shift field on another grid".into()));
        }
        let mut values = self.values.clone();
        for (chunk, s) in values.chunks_mut(self.n).zip(psi.values()) {
            chunk.iter_mut().for_each(|v| *v += s);
        }
        self.with_values(values)
    }
}
