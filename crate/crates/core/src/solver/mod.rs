//! Constrained minimization of the discrete energy.
//!
//! The sharp potential is replaced by its smoothstep relaxation with a width
//! `δ` that is annealed down to a grid-dependent floor. Each fixed-`δ` phase
//! runs accelerated projected gradient descent: a gradient step on
//! `dirichlet + smoothed potential`, node-wise isotonic projection, a
//! backtracking Armijo search along the projection arc, and momentum that is
//! reset whenever the energy would increase.
//!
//! Grids are solved coarse to fine. The coarsest level runs the whole
//! schedule; each finer level starts from the bilinear prolongation of the
//! coarser answer and re-anneals from four times its own floor down to it,
//! which lets free boundaries pinned by the coarse grid move again.
//!
//! The nodal average `Σ u_i / N` does not interact with the potential or the
//! ordering, so it is set once to the discrete harmonic extension of its
//! boundary values and every step preserves it.

mod harmonic;
mod isotonic;

pub use harmonic::{ball_mask, discrete_laplacian, harmonic_replacement, interior_mask};
pub use isotonic::{isotonic_project, isotonic_project_in_place, project_nodes};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryData, Grid, MembraneStack, Region, ScalarField};
use crate::energy::{EnergyReport, Functional, SmoothingSchedule};
use crate::reduce::tree_sum_by;
use crate::{Error, Result};

/// Multi-start settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiStart {
    pub runs: usize,
    /// Perturbation amplitude relative to the oscillation of the boundary data.
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for MultiStart {
    fn default() -> Self {
        Self {
            runs: 4,
            amplitude: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// First smoothing width.
    pub delta0: f64,
    /// Geometric factor between consecutive widths.
    pub ratio: f64,
    /// Smoothing floor; `2 · max_slope · h` when absent.
    pub delta_min: Option<f64>,
    /// Slope scale used for the floor; estimated from the boundary data when absent.
    pub max_slope: Option<f64>,
    /// Sharp threshold; half the floor when absent.
    pub tau: Option<f64>,
    /// First trial step relative to `1 / L`, with `L` the Lipschitz constant of the Dirichlet gradient.
    pub initial_step: f64,
    pub backtrack: f64,
    pub armijo: f64,
    /// Iteration cap per phase.
    pub max_iterations: usize,
    /// Stationarity tolerance (sup-norm of the projected gradient mapping).
    pub tolerance: f64,
    /// Number of grid levels; chosen so the coarsest level keeps at least 16 cells per axis when absent.
    pub levels: Option<usize>,
    pub multi_start: MultiStart,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            delta0: 0.25,
            ratio: 0.5,
            delta_min: None,
            max_slope: None,
            tau: None,
            initial_step: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            max_iterations: 20_000,
            tolerance: 1e-4,
            levels: None,
            multi_start: MultiStart::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta0", self.delta0),
            ("initial_step", self.initial_step),
            ("armijo", self.armijo),
            ("tolerance", self.tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        for (name, v) in [("ratio", self.ratio), ("backtrack", self.backtrack)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} must lie in (0, 1)")));
            }
        }
        for (name, v) in [
            ("delta_min", self.delta_min),
            ("max_slope", self.max_slope),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidArgument(format!("{name} must be positive")));
                }
            }
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument("tau must be nonnegative".into()));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        if self.multi_start.runs == 0 {
            return Err(Error::InvalidArgument("multi_start.runs must be at least 1".into()));
        }
        if !(self.multi_start.amplitude >= 0.0) {
            return Err(Error::InvalidArgument("multi_start.amplitude must be nonnegative".into()));
        }
        if self.levels == Some(0) {
            return Err(Error::InvalidArgument("levels must be at least 1".into()));
        }
        Ok(())
    }
}

/// Grid, number of membranes, Dirichlet data and the region carrying the energy.
///
/// With [`Region::Full`] the data is needed on the grid boundary only. Other
/// regions fix every node outside them, so the data must be defined there
/// (a cone or an explicit stack).
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub grid: Grid,
    pub n: usize,
    pub boundary: BoundaryData,
    pub region: Region,
}

impl Problem {
    pub fn new(grid: Grid, n: usize, boundary: BoundaryData) -> Self {
        Self {
            grid,
            n,
            boundary,
            region: Region::Full,
        }
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 membranes, got {}",
                self.n
            )));
        }
        match &self.boundary {
            BoundaryData::Explicit(s) => {
                if s.n_membranes() != self.n {
                    return Err(Error::InvalidArgument("explicit data has wrong N".into()));
                }
                if s.grid() != &self.grid {
                    return Err(Error::InvalidArgument(
                        "explicit data lives on another grid".into(),
                    ));
                }
            }
            other => other.check(&self.grid, self.n)?,
        }
        if self.region != Region::Full
            && !matches!(
                self.boundary,
                BoundaryData::Cone { .. } | BoundaryData::Explicit(_)
            )
        {
            return Err(Error::InvalidArgument(
                "a restricted region needs boundary data defined at every node".into(),
            ));
        }
        Ok(())
    }

    /// Data value at `node` of `grid` (a possibly coarsened copy of `self.grid`).
    fn data_at(&self, grid: &Grid, node: usize, out: &mut [f64]) {
        match &self.boundary {
            BoundaryData::Explicit(s) if s.grid() != grid => {
                let v = s.at(grid.node_point(node));
                out.copy_from_slice(&v);
            }
            data => data.value_at(grid, node, out),
        }
    }
}

/// Energies of one fixed-`δ` phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub level: usize,
    pub cells: Vec<usize>,
    pub delta: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Smoothed energy after each accepted iteration, starting with the initial value.
    pub energies: Vec<f64>,
}

/// Outcome of one multi-start run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub stack: MembraneStack,
    pub report: EnergyReport,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<PhaseTrace>,
    /// Index of the winning run; `None` when the initial stack itself was best.
    pub run: Option<usize>,
    pub runs: Vec<RunSummary>,
    pub schedule: SmoothingSchedule,
    pub initial_energy: f64,
}

impl SolveResult {
    /// Flat list of the smoothed energies of all phases.
    pub fn energies(&self) -> Vec<f64> {
        self.trace.iter().flat_map(|p| p.energies.iter().copied()).collect()
    }
}

/// Largest slope of the boundary gaps between neighbouring fixed nodes, at least 1.
pub fn boundary_slope(problem: &Problem) -> f64 {
    let g = &problem.grid;
    let n = problem.n;
    let fixed = fixed_mask(problem, g);
    let mut vals = vec![0.0; n * g.node_count()];
    for k in (0..g.node_count()).filter(|&k| fixed[k]) {
        problem.data_at(g, k, &mut vals[k * n..(k + 1) * n]);
    }
    let gap = |k: usize, i: usize| vals[k * n + i] - vals[k * n + i + 1];
    let mut slope = 1.0f64;
    for k in (0..g.node_count()).filter(|&k| fixed[k]) {
        let (i, j) = g.ij(k);
        let mut nbrs = Vec::with_capacity(2);
        if i + 1 < g.nx() {
            nbrs.push((k + 1, g.h(0)));
        }
        if g.dim() == 2 && j + 1 < g.ny() {
            nbrs.push((k + g.nx(), g.h(1)));
        }
        for (nb, h) in nbrs {
            if fixed[nb] {
                for m in 0..n - 1 {
                    slope = slope.max((gap(nb, m) - gap(k, m)).abs() / h);
                }
            }
        }
    }
    slope
}

fn fixed_mask(problem: &Problem, grid: &Grid) -> Vec<bool> {
    problem.region.free_nodes(grid).iter().map(|f| !f).collect()
}

/// The smoothing schedule `solve` would use for this problem and config.
pub fn schedule_for(problem: &Problem, cfg: &SolveConfig) -> Result<SmoothingSchedule> {
    let floor = match cfg.delta_min {
        Some(d) => d,
        None => {
            let slope = cfg.max_slope.unwrap_or_else(|| boundary_slope(problem));
            SmoothingSchedule::grid_floor(&problem.grid, slope)
        }
    };
    SmoothingSchedule::new(cfg.delta0.max(floor), cfg.ratio, floor)
}

fn level_count(grid: &Grid, cfg: &SolveConfig) -> usize {
    if let Some(l) = cfg.levels {
        return l;
    }
    let mut levels = 1;
    while let Some(c) = grid.coarsened(1 << levels) {
        if (0..c.dim()).any(|a| c.cells(a) < 16) {
            break;
        }
        levels += 1;
    }
    levels
}

/// Minimize the discrete energy for `problem`.
///
/// `init`, when given, must be a feasible stack on the problem grid; its
/// values on fixed nodes are replaced by the data. Otherwise each membrane's
/// data is extended harmonically and the result projected node-wise.
pub fn solve(
    problem: &Problem,
    init: Option<&MembraneStack>,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    problem.check()?;
    let grid = problem.grid;
    let n = problem.n;
    if let Some(s) = init {
        if s.grid() != &grid || s.n_membranes() != n {
            return Err(Error::InvalidArgument(
                "initial stack does not match the problem".into(),
            ));
        }
    }
    let schedule = schedule_for(problem, cfg)?;
    let tau = cfg.tau.unwrap_or_else(|| schedule.tau());
    let fine = Functional::new(grid, n, &problem.region)?;

    let mut start = match init {
        Some(s) => s.values().to_vec(),
        None => default_init(problem, &grid)?,
    };
    set_fixed(problem, &grid, fine.free_nodes(), &mut start);
    project_nodes(&mut start, n);
    let initial_report = fine.report(&start, tau, None, false);

    if is_degenerate(problem, &grid) {
        let stack = MembraneStack::new(grid, n, start, MembraneStack::SOLVER_TOL)?;
        return Ok(SolveResult {
            report: fine.report(stack.values(), tau, None, false),
            stack,
            iterations: 0,
            converged: true,
            trace: Vec::new(),
            run: Some(0),
            runs: Vec::new(),
            schedule,
            initial_energy: initial_report.total,
        });
    }

    let levels = level_count(&grid, cfg);
    let grids: Vec<Grid> = (0..levels)
        .rev()
        .map(|l| grid.coarsened(1 << l).expect("level count fits the grid"))
        .collect();
    let oscillation = boundary_oscillation(problem, &grid);

    let mut best: Option<(f64, usize, Vec<f64>, Vec<PhaseTrace>, usize, bool)> = None;
    let mut runs = Vec::new();
    for run in 0..cfg.multi_start.runs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.multi_start.seed);
        rng.set_stream(run as u64);
        let amplitude = if run == 0 {
            0.0
        } else {
            cfg.multi_start.amplitude * oscillation
        };
        let (values, trace) = run_levels(problem, &grids, &start, &schedule, cfg, amplitude, &mut rng)?;
        let energy = fine.report(&values, tau, None, false).total;
        let iterations = trace.iter().map(|p| p.iterations).sum();
        let converged = trace.last().is_some_and(|p| p.converged);
        runs.push(RunSummary {
            run,
            energy,
            iterations,
            converged,
        });
        if best.as_ref().is_none_or(|b| energy < b.0) {
            best = Some((energy, run, values, trace, iterations, converged));
        }
    }
    let (energy, run, values, trace, _, converged) = best.expect("at least one run");
    let total_iterations = runs.iter().map(|r| r.iterations).sum();
    let (values, run) = if initial_report.total < energy {
        (start, None)
    } else {
        (values, Some(run))
    };
    let stack = MembraneStack::new(grid, n, values, MembraneStack::SOLVER_TOL)?;
    Ok(SolveResult {
        report: fine.report(stack.values(), tau, Some(schedule.delta_min), false),
        stack,
        iterations: total_iterations,
        converged,
        trace,
        run,
        runs,
        schedule,
        initial_energy: initial_report.total,
    })
}

fn default_init(problem: &Problem, grid: &Grid) -> Result<Vec<f64>> {
    let n = problem.n;
    let free = problem.region.free_nodes(grid);
    let mut values = vec![0.0; n * grid.node_count()];
    set_fixed(problem, grid, &free, &mut values);
    for i in 0..n {
        let f = ScalarField::new(*grid, values.iter().skip(i).step_by(n).copied().collect())?;
        let h = harmonic_replacement(&f, &free)?;
        for (k, v) in h.values().iter().enumerate() {
            values[k * n + i] = *v;
        }
    }
    project_nodes(&mut values, n);
    Ok(values)
}

fn set_fixed(problem: &Problem, grid: &Grid, free: &[bool], values: &mut [f64]) {
    let n = problem.n;
    for k in (0..grid.node_count()).filter(|&k| !free[k]) {
        problem.data_at(grid, k, &mut values[k * n..(k + 1) * n]);
    }
}

fn is_degenerate(problem: &Problem, grid: &Grid) -> bool {
    let n = problem.n;
    let fixed = fixed_mask(problem, grid);
    let mut buf = vec![0.0; n];
    (0..grid.node_count()).filter(|&k| fixed[k]).all(|k| {
        problem.data_at(grid, k, &mut buf);
        buf.iter().all(|v| *v == buf[0])
    })
}

fn boundary_oscillation(problem: &Problem, grid: &Grid) -> f64 {
    let n = problem.n;
    let fixed = fixed_mask(problem, grid);
    let mut buf = vec![0.0; n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in (0..grid.node_count()).filter(|&k| fixed[k]) {
        problem.data_at(grid, k, &mut buf);
        for v in &buf {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    hi - lo
}

/// Sample fine values at the nodes of a coarser grid with the same extents.
fn restrict(fine: &Grid, coarse: &Grid, values: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * coarse.node_count()];
    for k in 0..coarse.node_count() {
        let p = coarse.node_point(k);
        for i in 0..n {
            out[k * n + i] = fine.interpolate(values, n, i, p);
        }
    }
    out
}

fn prolong(coarse: &Grid, fine: &Grid, values: &[f64], n: usize) -> Vec<f64> {
    restrict(coarse, fine, values, n)
}

/// Replace the nodal average by the discrete harmonic extension of its fixed values.
fn harmonize_average(grid: &Grid, free: &[bool], values: &mut [f64], n: usize) -> Result<()> {
    let avg: Vec<f64> = values
        .chunks(n)
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let field = ScalarField::new(*grid, avg.clone())?;
    let h = harmonic_replacement(&field, free)?;
    for (k, chunk) in values.chunks_mut(n).enumerate() {
        let shift = h.values()[k] - avg[k];
        chunk.iter_mut().for_each(|v| *v += shift);
    }
    Ok(())
}

fn run_levels(
    problem: &Problem,
    grids: &[Grid],
    start: &[f64],
    schedule: &SmoothingSchedule,
    cfg: &SolveConfig,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Vec<PhaseTrace>)> {
    let n = problem.n;
    let fine_grid = problem.grid;
    let mut trace = Vec::new();
    let mut values = Vec::new();
    let mut prev: Option<Grid> = None;
    for (level, g) in grids.iter().enumerate() {
        let f = Functional::new(*g, n, &problem.region)?;
        let free = f.free_nodes().to_vec();
        values = match prev {
            None => {
                let mut v = restrict(&fine_grid, g, start, n);
                if amplitude > 0.0 {
                    perturb(&mut v, &free, n, amplitude, rng);
                }
                v
            }
            Some(pg) => prolong(&pg, g, &values, n),
        };
        set_fixed(problem, g, &free, &mut values);
        harmonize_average(g, &free, &mut values, n)?;
        project_nodes(&mut values, n);
        // floors scale with the local spacing
        let floor = schedule.delta_min * g.h_max() / fine_grid.h_max();
        let deltas: Vec<f64> = if prev.is_none() {
            SmoothingSchedule::new(schedule.delta0.max(floor), schedule.ratio, floor)?.deltas()
        } else {
            (0..REFINE_PHASES).rev().map(|p| floor * 2f64.powi(p)).collect()
        };
        for delta in deltas {
            let phase = descend(&f, &mut values, delta, cfg, level);
            trace.push(phase);
        }
        prev = Some(*g);
    }
    Ok((values, trace))
}

fn perturb(values: &mut [f64], free: &[bool], n: usize, amplitude: f64, rng: &mut ChaCha8Rng) {
    for (k, chunk) in values.chunks_mut(n).enumerate() {
        if !free[k] {
            continue;
        }
        let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
        let mean = noise.iter().sum::<f64>() / n as f64;
        for (v, e) in chunk.iter_mut().zip(&noise) {
            *v += e - mean;
        }
    }
}

/// Widths `4f, 2f, f` re-annealed on every level after the coarsest, with `f`
/// the level's floor.
const REFINE_PHASES: i32 = 3;

/// Relative energy change treated as roundoff by the line search and the
/// monotonicity test.
pub const ROUNDOFF_SLACK: f64 = 1e-12;

/// Dot product weighted by the nodal measure of the cells.
fn dot(f: &Functional, a: &[f64], b: &[f64]) -> f64 {
    f.grid().cell_measure() * tree_sum_by(a.len(), |k| a[k] * b[k])
}

/// Accelerated projected gradient descent at a fixed smoothing width.
fn descend(f: &Functional, x: &mut [f64], delta: f64, cfg: &SolveConfig, level: usize) -> PhaseTrace {
    let g = f.grid();
    let n = f.n_membranes();
    let lipschitz: f64 = 8.0 * (0..g.dim()).map(|a| 1.0 / (g.h(a) * g.h(a))).sum::<f64>();
    let step_max = cfg.initial_step / lipschitz;
    let mut step = cfg.initial_step / lipschitz;
    let len = x.len();
    let mut x_prev = x.to_vec();
    let mut y = vec![0.0; len];
    let mut z = vec![0.0; len];
    let mut grad = vec![0.0; len];
    let mut diff = vec![0.0; len];
    let mut fx = f.smoothed_total(x, delta);
    let mut energies = vec![fx];
    let mut momentum = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        for k in 0..len {
            y[k] = x[k] + beta * (x[k] - x_prev[k]);
        }
        if beta > 0.0 {
            project_nodes(&mut y, n);
        }
        let fz = match armijo_step(f, &y, delta, cfg, &mut step, step_max, &mut grad, &mut z, &mut diff) {
            Some(v) => v,
            None => {
                converged = stationary(f, x, delta, step, cfg.tolerance, &mut grad, &mut z);
                break;
            }
        };
        if fz > fx + ROUNDOFF_SLACK * fx.abs().max(1.0) {
            // restart from x without momentum
            momentum = 1.0;
            x_prev.copy_from_slice(x);
            continue;
        }
        let mapping = sup_abs(&diff) / step;
        x_prev.copy_from_slice(x);
        x.copy_from_slice(&z);
        fx = fz;
        energies.push(fx);
        momentum = next_momentum;
        if mapping <= cfg.tolerance && stationary(f, x, delta, step, cfg.tolerance, &mut grad, &mut z) {
            converged = true;
            break;
        }
        step = (step / cfg.backtrack).min(step_max);
    }
    PhaseTrace {
        level,
        cells: g.resolution(),
        delta,
        iterations,
        converged,
        energies,
    }
}

/// One backtracking step from `y`. Returns `F(z)`, or `None` when the step
/// collapsed below roundoff without sufficient decrease.
#[allow(clippy::too_many_arguments)]
fn armijo_step(
    f: &Functional,
    y: &[f64],
    delta: f64,
    cfg: &SolveConfig,
    step: &mut f64,
    step_max: f64,
    grad: &mut [f64],
    z: &mut [f64],
    diff: &mut [f64],
) -> Option<f64> {
    let n = f.n_membranes();
    let fy = f.smoothed_total(y, delta);
    f.gradient(y, delta, grad);
    let floor = step_max * 1e-12;
    loop {
        for k in 0..y.len() {
            z[k] = y[k] - *step * grad[k];
        }
        project_nodes(z, n);
        for k in 0..y.len() {
            diff[k] = z[k] - y[k];
        }
        let fz = f.smoothed_total(z, delta);
        let decrease = dot(f, grad, diff);
        let slack = ROUNDOFF_SLACK * fy.abs().max(1.0);
        if fz <= fy + cfg.armijo * decrease + slack || sup_abs(diff) == 0.0 {
            return Some(fz);
        }
        *step *= cfg.backtrack;
        if *step < floor {
            return None;
        }
    }
}

/// Projected gradient mapping at `x` within `tol`, and the nodal gradient sums
/// (twice the Laplacian of the average) within `tol` as well.
fn stationary(
    f: &Functional,
    x: &[f64],
    delta: f64,
    step: f64,
    tol: f64,
    grad: &mut [f64],
    z: &mut [f64],
) -> bool {
    let n = f.n_membranes();
    f.gradient(x, delta, grad);
    for k in 0..x.len() {
        z[k] = x[k] - step * grad[k];
    }
    project_nodes(z, n);
    let mapping = x
        .iter()
        .zip(z.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / step;
    let sums = grad
        .chunks(n)
        .map(|c| c.iter().sum::<f64>().abs())
        .fold(0.0, f64::max);
    mapping <= tol && 0.5 * sums <= tol
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
