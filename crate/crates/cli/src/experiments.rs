//! Experiments behind the `experiment`, `cones` and `spectrum` subcommands.
//!
//! Every experiment writes its artifacts into one run directory and returns
//! the manifest, which lists the metrics of its contract.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use membrane_core::analysis::{
    ball_integral, equipartition_residual, extract_free_boundaries, junction_fit,
    separated_fraction, weiss_profile, FreeBoundarySet, Junction, JunctionFit, WeissProfile,
};
use membrane_core::cones::{explicit_1d_minimizer, explicit_kink_1, explicit_kink_2, sample_cone};
use membrane_core::domain::io::stack_to_string;
use membrane_core::domain::BlendProfile;
use membrane_core::energy::region_energy;
use membrane_core::spectral::{alpha0, eigen_roots, rayleigh_eigen};
use membrane_core::{
    solve, BoundaryData, ConeSpec, Grid, MembraneStack, Point, Problem, Region, SolveResult,
};

use crate::config::Config;
use crate::manifest::ExperimentManifest;
use crate::svg::{Plot, Series};

pub const EXPERIMENTS: [&str; 5] = [
    "fig3-1d",
    "rectangle-junction",
    "vs-instability",
    "weiss-monotonicity",
    "spectrum-table",
];

/// Gap threshold for sampled closed forms. Solver output is analysed at the
/// threshold of its own energy report.
pub const ANALYSIS_TAU: f64 = 1e-9;

/// Weiss slack `C` in units of `h`: twice the largest deviation of the
/// discrete profile of sampled `V₀` from `5π/6` over radii `≥ 0.1`.
pub const WEISS_SLACK: f64 = 10.0;

/// Energy slack `C` in units of `h` for the cone comparisons on the unit disk.
pub const ENERGY_SLACK: f64 = 2.0;

/// Metrics each experiment must report.
pub fn contract(id: &str) -> &'static [&'static str] {
    match id {
        "fig3-1d" => &[
            "h",
            "sup_distance",
            "kink_1",
            "kink_2",
            "kink_1_error",
            "kink_2_error",
            "energy",
            "equipartition_residual_1",
            "equipartition_residual_2",
            "converged",
        ],
        "rectangle-junction" => &[
            "h",
            "junction_count",
            "junction_x",
            "junction_y",
            "fit_rotation",
            "fit_relative_residual",
            "fit_classified",
            "weiss_phi",
            "weiss_phi_error",
            "min_increment",
            "left_gamma1_vertices",
            "right_gamma2_vertices",
            "left_gamma2_vertices",
            "right_gamma1_vertices",
            "energy",
            "converged",
        ],
        "vs-instability" => &["h", "slack", "gap_vs", "gap_v0", "gap_u01", "gap_u02"],
        "weiss-monotonicity" => &[
            "h",
            "min_increment",
            "slack",
            "v0_max_deviation",
            "junction_x",
            "junction_y",
        ],
        "spectrum-table" => &[
            "alpha0",
            "identity_residual",
            "sqrt_lambda_4",
            "sqrt_lambda_5",
            "rayleigh_lambda_4",
            "rayleigh_error_4",
        ],
        "cones" => &["h", "v0_energy", "v0_error", "u01_energy", "u01_error"],
        _ => &[],
    }
}

/// Run one experiment into `out` and write its manifest there.
pub fn run_experiment(id: &str, cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut m = ExperimentManifest::new(id, cfg.seed(), cfg.to_toml());
    let start = Instant::now();
    match id {
        "fig3-1d" => fig3(cfg, out, &mut m)?,
        "rectangle-junction" => rectangle(cfg, out, &mut m)?,
        "vs-instability" => vs_instability(cfg, out, &mut m)?,
        "weiss-monotonicity" => weiss_monotonicity(cfg, out, &mut m)?,
        "spectrum-table" => spectrum_table(cfg, out, &mut m)?,
        "cones" => cone_table(cfg, out, &mut m)?,
        other => bail!("unknown experiment '{other}'; known: {}", EXPERIMENTS.join(", ")),
    }
    m.wall_clock = start.elapsed().as_secs_f64();
    m.require(contract(id))?;
    m.write(out)?;
    Ok(m)
}

fn write(out: &Path, name: &str, contents: &str, m: &mut ExperimentManifest) -> Result<()> {
    fs::write(out.join(name), contents).with_context(|| format!("writing {name}"))?;
    m.files.push(name.into());
    Ok(())
}

fn flag_unconverged(r: &SolveResult, m: &mut ExperimentManifest) {
    m.metric("converged", f64::from(u8::from(r.converged)));
    if !r.converged {
        m.flag("solver stopped at the iteration cap");
    }
}

/// Sup distance to the closed-form minimizer, modulo `U ↦ (−u₃, −u₂, −u₁)`;
/// the flag reports whether the reflected form is the closer one.
pub fn sup_to_explicit(stack: &MembraneStack) -> (f64, bool) {
    let g = stack.grid();
    let (mut direct, mut mirror) = (0.0f64, 0.0f64);
    for k in 0..g.node_count() {
        let e = explicit_1d_minimizer(g.node_point(k)[0]);
        for i in 0..3 {
            direct = direct.max((stack.get(k, i) - e[i]).abs());
            mirror = mirror.max((stack.get(k, i) + e[2 - i]).abs());
        }
    }
    if mirror < direct {
        (mirror, true)
    } else {
        (direct, false)
    }
}

fn fig3(cfg: &Config, out: &Path, m: &mut ExperimentManifest) -> Result<()> {
    let res = cfg.resolution_or(cfg.fig3.resolution);
    let g = Grid::line(-1.0, 1.0, 2 * res)?;
    let h = g.h(0);
    let p = Problem::new(
        g,
        3,
        BoundaryData::Cone {
            spec: ConeSpec::TripleCritical,
            center: [0.0, 0.0],
        },
    );
    let r = solve(&p, None, &cfg.solver())?;
    flag_unconverged(&r, m);
    let (sup, mirrored) = sup_to_explicit(&r.stack);
    m.metric("h", h);
    m.metric("sup_distance", sup);
    m.metric("sup_distance_over_h", sup / h);
    m.metric("mirrored", f64::from(u8::from(mirrored)));
    m.metric("energy", r.report.total);
    m.metric("dirichlet", r.report.dirichlet);
    m.metric("potential", r.report.potential);
    m.metric("tau", r.report.tau);
    m.metric("iterations", r.iterations as f64);

    let fb = extract_free_boundaries(&r.stack, r.report.tau);
    let mut kinks: Vec<f64> = fb.gamma.iter().flat_map(|g| g.points.iter().copied()).collect();
    kinks.sort_by(f64::total_cmp);
    m.metric("kink_count", kinks.len() as f64);
    let exact = [explicit_kink_1(), explicit_kink_2()];
    for (k, &x) in exact.iter().enumerate() {
        let found = if kinks.len() == 2 { kinks[k] } else { f64::NAN };
        m.metric(&format!("kink_{}", k + 1), found);
        m.metric(&format!("kink_{}_error", k + 1), (found - x).abs());
        let res = if found.is_nan() {
            Err(anyhow::anyhow!("kink not found"))
        } else {
            equipartition_residual(&r.stack, found, cfg.fig3.window).map_err(Into::into)
        };
        let key = format!("equipartition_residual_{}", k + 1);
        match res {
            Ok(v) => m.metric(&key, v),
            Err(e) => {
                m.metric(&key, f64::NAN);
                m.flag(format!("equipartition at kink {}: {e}", k + 1));
            }
        }
    }
    if kinks.len() != 2 {
        m.flag(format!("expected two kinks, found {}", kinks.len()));
    }

    write(out, "solution.field", &stack_to_string(&r.stack), m)?;
    let mut csv = String::from("x,u1,u2,u3,exact1,exact2,exact3\n");
    let mut plot = Plot::new("three membranes on [-1, 1]");
    let mut lines = vec![Vec::new(); 6];
    for k in 0..g.node_count() {
        let x = g.node_point(k)[0];
        let mut e = explicit_1d_minimizer(x);
        if mirrored {
            e = [-e[2], -e[1], -e[0]];
        }
        let u = r.stack.node(k);
        csv.push_str(&format!(
            "{x:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            u[0], u[1], u[2], e[0], e[1], e[2]
        ));
        for i in 0..3 {
            lines[i].push([x, u[i]]);
            lines[3 + i].push([x, e[i]]);
        }
    }
    for (i, pts) in lines.into_iter().enumerate() {
        let label = if i < 3 { format!("u{}", i + 1) } else { format!("exact u{}", i - 2) };
        plot.push(Series::line(label, pts));
    }
    write(out, "profile.csv", &csv, m)?;
    write(out, "profile.svg", &plot.render(), m)?;
    Ok(())
}

/// The blended-trace problem on `[−M, M] × [−1, 1]`.
pub fn rectangle_problem(cfg: &Config) -> Result<Problem> {
    let rc = &cfg.rectangle;
    if !(rc.half_length >= 4.0) {
        bail!("rectangle half length must be at least 4, got {}", rc.half_length);
    }
    let res = cfg.resolution_or(rc.resolution);
    let cells_x = (2.0 * rc.half_length * res as f64).round() as usize;
    let g = Grid::rect((-rc.half_length, rc.half_length), (-1.0, 1.0), (cells_x, 2 * res))?;
    Ok(Problem::new(
        g,
        3,
        BoundaryData::Blend {
            one: ConeSpec::OneD {
                n: 3,
                k: 1,
                reflected: false,
            },
            zero: ConeSpec::OneD {
                n: 3,
                k: 2,
                reflected: false,
            },
            profile: BlendProfile::Smoothstep { lo: -1.0, hi: 1.0 },
        },
    ))
}

/// The junction whose cone fit has the smallest relative residual.
fn best_junction(
    stack: &MembraneStack,
    fb: &FreeBoundarySet,
    radius: f64,
) -> Option<(Junction, JunctionFit)> {
    fb.junctions
        .iter()
        .filter(|j| (j.first, j.second) == (0, 1))
        .filter_map(|j| junction_fit(stack, fb, j.point, radius).ok().map(|f| (*j, f)))
        .min_by(|a, b| a.1.relative_residual.total_cmp(&b.1.relative_residual))
}

/// Vertices of `Γ_{i+1}` with `|x₁ − center| ≤ width/2`.
fn window_vertices(fb: &FreeBoundarySet, i: usize, center: f64, width: f64) -> usize {
    fb.gamma[i]
        .vertices()
        .filter(|v| (v[0] - center).abs() <= 0.5 * width)
        .count()
}

fn boundaries_plot(fb: &FreeBoundarySet, title: &str, junction: Option<[f64; 2]>) -> Plot {
    let mut plot = Plot::new(title);
    plot.equal_aspect = true;
    plot.width = 960.0;
    plot.height = 320.0;
    for (i, g) in fb.gamma.iter().enumerate() {
        let mut pts = Vec::new();
        for line in &g.polylines {
            pts.extend(line.iter().copied());
            pts.push([f64::NAN, f64::NAN]);
        }
        plot.push(Series::line(format!("Gamma_{}", i + 1), pts));
    }
    if let Some(p) = junction {
        plot.push(Series::markers("junction", vec![p]));
    }
    plot
}

struct RectangleRun {
    result: SolveResult,
    boundaries: FreeBoundarySet,
    junction: Option<(Junction, JunctionFit)>,
}

fn rectangle_run(cfg: &Config) -> Result<RectangleRun> {
    let p = rectangle_problem(cfg)?;
    let result = solve(&p, None, &cfg.solver())?;
    let tau = result.report.tau;
    let boundaries = extract_free_boundaries(&result.stack, tau);
    let radius = cfg.rectangle.fit_cells * result.stack.grid().h_max();
    let junction = best_junction(&result.stack, &boundaries, radius);
    Ok(RectangleRun {
        result,
        boundaries,
        junction,
    })
}

/// Weiss profile about the fitted vertex over the configured radii that fit
/// inside the domain.
fn junction_profile(cfg: &Config, stack: &MembraneStack, center: Point, tau: f64) -> Result<WeissProfile> {
    let g = stack.grid();
    let room = (0..2)
        .map(|a| {
            let (lo, hi) = g.extent(a);
            (center[a] - lo).min(hi - center[a])
        })
        .fold(f64::INFINITY, f64::min);
    let radii: Vec<f64> = cfg.weiss.radii.iter().copied().filter(|&x| x <= room).collect();
    if radii.is_empty() {
        bail!("no Weiss radius fits around the junction (room {room})");
    }
    Ok(weiss_profile(stack, center, &radii, tau)?)
}

fn weiss_plot(w: &WeissProfile) -> Plot {
    let mut plot = Plot::new("Weiss energy at the junction");
    plot.push(Series::line("phi", w.radii.iter().zip(&w.phi).map(|(a, b)| [*a, *b]).collect()));
    plot.push(Series::line(
        "5pi/6",
        vec![[w.radii[0], 5.0 * PI / 6.0], [*w.radii.last().unwrap(), 5.0 * PI / 6.0]],
    ));
    plot
}

const JUNCTION_METRICS: [&str; 8] = [
    "junction_x",
    "junction_y",
    "fit_rotation",
    "fit_relative_residual",
    "fit_classified",
    "weiss_phi",
    "weiss_phi_error",
    "min_increment",
];

fn rectangle(cfg: &Config, out: &Path, m: &mut ExperimentManifest) -> Result<()> {
    let rc = &cfg.rectangle;
    let run = rectangle_run(cfg)?;
    let r = &run.result;
    let fb = &run.boundaries;
    let h = r.stack.grid().h_max();
    flag_unconverged(r, m);
    m.metric("h", h);
    m.metric("energy", r.report.total);
    m.metric("tau", r.report.tau);
    m.metric(
        "junction_count",
        fb.junctions.iter().filter(|j| (j.first, j.second) == (0, 1)).count() as f64,
    );
    let half = rc.half_length / 2.0;
    m.metric("left_gamma1_vertices", window_vertices(fb, 0, -half, rc.window) as f64);
    m.metric("left_gamma2_vertices", window_vertices(fb, 1, -half, rc.window) as f64);
    m.metric("right_gamma1_vertices", window_vertices(fb, 0, half, rc.window) as f64);
    m.metric("right_gamma2_vertices", window_vertices(fb, 1, half, rc.window) as f64);
    write(out, "solution.field", &stack_to_string(&r.stack), m)?;
    write(out, "boundaries.csv", &fb.to_csv(), m)?;
    let jp = run.junction.as_ref().map(|(j, _)| j.point);
    write(out, "boundaries.svg", &boundaries_plot(fb, "free boundaries", jp).render(), m)?;

    let Some((j, fit)) = &run.junction else {
        m.flag("no junction of the two free boundaries found");
        for key in JUNCTION_METRICS {
            m.metric(key, f64::NAN);
        }
        return Ok(());
    };
    m.metric("junction_x", j.point[0]);
    m.metric("junction_y", j.point[1]);
    m.metric("fit_radius", rc.fit_cells * h);
    m.metric("fit_center_x", fit.center[0]);
    m.metric("fit_center_y", fit.center[1]);
    m.metric("fit_rotation", fit.rotation);
    m.metric("fit_mirrored", f64::from(u8::from(fit.mirrored)));
    m.metric("fit_relative_residual", fit.relative_residual);
    m.metric("fit_classified", f64::from(u8::from(fit.classified)));
    let phi = weiss_profile(&r.stack, fit.center, &[rc.weiss_radius], r.report.tau)?.phi[0];
    m.metric("weiss_phi", phi);
    m.metric("weiss_phi_error", (phi - 5.0 * PI / 6.0).abs());
    let w = junction_profile(cfg, &r.stack, fit.center, r.report.tau)?;
    m.metric("min_increment", w.min_increment);
    write(out, "weiss.csv", &w.to_csv(), m)?;
    write(out, "weiss.svg", &weiss_plot(&w).render(), m)?;
    Ok(())
}

/// Largest deviation of the Weiss profile of sampled `V₀` from `5π/6` on a
/// grid of spacing `h`, over radii `0.1, 0.2, …, 0.9`.
pub fn weiss_calibration(h: f64) -> Result<f64> {
    let cells = (2.0 / h).round() as usize;
    let square = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (cells, cells))?;
    let v0 = sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &square, [0.0, 0.0])?;
    let radii: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    let w = weiss_profile(&v0, [0.0, 0.0], &radii, ANALYSIS_TAU)?;
    Ok(w.phi.iter().map(|p| (p - 5.0 * PI / 6.0).abs()).fold(0.0, f64::max))
}

fn weiss_monotonicity(cfg: &Config, out: &Path, m: &mut ExperimentManifest) -> Result<()> {
    let run = rectangle_run(cfg)?;
    let r = &run.result;
    let h = r.stack.grid().h_max();
    flag_unconverged(r, m);
    m.metric("h", h);
    m.metric("slack", WEISS_SLACK * h);
    let dev = weiss_calibration(h)?;
    m.metric("v0_max_deviation", dev);
    m.metric("v0_max_deviation_over_h", dev / h);

    let Some((j, fit)) = &run.junction else {
        m.flag("no junction of the two free boundaries found");
        for key in ["min_increment", "junction_x", "junction_y"] {
            m.metric(key, f64::NAN);
        }
        return Ok(());
    };
    m.metric("junction_x", j.point[0]);
    m.metric("junction_y", j.point[1]);
    let w = junction_profile(cfg, &r.stack, fit.center, r.report.tau)?;
    m.metric("min_increment", w.min_increment);
    for (rad, phi) in w.radii.iter().zip(&w.phi) {
        m.metric(&format!("phi_r{rad:.3}"), *phi);
    }
    if w.min_increment < -WEISS_SLACK * h {
        m.flag("Weiss profile decreases beyond the slack");
    }
    write(out, "weiss.csv", &w.to_csv(), m)?;
    write(out, "weiss.svg", &weiss_plot(&w).render(), m)?;
    Ok(())
}

/// `J(cone) − J(solver output)` on the unit disk of `[−1, 1]²` with the cone's trace.
pub fn cone_gap(spec: ConeSpec, resolution: usize, cfg: &Config) -> Result<(f64, SolveResult)> {
    let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (2 * resolution, 2 * resolution))?;
    let data = sample_cone(&spec, &g, [0.0, 0.0])?;
    let region = Region::Ball {
        center: [0.0, 0.0],
        radius: 1.0,
    };
    let p = Problem::new(g, 3, BoundaryData::Explicit(data.clone())).with_region(region);
    let r = solve(&p, None, &cfg.solver())?;
    let cone = region_energy(&data, &region, r.report.tau);
    Ok((cone.total - r.report.total, r))
}

fn vs_instability(cfg: &Config, out: &Path, m: &mut ExperimentManifest) -> Result<()> {
    let res = cfg.resolution_or(cfg.vs.resolution);
    let h = 1.0 / res as f64;
    m.metric("h", h);
    m.metric("slack", ENERGY_SLACK * h);
    let cases = [
        ("vs", ConeSpec::Vs { rotation: 0.0 }),
        ("v0", ConeSpec::V0 { rotation: 0.0 }),
        ("u01", ConeSpec::OneD { n: 3, k: 1, reflected: false }),
        ("u02", ConeSpec::OneD { n: 3, k: 2, reflected: false }),
    ];
    let mut csv = String::from("case,cone_energy,solution_energy,gap\n");
    for (name, spec) in cases {
        let (gap, r) = cone_gap(spec, res, cfg)?;
        m.metric(&format!("gap_{name}"), gap);
        m.metric(&format!("energy_{name}"), r.report.total);
        if !r.converged {
            m.flag(format!("{name}: solver stopped at the iteration cap"));
        }
        csv.push_str(&format!(
            "{name},{:.12e},{:.12e},{:.12e}\n",
            r.report.total + gap,
            r.report.total,
            gap
        ));
        if name == "vs" {
            let fb = extract_free_boundaries(&r.stack, r.report.tau);
            write(out, "vs_solution.field", &stack_to_string(&r.stack), m)?;
            write(out, "vs_boundaries.svg", &boundaries_plot(&fb, "minimizer with the Vs trace", None).render(), m)?;
        }
    }
    write(out, "gaps.csv", &csv, m)?;
    Ok(())
}

fn spectrum_table(cfg: &Config, out: &Path, m: &mut ExperimentManifest) -> Result<()> {
    let sc = &cfg.spectrum;
    let roots = eigen_roots(sc.count.max(3));
    let mut csv = String::from("k,t,sqrt_lambda,lambda,branch,multiplicity\n");
    for r in roots.iter().take(sc.count) {
        csv.push_str(&format!(
            "{},{:.15e},{:.15e},{:.15e},{},{}\n",
            r.index,
            r.t,
            r.sqrt_lambda(),
            r.lambda,
            r.branch.label(),
            r.multiplicity
        ));
    }
    let a = alpha0();
    m.metric("alpha0", a);
    m.metric(
        "identity_residual",
        ((PI / 3.0 * (1.0 + a)).cos() - (17f64.sqrt() - 3.0) / 8.0).abs(),
    );
    let roots5 = eigen_roots(4);
    m.metric("sqrt_lambda_4", roots5[2].sqrt_lambda());
    m.metric("sqrt_lambda_5", roots5[3].sqrt_lambda());
    let numeric = rayleigh_eigen(4, sc.mesh)?;
    m.metric("rayleigh_lambda_4", numeric);
    m.metric("rayleigh_error_4", (numeric - roots5[2].lambda).abs());
    write(out, "spectrum.csv", &csv, m)?;

    let samples = 2000;
    let curve = |f: &dyn Fn(f64) -> f64| -> Vec<[f64; 2]> {
        (0..=samples)
            .map(|k| {
                let t = PI * k as f64 / samples as f64;
                [t, f(t)]
            })
            .collect()
    };
    let mut plot = Plot::new("|sin 3t| and 2|sin 5t| on [0, pi]");
    plot.push(Series::line("|sin 3t|", curve(&|t| (3.0 * t).sin().abs())));
    plot.push(Series::line("2|sin 5t|", curve(&|t| 2.0 * (5.0 * t).sin().abs())));
    plot.push(Series::markers(
        "roots",
        roots.iter().take(9).map(|r| [r.t, (3.0 * r.t).sin().abs()]).collect(),
    ));
    write(out, "spectrum.svg", &plot.render(), m)?;
    Ok(())
}

/// `∫_{B₁} W` of a sampled cone: the cell-center count of the discrete
/// functional and the reconstructed measure of the separated sets.
pub fn cone_disk_energy(spec: ConeSpec, resolution: usize) -> Result<(f64, f64)> {
    let g = Grid::rect((-1.0, 1.0), (-1.0, 1.0), (2 * resolution, 2 * resolution))?;
    let s = sample_cone(&spec, &g, [0.0, 0.0])?;
    let region = Region::Ball {
        center: [0.0, 0.0],
        radius: 1.0,
    };
    let center_count = region_energy(&s, &region, ANALYSIS_TAU).potential;
    let mut density = vec![0.0; g.cell_count()];
    for i in 0..s.n_membranes() - 1 {
        for (d, f) in density.iter_mut().zip(separated_fraction(&s, i, ANALYSIS_TAU)) {
            *d += f;
        }
    }
    let reconstructed = ball_integral(&g, &density, [0.0, 0.0], 1.0);
    Ok((center_count, reconstructed))
}

fn cone_table(cfg: &Config, out: &Path, m: &mut ExperimentManifest) -> Result<()> {
    let res = cfg.resolution_or(cfg.cones.resolution);
    m.metric("h", 1.0 / res as f64);
    let cases = [
        ("v0", ConeSpec::V0 { rotation: 0.0 }),
        ("vs", ConeSpec::Vs { rotation: 0.0 }),
        ("u01", ConeSpec::OneD { n: 3, k: 1, reflected: false }),
        ("u02", ConeSpec::OneD { n: 3, k: 2, reflected: false }),
        ("triple", ConeSpec::TripleCritical),
    ];
    let mut csv = String::from("cone,exact,cell_center,reconstructed\n");
    for (name, spec) in cases {
        let exact = spec.cone_energy()?;
        let (center, recon) = cone_disk_energy(spec, res)?;
        m.metric(&format!("{name}_energy"), center);
        m.metric(&format!("{name}_error"), (center - exact).abs());
        m.metric(&format!("{name}_reconstructed"), recon);
        m.metric(&format!("{name}_reconstructed_error"), (recon - exact).abs());
        csv.push_str(&format!("{name},{exact:.12e},{center:.12e},{recon:.12e}\n"));
    }
    write(out, "cones.csv", &csv, m)?;
    Ok(())
}

/// Solve the problem of the `[solve]` section and write the solution.
pub fn run_solve(cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let sc = &cfg.solve;
    let spec: ConeSpec = sc.cone.parse()?;
    let res = cfg.resolution_or(64);
    let cells = (2.0 * sc.half_width * res as f64).round() as usize;
    let w = sc.half_width;
    let grid = match sc.dim {
        1 => Grid::line(-w, w, cells)?,
        2 => Grid::rect((-w, w), (-w, w), (cells, cells))?,
        d => bail!("dimension must be 1 or 2, got {d}"),
    };
    let mut p = Problem::new(
        grid,
        spec.n_membranes(),
        BoundaryData::Cone {
            spec,
            center: [0.0, 0.0],
        },
    );
    if sc.ball {
        p = p.with_region(Region::Ball {
            center: [0.0, 0.0],
            radius: 1.0,
        });
    }
    let mut m = ExperimentManifest::new("solve", cfg.seed(), cfg.to_toml());
    let start = Instant::now();
    let r = solve(&p, None, &cfg.solver())?;
    flag_unconverged(&r, &mut m);
    m.metric("h", grid.h_max());
    m.metric("energy", r.report.total);
    m.metric("dirichlet", r.report.dirichlet);
    m.metric("potential", r.report.potential);
    m.metric("tau", r.report.tau);
    m.metric("iterations", r.iterations as f64);
    m.metric("initial_energy", r.initial_energy);
    if let Ok(cone) = spec.cone_energy() {
        if sc.ball && sc.dim == 2 {
            m.metric("cone_energy", cone);
        }
    }
    write(out, "solution.field", &stack_to_string(&r.stack), &mut m)?;
    let fb = extract_free_boundaries(&r.stack, r.report.tau);
    write(out, "boundaries.csv", &fb.to_csv(), &mut m)?;
    m.wall_clock = start.elapsed().as_secs_f64();
    m.write(out)?;
    Ok(m)
}
