use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::boundaries::FreeBoundarySet;
use crate::cones::ConeSpec;
use crate::domain::{MembraneStack, Point};
use crate::{Error, Result};

/// Relative residual (RMS error over the fit radius) above which a junction
/// is reported as unclassified.
pub const FIT_THRESHOLD: f64 = 0.05;

/// Angular step of the rotation scan.
const SCAN_STEP: f64 = PI / 360.0;

/// Direction of one branch of a free boundary leaving the junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Zero-based free boundary index.
    pub index: usize,
    /// Angle in `(−π, π]`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionFit {
    /// Refined vertex of the fitted cone.
    pub center: Point,
    /// Rotation of the fitted cone, in `[0, 2π)`.
    pub rotation: f64,
    /// The best fit is the reflection `V₀(x₁, −x₂)` rotated by `rotation`.
    pub mirrored: bool,
    /// RMS of `|U − avg − V₀|` over the nodes in the fit disk.
    pub residual: f64,
    /// `residual / radius`.
    pub relative_residual: f64,
    pub classified: bool,
    /// Rays extracted from the free boundaries, grouped by index.
    pub rays: Vec<Ray>,
}

impl JunctionFit {
    /// Ray angles of the fitted cone: `(index, angle)` for Γ₁ and Γ₂.
    pub fn model_rays(&self) -> Vec<Ray> {
        let s = if self.mirrored { -1.0 } else { 1.0 };
        let rays = [(0, PI / 6.0), (0, -2.0 * PI / 3.0), (1, -PI / 6.0), (1, 2.0 * PI / 3.0)];
        rays.iter()
            .map(|&(index, a)| Ray {
                index,
                angle: wrap(self.rotation + s * a),
            })
            .collect()
    }
}

/// Fit `avg + V₀(M R(−φ)(x − c))` to a three-membrane stack on the disk of
/// `radius` around a junction, where `M` is the identity or the reflection
/// `x₂ ↦ −x₂`.
///
/// The rotation is scanned in half-degree steps and refined by golden-section
/// search; the center is then refined within two cells of `junction` by
/// coordinate golden-section search, alternating with the rotation.
pub fn junction_fit(
    stack: &MembraneStack,
    boundaries: &FreeBoundarySet,
    junction: Point,
    radius: f64,
) -> Result<JunctionFit> {
    let grid = stack.grid();
    if grid.dim() != 2 || stack.n_membranes() != 3 {
        return Err(Error::InvalidArgument(
            "junction fits need three membranes on a planar grid".into(),
        ));
    }
    let h = grid.h_max();
    if radius < 8.0 * h {
        return Err(Error::InvalidArgument(format!(
            "fit radius {radius} is below 8 cells ({})",
            8.0 * h
        )));
    }
    let samples = disk_samples(stack, junction, radius + 2.0 * h);
    if samples.is_empty() {
        return Err(Error::RadiusOutOfDomain { radius });
    }
    let mut best: Option<(f64, f64, bool, Point)> = None;
    for mirrored in [false, true] {
        let mut c = junction;
        let mut phi = scan(|p| rms(&samples, c, radius, p, mirrored));
        for _ in 0..2 {
            phi = refine_angle(|p| rms(&samples, c, radius, p, mirrored), phi);
            let cx = golden(junction[0] - 2.0 * h, junction[0] + 2.0 * h, |x| {
                rms(&samples, [x, c[1]], radius, phi, mirrored)
            });
            c[0] = cx;
            let cy = golden(junction[1] - 2.0 * h, junction[1] + 2.0 * h, |y| {
                rms(&samples, [c[0], y], radius, phi, mirrored)
            });
            c[1] = cy;
        }
        phi = refine_angle(|p| rms(&samples, c, radius, p, mirrored), phi);
        let r = rms(&samples, c, radius, phi, mirrored);
        if best.is_none_or(|b| r < b.0) {
            best = Some((r, phi, mirrored, c));
        }
    }
    let (residual, rotation, mirrored, center) = best.expect("two candidates");
    let relative_residual = residual / radius;
    Ok(JunctionFit {
        center,
        rotation: rotation.rem_euclid(TAU),
        mirrored,
        residual,
        relative_residual,
        classified: relative_residual <= FIT_THRESHOLD,
        rays: ray_angles(boundaries, center, 4.0 * h, radius),
    })
}

/// `(position, U − avg)` at the nodes within `reach` of `center`.
fn disk_samples(stack: &MembraneStack, center: Point, reach: f64) -> Vec<(Point, [f64; 3])> {
    let g = stack.grid();
    (0..g.node_count())
        .filter_map(|k| {
            let p = g.node_point(k);
            if (p[0] - center[0]).hypot(p[1] - center[1]) > reach {
                return None;
            }
            let u = stack.node(k);
            let m = (u[0] + u[1] + u[2]) / 3.0;
            Some((p, [u[0] - m, u[1] - m, u[2] - m]))
        })
        .collect()
}

fn rms(samples: &[(Point, [f64; 3])], c: Point, radius: f64, phi: f64, mirrored: bool) -> f64 {
    let v0 = ConeSpec::V0 { rotation: 0.0 };
    let (s, co) = phi.sin_cos();
    let mut out = [0.0; 3];
    let (mut sum, mut count) = (0.0, 0usize);
    for (p, u) in samples {
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        if dx.hypot(dy) > radius {
            continue;
        }
        // R(−φ)(x − c)
        let q = [co * dx + s * dy, -s * dx + co * dy];
        let q = if mirrored { [q[0], -q[1]] } else { q };
        v0.evaluate_into(q, &mut out);
        sum += (0..3).map(|i| (u[i] - out[i]).powi(2)).sum::<f64>();
        count += 1;
    }
    if count == 0 {
        f64::INFINITY
    } else {
        (sum / count as f64).sqrt()
    }
}

fn scan(f: impl Fn(f64) -> f64) -> f64 {
    let steps = (TAU / SCAN_STEP).round() as usize;
    (0..steps)
        .map(|k| k as f64 * SCAN_STEP)
        .map(|p| (f(p), p))
        .fold((f64::INFINITY, 0.0), |b, c| if c.0 < b.0 { c } else { b })
        .1
}

fn refine_angle(f: impl Fn(f64) -> f64, phi: f64) -> f64 {
    golden(phi - SCAN_STEP, phi + SCAN_STEP, f)
}

/// Golden-section minimization on `[a, b]`.
fn golden(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Rays of each free boundary near `center`: vertices with distance in
/// `[r_min, r_max]` are grouped by angle, and each group is fitted with a
/// total-least-squares line oriented away from the center.
pub fn ray_angles(fb: &FreeBoundarySet, center: Point, r_min: f64, r_max: f64) -> Vec<Ray> {
    let mut rays = Vec::new();
    for (index, g) in fb.gamma.iter().enumerate() {
        let mut pts: Vec<(f64, Point)> = g
            .vertices()
            .filter_map(|p| {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let r = dx.hypot(dy);
                (r >= r_min && r <= r_max).then_some((dy.atan2(dx), p))
            })
            .collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for group in angle_groups(&pts) {
            let p: Vec<Point> = group.iter().map(|&k| pts[k].1).collect();
            rays.push(Ray {
                index,
                angle: tls_direction(&p, center),
            });
        }
    }
    rays
}

/// Split angle-sorted points wherever consecutive angles differ by more than 20°.
fn angle_groups(pts: &[(f64, Point)]) -> Vec<Vec<usize>> {
    let gap = 20f64.to_radians();
    let n = pts.len();
    // start after the largest circular gap so no group straddles the cut
    let mut start = 0;
    let mut widest = 0.0;
    for k in 0..n {
        let next = if k + 1 < n { pts[k + 1].0 } else { pts[0].0 + TAU };
        if next - pts[k].0 > widest {
            widest = next - pts[k].0;
            start = (k + 1) % n;
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![vec![start]];
    for step in 1..n {
        let (prev, k) = ((start + step - 1) % n, (start + step) % n);
        let d = (pts[k].0 - pts[prev].0).rem_euclid(TAU);
        if d > gap {
            groups.push(Vec::new());
        }
        groups.last_mut().expect("nonempty").push(k);
    }
    groups
}

fn tls_direction(p: &[Point], center: Point) -> f64 {
    let n = p.len() as f64;
    let mx = p.iter().map(|q| q[0]).sum::<f64>() / n;
    let my = p.iter().map(|q| q[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for q in p {
        let (dx, dy) = (q[0] - mx, q[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // principal axis of the scatter matrix
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (mut dx, mut dy) = (theta.cos(), theta.sin());
    if dx * (mx - center[0]) + dy * (my - center[1]) < 0.0 {
        dx = -dx;
        dy = -dy;
    }
    dy.atan2(dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::extract_free_boundaries;
    use crate::cones::sample_cone;
    use crate::domain::Grid;

    fn grid() -> Grid {
        Grid::rect((-1.0, 1.0), (-1.0, 1.0), (96, 96)).unwrap()
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        wrap(a - b).abs()
    }

    #[test]
    fn self_fit_recovers_rotation() {
        let g = grid();
        let s = sample_cone(&ConeSpec::V0 { rotation: 0.7 }, &g, [0.05, -0.03]).unwrap();
        let fb = extract_free_boundaries(&s, 1e-9);
        assert_eq!(fb.junctions.len(), 1);
        let fit = junction_fit(&s, &fb, fb.junctions[0].point, 0.5).unwrap();
        assert!(fit.classified);
        assert!(!fit.mirrored);
        assert!(angle_diff(fit.rotation, 0.7) < 0.01, "{}", fit.rotation);
        assert!(fit.residual < 1e-3, "{}", fit.residual);
        assert_eq!(fit.rays.len(), 4);
        for ray in &fit.rays {
            let model = fit
                .model_rays()
                .into_iter()
                .filter(|m| m.index == ray.index)
                .map(|m| angle_diff(m.angle, ray.angle))
                .fold(f64::INFINITY, f64::min);
            assert!(model < 0.02, "{ray:?}");
        }
    }

    #[test]
    fn reflected_cone_fits_mirrored() {
        let g = grid();
        let v0 = sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &g, [0.0, 0.0]).unwrap();
        let mut vals = vec![0.0; v0.values().len()];
        for k in 0..g.node_count() {
            let p = g.node_point(k);
            let src = v0.at([p[0], -p[1]]);
            vals[3 * k..3 * k + 3].copy_from_slice(&src);
        }
        let s = v0.with_values(vals).unwrap();
        let fb = extract_free_boundaries(&s, 1e-9);
        let fit = junction_fit(&s, &fb, [0.0, 0.0], 0.5).unwrap();
        assert!(fit.classified && fit.mirrored);
        assert!(angle_diff(fit.rotation, 0.0) < 0.01);
    }

    #[test]
    fn vs_is_unclassified() {
        let g = grid();
        let s = sample_cone(&ConeSpec::Vs { rotation: 0.0 }, &g, [0.0, 0.0]).unwrap();
        let fb = extract_free_boundaries(&s, 1e-9);
        let fit = junction_fit(&s, &fb, [0.0, 0.0], 0.5).unwrap();
        assert!(!fit.classified, "{}", fit.relative_residual);
    }

    #[test]
    fn small_radius_is_rejected() {
        let g = grid();
        let s = sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &g, [0.0, 0.0]).unwrap();
        let fb = extract_free_boundaries(&s, 1e-9);
        assert!(junction_fit(&s, &fb, [0.0, 0.0], 4.0 * g.h(0)).is_err());
    }
}
