use std::f64::consts::PI;

use membrane_core::spectral::{alpha0, eigen_roots, q_energy, rayleigh_eigen, SectorGeometry};

/// Roots of `|sin 3t| − 2|sin 5t|` in `(0, π)` by scanning and bisection.
fn bisection_roots() -> Vec<f64> {
    let f = |t: f64| (3.0 * t).sin().abs() - 2.0 * (5.0 * t).sin().abs();
    let n = 200_000;
    let mut out = Vec::new();
    for k in 0..n {
        let (mut lo, mut hi) = (PI * k as f64 / n as f64 + 1e-9, PI * (k + 1) as f64 / n as f64);
        if f(lo) * f(hi) > 0.0 {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

#[test]
fn closed_form_roots_match_bisection() {
    let oracle = bisection_roots();
    let roots = eigen_roots(9);
    assert_eq!(oracle.len(), 8);
    assert_eq!(roots[0].t, 0.0);
    for (r, t) in roots[1..].iter().zip(&oracle) {
        assert!((r.t - t).abs() < 1e-10, "{} vs {t}", r.t);
    }
}

#[test]
fn roots_are_symmetric_about_half_period() {
    let roots = eigen_roots(9);
    for r in &roots[1..] {
        assert!(roots.iter().any(|s| (s.t - (PI - r.t)).abs() < 1e-12));
    }
}

#[test]
fn fourth_and_fifth_roots_lie_in_their_brackets() {
    let r = eigen_roots(4);
    let (s4, s5) = (r[2].sqrt_lambda(), r[3].sqrt_lambda());
    assert_eq!((r[2].index, r[3].index), (4, 5));
    assert!(s4 > 1.2 && s4 < 2.0);
    assert!(s5 > 2.0 && s5 < 2.4);
    assert!(((PI / 3.0 * (1.0 + alpha0())).cos() - (17f64.sqrt() - 3.0) / 8.0).abs() < 1e-12);
}

#[test]
fn counting_function_grows_like_five_thirds() {
    let roots = eigen_roots(200);
    for cap in 1..=20 {
        let cap = cap as f64;
        let count: usize = roots
            .iter()
            .filter(|r| r.sqrt_lambda() <= cap)
            .map(|r| r.multiplicity)
            .sum();
        assert!((count as f64 - 5.0 * cap / 3.0).abs() <= 2.0, "{cap}: {count}");
    }
}

#[test]
fn rayleigh_quotients_converge_at_second_order() {
    let exact = eigen_roots(3)[2].lambda;
    let errs: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&m| (rayleigh_eigen(4, m).unwrap() - exact).abs())
        .collect();
    let order = (errs[0] / errs[2]).log2() / 2.0;
    assert!(order >= 1.8, "{errs:?}");
    assert!(errs[2] <= 1e-3);
    assert!(rayleigh_eigen(1, 128).unwrap().abs() < 1e-10);
    assert!((rayleigh_eigen(3, 256).unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn separable_eigenpair_energy_is_sqrt_lambda_times_the_norm() {
    // Q(r^p Φ) = (p² ⟨Φ,Φ⟩ + ⟨Φ',Φ'⟩)/(2p) = √λ ⟨Φ,Φ⟩ at p = √λ
    let g = SectorGeometry::default();
    for root in &eigen_roots(3)[1..] {
        let m = 2000;
        let d = (g.a + g.b) / m as f64;
        let w1: Vec<f64> = (0..=m).map(|j| root.eigenfunction(-g.b + j as f64 * d).0).collect();
        let w3: Vec<f64> = (0..=m).map(|j| root.eigenfunction(-g.a + j as f64 * d).1).collect();
        let s = root.sqrt_lambda();
        let q = q_energy(&w1, &w3, s).unwrap();
        let norm = weighted_norm(|th| root.eigenfunction(th));
        assert!((q - s * norm).abs() < 1e-5 * norm, "{q} vs {}", s * norm);
    }
}

/// `⟨Φ, Φ⟩` by composite Gauss–Legendre quadrature on the three arcs.
fn weighted_norm(phi: impl Fn(f64) -> (f64, f64)) -> f64 {
    let g = SectorGeometry::default();
    let nodes = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let integrate = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        let panels = 400;
        let w = (hi - lo) / panels as f64;
        (0..panels)
            .map(|p| {
                let c = lo + (p as f64 + 0.5) * w;
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(x, wt)| wt * f(c + 0.5 * w * x))
                    .sum::<f64>()
                    * 0.5
                    * w
            })
            .sum::<f64>()
    };
    1.5 * integrate(-g.b, -g.a, &|t| phi(t).0.powi(2))
        + 1.5 * integrate(g.a, g.b, &|t| phi(t).1.powi(2))
        + integrate(-g.a, g.a, &|t| {
            let (x, y) = phi(t);
            x * x + y * y + (x - y) * (x - y)
        })
}
