use std::f64::consts::PI;

use membrane_core::analysis::{extract_free_boundaries, rescale_blowup, weiss_profile};
use membrane_core::cones::{sample_cone, ConeSpec};
use membrane_core::Grid;

fn square(cells: usize) -> Grid {
    Grid::rect((-1.0, 1.0), (-1.0, 1.0), (cells, cells)).unwrap()
}

#[test]
fn v0_weiss_profile_is_flat() {
    let g = square(256);
    let h = g.h(0);
    let s = sample_cone(&ConeSpec::V0 { rotation: 0.0 }, &g, [0.0, 0.0]).unwrap();
    let radii: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    let w = weiss_profile(&s, [0.0, 0.0], &radii, 1e-12).unwrap();
    for (r, p) in radii.iter().zip(&w.phi) {
        assert!((p - 5.0 * PI / 6.0).abs() <= 10.0 * h, "r = {r}: {p}");
    }
}

#[test]
fn extended_one_d_cone_profile_is_half_the_disk() {
    let g = square(256);
    let h = g.h(0);
    let s = sample_cone(&ConeSpec::OneD { n: 3, k: 2, reflected: false }, &g, [0.0, 0.0]).unwrap();
    let w = weiss_profile(&s, [0.0, 0.0], &[0.2, 0.5, 0.95], 1e-12).unwrap();
    for p in &w.phi {
        assert!((p - PI / 2.0).abs() <= 10.0 * h, "{p}");
    }
}

#[test]
fn extraction_commutes_with_blowup() {
    let g = square(128);
    let h = g.h(0);
    let spec = ConeSpec::V0 { rotation: 1.1 };
    let s = sample_cone(&spec, &g, [0.0, 0.0]).unwrap();
    let r = 0.5;
    let b = rescale_blowup(&s, [0.0, 0.0], r).unwrap();
    let fine = extract_free_boundaries(&s, 1e-12);
    let coarse = extract_free_boundaries(&b, 1e-12);
    // every rescaled vertex lies within a cell of the original contour
    for (gf, gc) in fine.gamma.iter().zip(&coarse.gamma) {
        for p in gc.vertices() {
            let q = [r * p[0], r * p[1]];
            let d = gf
                .vertices()
                .map(|v| (v[0] - q[0]).hypot(v[1] - q[1]))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 2.0 * h, "{p:?}: {d}");
        }
    }
}
