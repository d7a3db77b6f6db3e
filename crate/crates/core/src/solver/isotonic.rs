//! Euclidean projection onto nonincreasing vectors (pool adjacent violators).

use smallvec::SmallVec;

/// Projection of `v` onto `{x : x_1 ≥ x_2 ≥ … ≥ x_N}` in the Euclidean norm.
pub fn isotonic_project(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    isotonic_project_in_place(&mut out);
    out
}

/// In-place form of [`isotonic_project`]. Preserves `Σ v_i` up to roundoff.
pub fn isotonic_project_in_place(v: &mut [f64]) {
    if v.windows(2).all(|w| w[0] >= w[1]) {
        return;
    }
    // (sum, count) of each pooled block
    let mut blocks: SmallVec<[(f64, usize); 8]> = SmallVec::new();
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 >= s1 / c1 as f64 {
                break;
            }
            blocks.pop();
            let last = blocks.len() - 1;
            blocks[last] = (s0 + s1, c0 + c1);
        }
    }
    let mut k = 0;
    for (s, c) in blocks {
        let m = s / c as f64;
        v[k..k + c].iter_mut().for_each(|x| *x = m);
        k += c;
    }
}

/// Project every `n`-chunk of a node-major array.
pub fn project_nodes(values: &mut [f64], n: usize) {
    values
        .chunks_mut(n)
        .for_each(isotonic_project_in_place);
}
