//! Reproducible floating point summation.
//!
//! Items are summed sequentially inside fixed blocks of [`BLOCK`] consecutive
//! indices, and block sums are combined by a pairwise tree whose shape depends
//! only on the item count. Block sums may be computed on any number of threads;
//! the result is bitwise identical regardless of the thread pool size.

use rayon::prelude::*;

pub const BLOCK: usize = 256;

/// Sum `f(0) + … + f(len - 1)` with the fixed block/tree shape.
pub fn tree_sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = len.div_ceil(BLOCK);
    let partial: Vec<f64> = if blocks > 8 {
        (0..blocks)
            .into_par_iter()
            .map(|b| block_sum(b, len, &f))
            .collect()
    } else {
        (0..blocks).map(|b| block_sum(b, len, &f)).collect()
    };
    pairwise(&partial)
}

/// Sum a slice with the same fixed tree shape.
pub fn tree_sum(values: &[f64]) -> f64 {
    tree_sum_by(values.len(), |i| values[i])
}

fn block_sum<F: Fn(usize) -> f64>(b: usize, len: usize, f: &F) -> f64 {
    let lo = b * BLOCK;
    let hi = (lo + BLOCK).min(len);
    let mut acc = 0.0;
    for i in lo..hi {
        acc += f(i);
    }
    acc
}

fn pairwise(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise(&values[..mid]) + pairwise(&values[mid..])
        }
    }
}
