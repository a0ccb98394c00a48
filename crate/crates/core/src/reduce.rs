//! Order-fixed reductions.
//!
//! Parallel maps collect into index-ordered vectors; the vectors are then
//! summed by a fixed binary tree, so the floating result depends only on the
//! input order and never on the worker count.

use num_complex::Complex64;
use rayon::prelude::*;

const LEAF: usize = 8;

/// Pairwise (tree) sum with a fixed split at the midpoint.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// Maps `f` over `items` in parallel and tree-sums the results.
pub fn par_map_sum<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    let vals: Vec<f64> = items.par_iter().map(f).collect();
    pairwise_sum(&vals)
}
