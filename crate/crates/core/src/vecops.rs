//! Dense vector kernels with thread-count independent reductions.
//!
//! Reductions split the input into fixed-size blocks, sum each block
//! sequentially, then add the block partials in order. The result depends
//! only on the data, never on how rayon schedules the blocks.

use rayon::prelude::*;

const BLOCK: usize = 4096;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    if x.len() <= BLOCK {
        return x.iter().zip(y).map(|(a, b)| a * b).sum();
    }
    let partials: Vec<f64> = x
        .par_chunks(BLOCK)
        .zip(y.par_chunks(BLOCK))
        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partials.iter().sum()
}

pub fn sum(x: &[f64]) -> f64 {
    if x.len() <= BLOCK {
        return x.iter().sum();
    }
    let partials: Vec<f64> = x.par_chunks(BLOCK).map(|a| a.iter().sum::<f64>()).collect();
    partials.iter().sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// y = x + beta * y
pub fn xpby(x: &[f64], beta: f64, y: &mut [f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi = xi + beta * *yi);
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.par_iter_mut().for_each(|xi| *xi *= alpha);
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        sum(x) / x.len() as f64
    }
}

/// Removes the component along the constant vector.
pub fn remove_mean(x: &mut [f64]) {
    let m = mean(x);
    x.par_iter_mut().for_each(|xi| *xi -= m);
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.par_iter().zip(y.par_iter()).map(|(a, b)| a - b).collect()
}
