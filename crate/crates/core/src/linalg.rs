//! Direct solves for sparse SPD and singular Laplacians, and a Lanczos
//! estimate of the largest eigenvalue of an operator that is self-adjoint in
//! a matrix inner product.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::vecops;

/// Cholesky factor stored over the row envelope: row `i` holds columns
/// `first[i]..=i`. Grid Laplacians in natural ordering have a profile of
/// about `n * sqrt(n)` entries.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn profile_size(a: &CsrMatrix) -> usize {
        (0..a.n_rows()).map(|i| i + 1 - a.row(i).0.first().copied().unwrap_or(i).min(i)).sum()
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.n_rows(), cols: a.n_cols() });
        }
        let n = a.n_rows();
        let first: Vec<usize> = (0..n).map(|i| a.row(i).0.first().copied().unwrap_or(i).min(i)).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + i + 1 - first[i]);
        }
        let mut values = vec![0.0; offsets[n]];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    values[offsets[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let (done, rest) = values.split_at_mut(offsets[i]);
            let row_i = &mut rest[..i + 1 - first[i]];
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let s = if j < i {
                    let row_j = &done[offsets[j]..offsets[j + 1]];
                    let ri = &row_i[lo - first[i]..j - first[i]];
                    let rj = &row_j[lo - first[j]..j - first[j]];
                    ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>()
                } else {
                    row_i[lo - first[i]..i - first[i]].iter().map(|x| x * x).sum::<f64>()
                };
                let entry = row_i[j - first[i]] - s;
                if j < i {
                    row_i[j - first[i]] = entry / done[offsets[j + 1] - 1];
                } else {
                    if !(entry > 0.0) {
                        return Err(Error::Factorization(format!("non-positive pivot {entry:e} in row {i}")));
                    }
                    row_i[i - first[i]] = entry.sqrt();
                }
            }
        }
        Ok(Self { first, offsets, values })
    }

    pub fn n(&self) -> usize {
        self.first.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = row[..row.len() - 1].iter().zip(&y[self.first[i]..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[row.len() - 1];
        }
        for i in (0..n).rev() {
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            y[i] /= row[row.len() - 1];
            let xi = y[i];
            for (k, l) in (self.first[i]..i).zip(row) {
                y[k] -= l * xi;
            }
        }
        y
    }
}

/// Exact solver for a Laplacian. Singular (Neumann) operators are handled by
/// pinning the last unknown, solving the reduced SPD system and returning
/// the mean-free solution; the right-hand side must then sum to zero.
#[derive(Debug, Clone)]
pub struct LaplacianSolver {
    chol: EnvelopeCholesky,
    n: usize,
    singular: bool,
}

impl LaplacianSolver {
    pub fn new(a: &CsrMatrix, singular: bool) -> Result<Self> {
        let n = a.n_rows();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let chol =
            if singular { EnvelopeCholesky::factor(&leading_block(a, n - 1))? } else { EnvelopeCholesky::factor(a)? };
        Ok(Self { chol, n, singular })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        if !self.singular {
            return self.chol.solve(b);
        }
        let mut x = self.chol.solve(&b[..self.n - 1]);
        x.push(0.0);
        vecops::remove_mean(&mut x);
        x
    }
}

fn leading_block(a: &CsrMatrix, m: usize) -> CsrMatrix {
    let triplets: Vec<(usize, usize, f64)> = (0..m)
        .flat_map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter().zip(vals).filter(|(&j, _)| j < m).map(move |(&j, &v)| (i, j, v)).collect::<Vec<_>>()
        })
        .collect();
    CsrMatrix::from_triplets(m, m, &triplets).expect("indices within block")
}

/// Largest eigenvalue of `op`, which must be self-adjoint and positive
/// semidefinite in the inner product `<x, y> = x' G y`.
///
/// With `deflate_constants`, every vector is kept orthogonal to the
/// constant vector, which is how the seminorm case on a singular `G` is
/// handled. Full reorthogonalization keeps the Krylov basis clean; the
/// iteration stops when the Ritz residual of the top Ritz pair falls below
/// `tol` relative to its value.
pub fn lanczos_largest(
    gram: &CsrMatrix,
    mut op: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    start: Vec<f64>,
    deflate_constants: bool,
    max_iter: usize,
    tol: f64,
) -> Result<f64> {
    let g_norm = |x: &[f64], gx: &[f64]| vecops::dot(x, gx).max(0.0).sqrt();
    let mut v = start;
    if deflate_constants {
        vecops::remove_mean(&mut v);
    }
    let mut gv = gram.spmv(&v)?;
    let nv = g_norm(&v, &gv);
    if nv == 0.0 {
        return Ok(0.0);
    }
    vecops::scale(1.0 / nv, &mut v);
    vecops::scale(1.0 / nv, &mut gv);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut gbasis: Vec<Vec<f64>> = vec![gv];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for j in 0..max_iter {
        let mut w = op(&basis[j])?;
        if deflate_constants {
            vecops::remove_mean(&mut w);
        }
        alpha.push(vecops::dot(&w, &gbasis[j]));
        for _ in 0..2 {
            let coeffs: Vec<f64> = gbasis.par_iter().map(|gb| vecops::dot(&w, gb)).collect();
            for (c, b) in coeffs.iter().zip(&basis) {
                vecops::axpy(-c, b, &mut w);
            }
        }
        let mut gw = gram.spmv(&w)?;
        let b = g_norm(&w, &gw);

        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            t[(k, k)] = alpha[k];
            if k + 1 < m {
                t[(k, k + 1)] = beta[k];
                t[(k + 1, k)] = beta[k];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (top, &value) =
            eig.eigenvalues.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).expect("nonempty tridiagonal");
        theta = value;
        let residual = b * eig.eigenvectors[(m - 1, top)].abs();
        log::trace!("lanczos step {j}: theta {theta:.10}, residual {residual:e}");
        if residual <= tol * theta.abs().max(f64::MIN_POSITIVE) || b <= 1e-14 * theta.abs() {
            return Ok(theta);
        }
        beta.push(b);
        vecops::scale(1.0 / b, &mut w);
        vecops::scale(1.0 / b, &mut gw);
        basis.push(w);
        gbasis.push(gw);
    }
    log::debug!("lanczos stopped after {max_iter} steps at {theta}");
    Ok(theta)
}

/// Deterministic start vector with components spread over `[-1, 1]`.
pub fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| crate::aggregation::unit_random(0x5eed, 0, i) * 2.0 - 1.0).collect()
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix, dropping
/// eigenvalues below `rel_tol * max |eigenvalue|`.
pub fn symmetric_pseudo_inverse(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() > rel_tol * lmax {
            let u = eig.eigenvectors.column(k);
            out += (u * u.transpose()) / l;
        }
    }
    out
}
