//! Compressed-row sparse matrices and graph-Laplacian construction.

mod graph;
pub mod io;

pub use graph::{generate_structured_grid, BoundaryCondition, GraphProblem};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sparse matrix in canonical CSR form: columns strictly increasing within
/// each row and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural
    /// invariant. Explicit zeros are removed.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets[0] must be 0".into()));
        }
        if row_offsets[n_rows] != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::InvalidStructure("row_offsets, col_indices and values disagree on nnz".into()));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::InvalidStructure(format!("row_offsets decreases at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.iter().any(|&c| c >= n_cols) {
                return Err(Error::InvalidStructure(format!("column out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!("columns not strictly increasing in row {i}")));
            }
        }
        let mut m = Self { n_rows, n_cols, row_offsets, col_indices, values };
        m.drop_zeros();
        Ok(m)
    }

    /// Assembles from (row, col, value) triplets. Duplicates are summed and
    /// resulting zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidStructure(format!("entry ({r}, {c}) outside {n_rows}x{n_cols}")));
            }
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            entries[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for i in 0..n_rows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let triplets: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(n, n, &triplets).expect("diagonal entries are in range")
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, row_offsets: vec![0; n_rows + 1], col_indices: Vec::new(), values: Vec::new() }
    }

    /// Dense to sparse, dropping exact zeros.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    triplets.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &triplets).expect("dense indices are in range")
    }

    fn drop_zeros(&mut self) {
        if !self.values.contains(&0.0) {
            return;
        }
        let mut w = 0;
        let mut new_offsets = Vec::with_capacity(self.n_rows + 1);
        new_offsets.push(0);
        for i in 0..self.n_rows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                if self.values[k] != 0.0 {
                    self.col_indices[w] = self.col_indices[k];
                    self.values[w] = self.values[k];
                    w += 1;
                }
            }
            new_offsets.push(w);
        }
        self.col_indices.truncate(w);
        self.values.truncate(w);
        self.row_offsets = new_offsets;
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Number of stored off-diagonal entries of row `i` (the vertex degree
    /// for a graph Laplacian).
    pub fn off_diagonal_count(&self, i: usize) -> usize {
        let (cols, _) = self.row(i);
        cols.len() - usize::from(cols.binary_search(&i).is_ok())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Largest absolute row sum (the induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, found: x.len() });
        }
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// y = A x into a caller-provided buffer. Each row is accumulated
    /// sequentially in column order, so the output is bit-identical for any
    /// thread count.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "spmv: x has wrong length");
        assert_eq!(y.len(), self.n_rows, "spmv: y has wrong length");
        y.par_iter_mut().with_min_len(256).enumerate().for_each(|(i, yi)| {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            *yi = acc;
        });
    }

    /// r = b - A x.
    pub fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut r);
        r.par_iter_mut().zip(b.par_iter()).for_each(|(ri, bi)| *ri = bi - *ri);
        r
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                col_indices[next[*c]] = i;
                values[next[*c]] = *v;
                next[*c] += 1;
            }
        }
        Self { n_rows: self.n_cols, n_cols: self.n_rows, row_offsets: counts, col_indices, values }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let t = self.transpose();
        if t.col_indices != self.col_indices || t.row_offsets != self.row_offsets {
            return false;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        self.values.iter().zip(&t.values).all(|(a, b)| (a - b).abs() <= tol * scale)
    }

    /// Structural pattern of A·A: row `i` lists every vertex within graph
    /// distance two of `i`, including `i` itself. Values are all one.
    pub fn squared_pattern(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.n_rows, cols: self.n_cols });
        }
        let n = self.n_rows;
        let rows: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .with_min_len(64)
            .map(|i| {
                let mut reach = vec![i];
                for &j in self.row(i).0 {
                    reach.push(j);
                    reach.extend_from_slice(self.row(j).0);
                }
                reach.sort_unstable();
                reach.dedup();
                reach
            })
            .collect();
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for r in rows {
            col_indices.extend_from_slice(&r);
            row_offsets.push(col_indices.len());
        }
        let values = vec![1.0; col_indices.len()];
        Ok(Self { n_rows: n, n_cols: n, row_offsets, col_indices, values })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                m[(i, *c)] = *v;
            }
        }
        m
    }

    /// True when every row sums to zero up to `tol` relative to the row's
    /// diagonal, i.e. the constant vector is in the null space.
    pub fn annihilates_constants(&self, tol: f64) -> bool {
        (0..self.n_rows).all(|i| {
            let (cols, vals) = self.row(i);
            let s: f64 = vals.iter().sum();
            let scale: f64 = cols.iter().zip(vals).map(|(_, v)| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            s.abs() <= tol * scale
        })
    }
}
