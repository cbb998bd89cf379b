use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CsrMatrix;
use crate::error::{Error, Result};

/// A positively weighted undirected graph plus optional boundary (mass)
/// weights. Its Laplacian is the matrix of the form
/// `sum_edges w_ij (u_i - u_j)(v_i - v_j) + sum_boundary wD_j u_j v_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphProblem {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    boundary: Vec<(usize, f64)>,
}

impl GraphProblem {
    /// Validates and normalizes the edge list so every edge is stored as
    /// `(i, j, w)` with `i < j`. Duplicate edges are rejected, not summed.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>, boundary: Vec<(usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, j, w) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { index: v, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { what: format!("edge ({i}, {j})"), weight: w });
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if !seen.insert((a, b)) {
                return Err(Error::DuplicateEdge(a, b));
            }
            normalized.push((a, b, w));
        }
        let mut seen_boundary = HashSet::with_capacity(boundary.len());
        for &(j, w) in &boundary {
            if j >= n {
                return Err(Error::VertexOutOfRange { index: j, n });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { what: format!("boundary vertex {j}"), weight: w });
            }
            if !seen_boundary.insert(j) {
                return Err(Error::InvalidStructure(format!("duplicate boundary entry for vertex {j}")));
            }
        }
        Ok(Self { n, edges: normalized, boundary })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn boundary(&self) -> &[(usize, f64)] {
        &self.boundary
    }

    /// Pure Neumann problem: no boundary weights, so the constant vector is
    /// in the null space.
    pub fn singular(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn assemble_laplacian(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(4 * self.edges.len() + self.boundary.len() + self.n);
        let mut diag = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
            diag[i] += w;
            diag[j] += w;
        }
        for &(j, w) in &self.boundary {
            diag[j] += w;
        }
        triplets.extend(diag.iter().enumerate().map(|(i, &d)| (i, i, d)));
        CsrMatrix::from_triplets(self.n, self.n, &triplets).expect("validated indices")
    }

    /// Quadratic form evaluated straight from the edge list.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let e: f64 = self.edges.iter().map(|&(i, j, w)| w * (x[i] - x[j]).powi(2)).sum();
        let b: f64 = self.boundary.iter().map(|&(j, w)| w * x[j] * x[j]).sum();
        e + b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl FromStr for BoundaryCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(Self::Dirichlet),
            "neumann" | "n" => Ok(Self::Neumann),
            other => Err(format!("unknown boundary condition '{other}'")),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dirichlet => f.write_str("dirichlet"),
            Self::Neumann => f.write_str("neumann"),
        }
    }
}

/// `n x n` lattice, vertex `(r, c)` numbered `r * n + c`. Horizontal edges
/// carry `weights.0`, vertical edges `weights.1`.
///
/// With Dirichlet conditions the eliminated off-grid neighbours of a
/// boundary-adjacent vertex reappear as its boundary weight, which gives the
/// usual 5-point stencil rows.
pub fn generate_structured_grid(n: usize, bc: BoundaryCondition, weights: (f64, f64)) -> Result<GraphProblem> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("grid size must be at least 2, got {n}")));
    }
    let (wh, wv) = weights;
    let idx = |r: usize, c: usize| r * n + c;
    let mut edges = Vec::with_capacity(2 * n * (n - 1));
    for r in 0..n {
        for c in 0..n {
            if c + 1 < n {
                edges.push((idx(r, c), idx(r, c + 1), wh));
            }
            if r + 1 < n {
                edges.push((idx(r, c), idx(r + 1, c), wv));
            }
        }
    }
    let mut boundary = Vec::new();
    if bc == BoundaryCondition::Dirichlet {
        for r in 0..n {
            for c in 0..n {
                let mut w = 0.0;
                if c == 0 {
                    w += wh;
                }
                if c == n - 1 {
                    w += wh;
                }
                if r == 0 {
                    w += wv;
                }
                if r == n - 1 {
                    w += wv;
                }
                if w > 0.0 {
                    boundary.push((idx(r, c), w));
                }
            }
        }
    }
    GraphProblem::new(n * n, edges, boundary)
}
