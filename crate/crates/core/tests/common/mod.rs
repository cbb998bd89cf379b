#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use uaamg::{Aggregation, CsrMatrix, GraphProblem};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Connected graph: random spanning tree plus extra edges with probability `p`.
/// `boundary` vertices get a positive boundary weight.
pub fn random_connected_graph(rng: &mut StdRng, n: usize, p: f64, boundary: usize) -> GraphProblem {
    let mut pairs = BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        pairs.insert((j, i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                pairs.insert((i, j));
            }
        }
    }
    let edges = pairs.into_iter().map(|(i, j)| (i, j, rng.random_range(0.1..2.0))).collect();
    let mut bnd = BTreeSet::new();
    while bnd.len() < boundary.min(n) {
        bnd.insert(rng.random_range(0..n));
    }
    let boundary = bnd.into_iter().map(|v| (v, rng.random_range(0.1..2.0))).collect();
    GraphProblem::new(n, edges, boundary).unwrap()
}

pub fn adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    (0..a.n_rows()).map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect()).collect()
}

/// Hop distances from `src`, `usize::MAX` when unreachable.
pub fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Whether `set` induces a connected subgraph.
pub fn induces_connected(adj: &[Vec<usize>], set: &[usize]) -> bool {
    let Some(&first) = set.first() else { return false };
    let inside: BTreeSet<usize> = set.iter().copied().collect();
    let mut seen = BTreeSet::from([first]);
    let mut stack = vec![first];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if inside.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == inside.len()
}

pub fn prolongator(agg: &Aggregation) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(agg.n_fine(), agg.n_coarse());
    for (i, &k) in agg.vertex_to_agg().iter().enumerate() {
        p[(i, k)] = 1.0;
    }
    p
}

pub fn random_aggregation(rng: &mut StdRng, n: usize) -> Aggregation {
    let k = rng.random_range(1..=n);
    let mut map: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    for i in (1..n).rev() {
        map.swap(i, rng.random_range(0..=i));
    }
    Aggregation::from_map(&map).unwrap()
}

/// `sup |X v|_A / |v|_A` over `v` modulo the constants, for a Laplacian `A`
/// whose kernel is at most the constants and an `X` that maps constants to
/// constants. Grounds the last unknown and solves the generalized
/// eigenproblem with a Cholesky factor.
pub fn grounded_energy_norm(x: &DMatrix<f64>, a: &DMatrix<f64>, singular: bool) -> f64 {
    let n = a.nrows();
    let m = if singular { n - 1 } else { n };
    let xax = x.transpose() * a * x;
    let b = a.view((0, 0), (m, m)).into_owned();
    let c = xax.view((0, 0), (m, m)).into_owned();
    let l = b.cholesky().expect("grounded operator is definite").l();
    let linv = l.clone().try_inverse().unwrap();
    let g = &linv * c * linv.transpose();
    let g = (&g + g.transpose()) * 0.5;
    g.symmetric_eigenvalues().max().max(0.0).sqrt()
}

pub fn uniform_vector(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
