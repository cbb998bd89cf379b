//! Shape improvement for pairs of neighbouring aggregates.
//!
//! For the union of two aggregates with local Laplacian `Â`, every balanced
//! split into two connected halves defines a one-dimensional coarse space
//! (mean-free piecewise constants). The split whose coarse space captures
//! the most smoother energy, i.e. maximizes `|T|` with `T = Q_Â Ŝ`, gives
//! the best two-level method on the pair.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::Aggregation;
use crate::error::{Error, Result};
use crate::linalg::symmetric_pseudo_inverse;
use crate::solvers::{SmootherKind, SmootherSpec};
use crate::sparse::{CsrMatrix, GraphProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReshapeConfig {
    /// Number of sweeps over matched aggregate pairs; 0 disables reshaping.
    pub sweeps: usize,
    pub smoother: SmootherSpec,
    /// Pairs with more vertices than this are left unchanged.
    pub pair_cap: usize,
}

impl Default for ReshapeConfig {
    fn default() -> Self {
        Self { sweeps: 0, smoother: SmootherSpec::l1(1), pair_cap: 16 }
    }
}

impl ReshapeConfig {
    pub fn sweeps(sweeps: usize) -> Self {
        Self { sweeps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.smoother.validate()?;
        if !(2..=63).contains(&self.pair_cap) {
            return Err(Error::InvalidConfig(format!("pair cap {} outside 2..=63", self.pair_cap)));
        }
        Ok(())
    }
}

/// Dense local problem on the union of two aggregates.
#[derive(Debug, Clone)]
pub struct LocalPairProblem {
    a_hat: DMatrix<f64>,
    members: Vec<usize>,
    /// `true` marks side 1.
    split: Vec<bool>,
    singular: bool,
}

impl LocalPairProblem {
    pub fn new(a_hat: DMatrix<f64>, members: Vec<usize>, split: Vec<bool>) -> Result<Self> {
        let n = a_hat.nrows();
        if a_hat.ncols() != n {
            return Err(Error::NotSquare { rows: n, cols: a_hat.ncols() });
        }
        for len in [members.len(), split.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        if n < 2 || split.iter().all(|&s| s) || split.iter().all(|&s| !s) {
            return Err(Error::InvalidStructure("a pair split needs two nonempty sides".into()));
        }
        let scale = a_hat.amax().max(f64::MIN_POSITIVE);
        if (&a_hat - a_hat.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidStructure("local operator is not symmetric".into()));
        }
        let adj = adjacency_masks(&a_hat);
        if !connected(&adj, full_mask(n)) {
            return Err(Error::DisconnectedPair);
        }
        let singular = a_hat.row_iter().all(|r| r.sum().abs() <= 1e-12 * scale);
        Ok(Self { a_hat, members, split, singular })
    }

    /// Neumann Laplacian of the subgraph induced by aggregates `i` and `j`
    /// of `agg`; the current split puts aggregate `i` on side 1.
    pub fn from_pair(a: &CsrMatrix, agg: &Aggregation, i: usize, j: usize) -> Result<Self> {
        let map = agg.vertex_to_agg();
        let members: Vec<usize> = (0..agg.n_fine()).filter(|&v| map[v] == i || map[v] == j).collect();
        let split = members.iter().map(|&v| map[v] == i).collect();
        Self::new(induced_laplacian(a, &members), members, split)
    }

    /// The whole graph as the pair, e.g. for small worked examples.
    pub fn from_graph(g: &GraphProblem, split: Vec<bool>) -> Result<Self> {
        Self::new(g.assemble_laplacian().to_dense(), (0..g.n()).collect(), split)
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn a_hat(&self) -> &DMatrix<f64> {
        &self.a_hat
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn split(&self) -> &[bool] {
        &self.split
    }

    pub fn singular(&self) -> bool {
        self.singular
    }

    pub fn with_split(&self, split: Vec<bool>) -> Result<Self> {
        Self::new(self.a_hat.clone(), self.members.clone(), split)
    }
}

/// Neumann Laplacian of the subgraph of `a` induced by `members` (sorted):
/// couplings to outside vertices and boundary weights are dropped.
pub fn induced_laplacian(a: &CsrMatrix, members: &[usize]) -> DMatrix<f64> {
    let n = members.len();
    let mut m = DMatrix::zeros(n, n);
    for (li, &v) in members.iter().enumerate() {
        let (cols, vals) = a.row(v);
        for (&c, &x) in cols.iter().zip(vals) {
            if c == v {
                continue;
            }
            if let Ok(lj) = members.binary_search(&c) {
                m[(li, lj)] = x;
                m[(li, li)] -= x;
            }
        }
    }
    m
}

/// One-dimensional coarse space spanned by `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoarseSpace {
    w: DVector<f64>,
}

impl PairCoarseSpace {
    /// `w = 1_{V1} / |V1| - 1_{V2} / |V2|`, orthogonal to constants.
    pub fn from_split(split: &[bool]) -> Self {
        let n1 = split.iter().filter(|&&s| s).count() as f64;
        let n2 = split.len() as f64 - n1;
        Self { w: DVector::from_iterator(split.len(), split.iter().map(|&s| if s { 1.0 / n1 } else { -1.0 / n2 })) }
    }

    pub fn from_vector(w: DVector<f64>) -> Self {
        Self { w }
    }

    pub fn basis(&self) -> &DVector<f64> {
        &self.w
    }
}

/// `Ŝ`, `Q_Â`, `E = (I - Q_Â) Ŝ` and `T = Q_Â Ŝ` on a local problem.
#[derive(Debug, Clone)]
pub struct LocalOperators {
    pub s: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub t: DMatrix<f64>,
}

/// `(I - M^{-1} A)^sweeps` for the given pointwise smoother.
pub fn smoother_operator(a: &DMatrix<f64>, smoother: &SmootherSpec) -> Result<DMatrix<f64>> {
    smoother.validate()?;
    let n = a.nrows();
    let mut step = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        let m = match smoother.kind {
            SmootherKind::Jacobi { omega } => a[(i, i)] / omega,
            SmootherKind::L1Jacobi => a[(i, i)] + (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<f64>(),
        };
        if !(m > 0.0) {
            return Err(Error::ZeroDiagonal { row: i });
        }
        for j in 0..n {
            step[(i, j)] -= a[(i, j)] / m;
        }
    }
    let mut s = DMatrix::<f64>::identity(n, n);
    for _ in 0..smoother.sweeps {
        s = &step * s;
    }
    Ok(s)
}

fn projection(a: &DMatrix<f64>, w: &DVector<f64>) -> Result<DMatrix<f64>> {
    let aw = a * w;
    let energy = w.dot(&aw);
    if !(energy > 1e-14 * a.amax() * w.norm_squared()) {
        return Err(Error::DisconnectedPair);
    }
    Ok(w * aw.transpose() / energy)
}

pub fn local_error_operators(
    prob: &LocalPairProblem,
    space: &PairCoarseSpace,
    smoother: &SmootherSpec,
) -> Result<LocalOperators> {
    let s = smoother_operator(&prob.a_hat, smoother)?;
    let q = projection(&prob.a_hat, &space.w)?;
    let n = prob.n();
    let e = (DMatrix::identity(n, n) - &q) * &s;
    let t = &q * &s;
    Ok(LocalOperators { s, q, e, t })
}

/// Trace of a rank-one matrix from a single row and column:
/// `tr(W) = (W_k,: . W_:,k) / W_kk` for the first `k` with a non-negligible
/// diagonal entry. Returns 0 when every diagonal entry is negligible.
pub fn rank_one_trace(w: &DMatrix<f64>) -> f64 {
    let tol = 1e-12 * w.norm();
    match (0..w.nrows()).find(|&k| w[(k, k)].abs() > tol) {
        Some(k) => w.row(k).transpose().dot(&w.column(k)) / w[(k, k)],
        None => 0.0,
    }
}

/// Evaluates `|T|²_Â` for many coarse spaces on one local problem, with the
/// smoother and pseudo-inverse computed once.
pub struct PairEvaluator {
    a_hat: DMatrix<f64>,
    s: DMatrix<f64>,
    /// `Ŝ' Â`, shared by every `W`.
    st_a: DMatrix<f64>,
    /// `Ŝ Â^+`.
    s_pinv: DMatrix<f64>,
}

impl PairEvaluator {
    pub fn new(prob: &LocalPairProblem, smoother: &SmootherSpec) -> Result<Self> {
        let s = smoother_operator(&prob.a_hat, smoother)?;
        let pinv = symmetric_pseudo_inverse(&prob.a_hat, 1e-12);
        Ok(Self { st_a: s.transpose() * &prob.a_hat, s_pinv: &s * pinv, s, a_hat: prob.a_hat.clone() })
    }

    pub fn smoother(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// `W = Ŝ' Â Q_Â Ŝ Â^+`, a rank-one matrix whose trace is `|T|²_Â`.
    pub fn w_matrix(&self, space: &PairCoarseSpace) -> Result<DMatrix<f64>> {
        let q = projection(&self.a_hat, &space.w)?;
        Ok(&self.st_a * q * &self.s_pinv)
    }

    pub fn t_norm(&self, space: &PairCoarseSpace) -> Result<f64> {
        Ok(rank_one_trace(&self.w_matrix(space)?))
    }
}

/// `|T(V_c)|²_Â`, the squared energy seminorm of `T = Q_Â Ŝ`.
pub fn t_norm(prob: &LocalPairProblem, space: &PairCoarseSpace, smoother: &SmootherSpec) -> Result<f64> {
    PairEvaluator::new(prob, smoother)?.t_norm(space)
}

/// Operator seminorm `sup |X v|_Â / |v|_Â` over `v` outside the null space
/// of `Â`, by a similarity transform onto the range of `Â`.
pub fn energy_seminorm(x: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    let eig = a.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..a.nrows()).filter(|&k| eig.eigenvalues[k] > 1e-12 * lmax).collect();
    let n = a.nrows();
    let r = keep.len();
    let mut half = DMatrix::zeros(r, n);
    let mut half_inv = DMatrix::zeros(n, r);
    for (c, &k) in keep.iter().enumerate() {
        let l = eig.eigenvalues[k].sqrt();
        let u = eig.eigenvectors.column(k);
        half.row_mut(c).copy_from(&(u.transpose() * l));
        half_inv.column_mut(c).copy_from(&(u / l));
    }
    let m = half * x * half_inv;
    m.singular_values().amax()
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn adjacency_masks(a: &DMatrix<f64>) -> Vec<u64> {
    let n = a.nrows();
    (0..n).map(|i| (0..n).filter(|&j| j != i && a[(i, j)] != 0.0).fold(0u64, |m, j| m | 1 << j)).collect()
}

fn connected(adj: &[u64], mask: u64) -> bool {
    if mask == 0 {
        return false;
    }
    let mut seen = 1u64 << mask.trailing_zeros();
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = adj[v] & mask & !seen;
        seen |= new;
        frontier |= new;
    }
    seen == mask
}

/// Every split with `floor(n/2)` vertices on side 1 and both sides
/// connected. For even `n` each unordered split appears once, with local
/// vertex 0 on side 1; for odd `n` side 1 is the smaller side.
pub fn enumerate_balanced_partitions(prob: &LocalPairProblem, cap: usize) -> Result<Vec<Vec<bool>>> {
    let n = prob.n();
    if n > cap || n > 63 {
        return Err(Error::PairTooLarge { size: n, cap });
    }
    let adj = adjacency_masks(&prob.a_hat);
    let full = full_mask(n);
    let m = n / 2;
    let mut out = Vec::new();
    if m == 0 {
        return Ok(out);
    }
    // Gosper's hack walks all m-subsets in increasing numeric order.
    let mut s: u64 = (1u64 << m) - 1;
    while s <= full {
        let canonical = n % 2 == 1 || s & 1 == 1;
        if canonical && connected(&adj, s) && connected(&adj, full & !s) {
            out.push((0..n).map(|i| s >> i & 1 == 1).collect());
        }
        let c = s & s.wrapping_neg();
        let r = s + c;
        if r > full || r == 0 {
            break;
        }
        s = (((r ^ s) >> 2) / c) | r;
    }
    Ok(out)
}

/// `true` when membership vector `a` (side 1 before side 2) precedes `b`.
fn lex_smaller(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, _)| *x)
}

/// The balanced connected split maximizing `|T|_Â`. Near-ties (relative
/// 1e-12) go to the lexicographically smallest membership vector. When no
/// balanced connected split exists the current split is returned.
pub fn reshape_pair(prob: &LocalPairProblem, smoother: &SmootherSpec, cap: usize) -> Result<Vec<bool>> {
    let splits = enumerate_balanced_partitions(prob, cap)?;
    let eval = PairEvaluator::new(prob, smoother)?;
    let scored = splits
        .into_par_iter()
        .map(|s| Ok((eval.t_norm(&PairCoarseSpace::from_split(&s))?, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, Vec<bool>)> = None;
    for (t, s) in scored {
        best = match best {
            None => Some((t, s)),
            Some((bt, bs)) => {
                let tie = (t - bt).abs() <= 1e-12 * bt.abs().max(t.abs());
                if (!tie && t > bt) || (tie && lex_smaller(&s, &bs)) {
                    Some((t, s))
                } else {
                    Some((bt, bs))
                }
            }
        };
    }
    Ok(best.map(|b| b.1).unwrap_or_else(|| prob.split.clone()))
}

/// Coarse adjacency: aggregate pairs `(I, J)`, `I < J`, joined by a fine
/// edge, in ascending order.
pub fn coarse_edges(a: &CsrMatrix, agg: &Aggregation) -> Vec<(usize, usize)> {
    let map = agg.vertex_to_agg();
    let mut edges: Vec<(usize, usize)> = (0..a.n_rows())
        .flat_map(|i| {
            a.row(i).0.iter().filter(move |&&j| map[i] < map[j]).map(move |&j| (map[i], map[j])).collect::<Vec<_>>()
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Greedy maximal matching over edges taken in the given order.
pub fn greedy_matching(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for &(i, j) in edges {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Reshapes matched pairs of neighbouring aggregates, `cfg.sweeps` times.
///
/// The number of aggregates is unchanged. Each aggregate keeps as seed its
/// old seed when it still contains one, otherwise its smallest member, and
/// aggregates are renumbered in seed order.
pub fn reshape_sweep(a: &CsrMatrix, agg: &Aggregation, cfg: &ReshapeConfig) -> Result<Aggregation> {
    cfg.validate()?;
    if a.n_rows() != agg.n_fine() {
        return Err(Error::DimensionMismatch { expected: agg.n_fine(), found: a.n_rows() });
    }
    let mut current = agg.clone();
    for sweep in 0..cfg.sweeps {
        let pairs = greedy_matching(current.n_coarse(), &coarse_edges(a, &current));
        let results: Vec<Option<(Vec<usize>, Vec<bool>)>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let size = current.agg_sizes()[i] + current.agg_sizes()[j];
                if size > cfg.pair_cap {
                    log::debug!("sweep {sweep}: pair ({i}, {j}) of {size} vertices skipped");
                    return Ok(None);
                }
                let prob = LocalPairProblem::from_pair(a, &current, i, j)?;
                let split = reshape_pair(&prob, &cfg.smoother, cfg.pair_cap)?;
                if log::log_enabled!(log::Level::Trace) {
                    let eval = PairEvaluator::new(&prob, &cfg.smoother)?;
                    let old = eval.t_norm(&PairCoarseSpace::from_split(prob.split()))?;
                    let new = eval.t_norm(&PairCoarseSpace::from_split(&split))?;
                    log::trace!("pair ({i}, {j}) size {size}: |T|^2 {old:.6} -> {new:.6}");
                }
                Ok(Some((prob.members, split)))
            })
            .collect::<Result<_>>()?;

        let seeds = current.coarse_vertex_of_agg();
        let mut map = current.vertex_to_agg().to_vec();
        let mut rep: Vec<usize> = seeds.to_vec();
        for (&(i, j), res) in pairs.iter().zip(&results) {
            let Some((members, split)) = res else { continue };
            let side = |flag: bool| -> Vec<usize> {
                members.iter().zip(split).filter(|(_, &s)| s == flag).map(|(&v, _)| v).collect()
            };
            let (x, y) = (side(true), side(false));
            let pick = |group: &[usize]| {
                [seeds[i], seeds[j]].into_iter().find(|c| group.contains(c)).unwrap_or_else(|| group[0])
            };
            let (rx, ry) = (pick(&x), pick(&y));
            // Side containing seed i keeps label i unless only side y does.
            let (lx, ly) = if ry == seeds[i] { (j, i) } else { (i, j) };
            for &v in &x {
                map[v] = lx;
            }
            for &v in &y {
                map[v] = ly;
            }
            rep[lx] = rx;
            rep[ly] = ry;
        }
        let mut order: Vec<usize> = (0..rep.len()).collect();
        order.sort_unstable_by_key(|&k| rep[k]);
        let mut relabel = vec![0; rep.len()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new;
        }
        let vertex_to_agg = map.iter().map(|&k| relabel[k]).collect();
        current = Aggregation::new(vertex_to_agg, order.iter().map(|&k| rep[k]).collect())?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{generate_structured_grid, BoundaryCondition};

    fn graph_problem(n: usize, edges: &[(usize, usize)], split: &[bool]) -> LocalPairProblem {
        let g = GraphProblem::new(n, edges.iter().map(|&(i, j)| (i, j, 1.0)).collect(), vec![]).unwrap();
        LocalPairProblem::from_graph(&g, split.to_vec()).unwrap()
    }

    #[test]
    fn rank_one_trace_of_outer_product() {
        let u = DVector::from_vec(vec![1.0, 2.0]);
        assert!((rank_one_trace(&(&u * u.transpose())) - 5.0).abs() < 1e-15);
        let v = DVector::from_vec(vec![0.0, 3.0]);
        let w = DVector::from_vec(vec![4.0, -1.0]);
        assert!((rank_one_trace(&(&v * w.transpose())) + 3.0).abs() < 1e-15);
        assert_eq!(rank_one_trace(&DMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn two_vertex_pair_has_zero_error() {
        let prob = graph_problem(2, &[(0, 1)], &[true, false]);
        let ops =
            local_error_operators(&prob, &PairCoarseSpace::from_split(prob.split()), &SmootherSpec::l1(1)).unwrap();
        assert!(energy_seminorm(&ops.e, prob.a_hat()) < 1e-14);
    }

    #[test]
    fn error_and_t_split_the_smoother_energy() {
        let prob =
            graph_problem(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)], &[true, true, false, false, false]);
        let ops =
            local_error_operators(&prob, &PairCoarseSpace::from_split(prob.split()), &SmootherSpec::l1(1)).unwrap();
        let a = prob.a_hat();
        for k in 0..5 {
            let mut v = DVector::from_fn(5, |i, _| ((i * 7 + k * 3) % 5) as f64 - 1.5);
            v.add_scalar_mut(-v.mean());
            let en = |x: &DVector<f64>| x.dot(&(a * x));
            let lhs = en(&(&ops.e * &v)) + en(&(&ops.t * &v));
            assert!((lhs - en(&(&ops.s * &v))).abs() < 1e-12);
        }
    }

    #[test]
    fn t_norm_trace_matches_seminorm() {
        let prob = graph_problem(4, &[(0, 1), (1, 2), (2, 3)], &[true, true, false, false]);
        let space = PairCoarseSpace::from_split(prob.split());
        let t2 = t_norm(&prob, &space, &SmootherSpec::l1(1)).unwrap();
        let ops = local_error_operators(&prob, &space, &SmootherSpec::l1(1)).unwrap();
        assert!((t2 - energy_seminorm(&ops.t, prob.a_hat()).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn four_cycle_has_two_unordered_splits() {
        let prob = graph_problem(4, &[(0, 1), (1, 3), (3, 2), (2, 0)], &[true, true, false, false]);
        let splits = enumerate_balanced_partitions(&prob, 16).unwrap();
        assert_eq!(splits, vec![vec![true, true, false, false], vec![true, false, true, false]]);
    }

    #[test]
    fn path2_single_split() {
        let prob = graph_problem(2, &[(0, 1)], &[true, false]);
        assert_eq!(enumerate_balanced_partitions(&prob, 16).unwrap().len(), 1);
    }

    #[test]
    fn star_has_no_split_with_both_sides_connected() {
        let prob = graph_problem(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], &[true, true, false, false, false]);
        assert!(enumerate_balanced_partitions(&prob, 16).unwrap().is_empty());
        assert_eq!(reshape_pair(&prob, &SmootherSpec::l1(1), 16).unwrap(), prob.split());
    }

    #[test]
    fn oversized_pair_is_reported() {
        let prob = graph_problem(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], &[true, true, false, false, false]);
        assert!(matches!(enumerate_balanced_partitions(&prob, 4), Err(Error::PairTooLarge { size: 5, cap: 4 })));
    }

    #[test]
    fn disconnected_pair_rejected() {
        let g = GraphProblem::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)], vec![]).unwrap();
        assert!(matches!(
            LocalPairProblem::from_graph(&g, vec![true, true, false, false]),
            Err(Error::DisconnectedPair)
        ));
    }

    #[test]
    fn symmetric_square_keeps_its_split() {
        let prob = graph_problem(4, &[(0, 1), (1, 3), (3, 2), (2, 0)], &[true, true, false, false]);
        let best = reshape_pair(&prob, &SmootherSpec::l1(1), 16).unwrap();
        assert_eq!(best, prob.split());
    }

    #[test]
    fn path4_pair_splits_in_the_middle() {
        let a = GraphProblem::new(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], vec![]).unwrap().assemble_laplacian();
        let agg = Aggregation::new(vec![0, 1, 1, 1], vec![0, 1]).unwrap();
        let out = reshape_sweep(&a, &agg, &ReshapeConfig::sweeps(1)).unwrap();
        assert_eq!(out.vertex_to_agg(), &[0, 0, 1, 1]);
    }

    #[test]
    fn singletons_are_unchanged() {
        let a = generate_structured_grid(3, BoundaryCondition::Neumann, (1.0, 1.0)).unwrap().assemble_laplacian();
        let agg = Aggregation::singletons(9);
        assert_eq!(reshape_sweep(&a, &agg, &ReshapeConfig::sweeps(2)).unwrap(), agg);
    }

    #[test]
    fn greedy_matching_is_maximal() {
        let m = greedy_matching(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]);
        assert_eq!(m, vec![(0, 1), (2, 3)]);
    }
}
