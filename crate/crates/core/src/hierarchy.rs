//! Multilevel setup: repeated aggregation, optional reshaping and Galerkin
//! coarsening, with a dense direct solver on the coarsest level.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, Aggregation, AggregationConfig};
use crate::error::{Error, Result};
use crate::linalg::symmetric_pseudo_inverse;
use crate::reshaping::{reshape_sweep, ReshapeConfig};
use crate::sparse::CsrMatrix;
use crate::vecops;

/// Largest coarsest level that will be factored densely.
const MAX_DENSE_COARSE: usize = 8192;

/// Coarse operator by entry summation: `(A_c)_IJ` is the sum of `a_st` over
/// `s` in aggregate `I` and `t` in aggregate `J`. Equals `P' A P` for the
/// piecewise-constant prolongation `P`, which is never formed.
pub fn galerkin_coarse(a: &CsrMatrix, agg: &Aggregation) -> Result<CsrMatrix> {
    if a.n_rows() != agg.n_fine() || a.n_cols() != agg.n_fine() {
        return Err(Error::DimensionMismatch { expected: agg.n_fine(), found: a.n_rows() });
    }
    let (offsets, members) = agg.members();
    let map = agg.vertex_to_agg();
    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..agg.n_coarse())
        .into_par_iter()
        .with_min_len(64)
        .map(|k| {
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for &s in &members[offsets[k]..offsets[k + 1]] {
                let (cols, vals) = a.row(s);
                entries.extend(cols.iter().zip(vals).map(|(&t, &v)| (map[t], v)));
            }
            // Stable sort keeps the fine-index summation order fixed.
            entries.sort_by_key(|e| e.0);
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            let mut i = 0;
            while i < entries.len() {
                let c = entries[i].0;
                let mut v = 0.0;
                while i < entries.len() && entries[i].0 == c {
                    v += entries[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            (cols, vals)
        })
        .collect();
    let mut row_offsets = Vec::with_capacity(rows.len() + 1);
    row_offsets.push(0);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    for (c, v) in rows {
        col_indices.extend(c);
        values.extend(v);
        row_offsets.push(col_indices.len());
    }
    CsrMatrix::new(agg.n_coarse(), agg.n_coarse(), row_offsets, col_indices, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SetupConfig {
    /// Stop coarsening once a level has at most this many unknowns.
    pub n0: usize,
    pub max_levels: usize,
    pub aggregation: AggregationConfig,
    pub reshape: ReshapeConfig,
}

impl Default for SetupConfig {
    fn default() -> Self {
        Self { n0: 100, max_levels: 20, aggregation: AggregationConfig::default(), reshape: ReshapeConfig::default() }
    }
}

impl SetupConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_levels == 0 {
            return Err(Error::InvalidConfig("max_levels must be at least 1".into()));
        }
        self.aggregation.validate()?;
        self.reshape.validate()
    }
}

/// Exact solver for the coarsest level.
#[derive(Debug, Clone)]
pub enum CoarseSolver {
    Cholesky(Cholesky<f64, Dyn>),
    /// Used for singular operators; the result is the minimum-norm
    /// solution, which is orthogonal to the constant vector.
    PseudoInverse(DMatrix<f64>),
}

impl CoarseSolver {
    pub fn new(a: &CsrMatrix, singular: bool) -> Result<Self> {
        let n = a.n_rows();
        if n > MAX_DENSE_COARSE {
            return Err(Error::InvalidConfig(format!(
                "coarsest level has {n} unknowns, above the dense limit {MAX_DENSE_COARSE}"
            )));
        }
        let dense = a.to_dense();
        if !singular {
            if let Some(c) = Cholesky::new(dense.clone()) {
                return Ok(Self::Cholesky(c));
            }
            log::warn!("coarsest Cholesky failed on {n} unknowns, using pseudo-inverse");
        }
        Ok(Self::PseudoInverse(symmetric_pseudo_inverse(&dense, 1e-12)))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(b);
        let x = match self {
            Self::Cholesky(c) => c.solve(&b),
            Self::PseudoInverse(p) => p * b,
        };
        x.as_slice().to_vec()
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub matrix: CsrMatrix,
    /// Aggregation of this level's vertices into the next level's; `None`
    /// on the coarsest level.
    pub aggregation: Option<Aggregation>,
}

/// Levels ordered finest (0) to coarsest.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<Level>,
    coarse_solver: CoarseSolver,
    singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub n: usize,
    pub nnz: usize,
    /// `n_l / n_{l+1}`; absent on the coarsest level.
    pub coarsening_ratio: Option<f64>,
    pub max_aggregate: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySummary {
    pub singular: bool,
    pub levels: Vec<LevelSummary>,
    pub grid_complexity: f64,
    pub operator_complexity: f64,
}

impl Hierarchy {
    /// Assembles a hierarchy from precomputed levels, e.g. a hand-built
    /// aggregation sequence. Coarse operators are recomputed from `a` and
    /// the aggregations.
    pub fn from_aggregations(a: CsrMatrix, aggregations: Vec<Aggregation>) -> Result<Self> {
        let singular = a.annihilates_constants(1e-12);
        let mut levels = Vec::with_capacity(aggregations.len() + 1);
        let mut current = a;
        for agg in aggregations {
            let coarse = galerkin_coarse(&current, &agg)?;
            levels.push(Level { matrix: current, aggregation: Some(agg) });
            current = coarse;
        }
        let coarse_solver = CoarseSolver::new(&current, singular)?;
        levels.push(Level { matrix: current, aggregation: None });
        Ok(Self { levels, coarse_solver, singular })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn matrix(&self, level: usize) -> &CsrMatrix {
        &self.levels[level].matrix
    }

    pub fn aggregation(&self, level: usize) -> Option<&Aggregation> {
        self.levels[level].aggregation.as_ref()
    }

    pub fn singular(&self) -> bool {
        self.singular
    }

    pub fn coarse_solver(&self) -> &CoarseSolver {
        &self.coarse_solver
    }

    pub fn coarsest(&self) -> usize {
        self.levels.len() - 1
    }

    /// Solves on the coarsest level, projecting the right-hand side onto the
    /// range when the operator is singular.
    pub fn coarse_solve(&self, b: &[f64]) -> Vec<f64> {
        if self.singular {
            let mut b = b.to_vec();
            vecops::remove_mean(&mut b);
            let mut x = self.coarse_solver.solve(&b);
            vecops::remove_mean(&mut x);
            x
        } else {
            self.coarse_solver.solve(b)
        }
    }

    pub fn grid_complexity(&self) -> f64 {
        let n0 = self.levels[0].matrix.n_rows() as f64;
        self.levels.iter().map(|l| l.matrix.n_rows() as f64).sum::<f64>() / n0
    }

    pub fn operator_complexity(&self) -> f64 {
        let nnz0 = self.levels[0].matrix.nnz().max(1) as f64;
        self.levels.iter().map(|l| l.matrix.nnz() as f64).sum::<f64>() / nnz0
    }

    pub fn summary(&self) -> HierarchySummary {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(l, lev)| LevelSummary {
                level: l,
                n: lev.matrix.n_rows(),
                nnz: lev.matrix.nnz(),
                coarsening_ratio: lev.aggregation.as_ref().map(Aggregation::coarsening_ratio),
                max_aggregate: lev.aggregation.as_ref().map(Aggregation::max_size),
            })
            .collect();
        HierarchySummary {
            singular: self.singular,
            levels,
            grid_complexity: self.grid_complexity(),
            operator_complexity: self.operator_complexity(),
        }
    }
}

/// Per-level seed so that levels draw independent scores.
fn level_seed(seed: u64, level: usize) -> u64 {
    seed.wrapping_add((level as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Builds the hierarchy: aggregate, optionally reshape, coarsen, until a
/// level has at most `n0` unknowns or `max_levels` levels exist.
pub fn setup(a: &CsrMatrix, cfg: &SetupConfig) -> Result<Hierarchy> {
    cfg.validate()?;
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.n_rows(), cols: a.n_cols() });
    }
    if a.n_rows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let singular = a.annihilates_constants(1e-12);
    let mut levels = Vec::new();
    let mut current = a.clone();
    while levels.len() + 1 < cfg.max_levels && current.n_rows() > cfg.n0 {
        let level = levels.len();
        let agg_cfg = AggregationConfig { seed: level_seed(cfg.aggregation.seed, level), ..cfg.aggregation.clone() };
        let mut agg = aggregate(&current, &agg_cfg)?;
        if cfg.reshape.sweeps > 0 {
            agg = reshape_sweep(&current, &agg, &cfg.reshape)?;
        }
        if agg.n_coarse() == agg.n_fine() {
            return Err(Error::Stagnation { level, n: current.n_rows() });
        }
        let coarse = galerkin_coarse(&current, &agg)?;
        log::debug!(
            "level {level}: {} -> {} (ratio {:.3}), nnz {}",
            agg.n_fine(),
            agg.n_coarse(),
            agg.coarsening_ratio(),
            coarse.nnz()
        );
        levels.push(Level { matrix: current, aggregation: Some(agg) });
        current = coarse;
    }
    let coarse_solver = CoarseSolver::new(&current, singular)?;
    levels.push(Level { matrix: current, aggregation: None });
    Ok(Hierarchy { levels, coarse_solver, singular })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{generate_structured_grid, BoundaryCondition, GraphProblem};

    fn dense_ptap(a: &CsrMatrix, agg: &Aggregation) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(agg.n_fine(), agg.n_coarse());
        for (v, &k) in agg.vertex_to_agg().iter().enumerate() {
            p[(v, k)] = 1.0;
        }
        p.transpose() * a.to_dense() * p
    }

    fn path(n: usize) -> CsrMatrix {
        let edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        GraphProblem::new(n, edges, vec![]).unwrap().assemble_laplacian()
    }

    #[test]
    fn path4_pairs() {
        let a = path(4);
        let agg = Aggregation::new(vec![0, 0, 1, 1], vec![0, 2]).unwrap();
        let c = galerkin_coarse(&a, &agg).unwrap();
        assert_eq!(c.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn singletons_leave_matrix_unchanged() {
        let a = generate_structured_grid(4, BoundaryCondition::Dirichlet, (1.0, 2.0)).unwrap().assemble_laplacian();
        assert_eq!(galerkin_coarse(&a, &Aggregation::singletons(16)).unwrap(), a);
    }

    #[test]
    fn single_aggregate_neumann_is_zero() {
        let a = path(5);
        let agg = Aggregation::new(vec![0; 5], vec![0]).unwrap();
        let c = galerkin_coarse(&a, &agg).unwrap();
        assert_eq!(c.n_rows(), 1);
        assert_eq!(c.nnz(), 0);
    }

    #[test]
    fn matches_dense_triple_product() {
        let a = generate_structured_grid(6, BoundaryCondition::Dirichlet, (1.0, 3.0)).unwrap().assemble_laplacian();
        let agg = aggregate(&a, &AggregationConfig::default()).unwrap();
        let c = galerkin_coarse(&a, &agg).unwrap().to_dense();
        assert!((c - dense_ptap(&a, &agg)).abs().max() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(galerkin_coarse(&path(3), &Aggregation::singletons(4)).is_err());
    }

    #[test]
    fn small_problem_is_single_level() {
        let a = path(8);
        let h = setup(&a, &SetupConfig::default()).unwrap();
        assert_eq!(h.n_levels(), 1);
        assert_eq!(h.grid_complexity(), 1.0);
        let b = vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let x = h.coarse_solve(&b);
        let r = a.residual(&b, &x);
        assert!(vecops::norm2(&r) < 1e-12);
    }

    #[test]
    fn path8_pairs_stay_tridiagonal() {
        let a = path(8);
        let cfg = SetupConfig { n0: 2, aggregation: AggregationConfig::with_cap(Some(2), 1), ..Default::default() };
        let h = setup(&a, &cfg).unwrap();
        assert!((2..=4).contains(&h.n_levels()), "{} levels", h.n_levels());
        for l in 0..h.n_levels() {
            let m = h.matrix(l);
            for i in 0..m.n_rows() {
                assert!(m.row(i).0.iter().all(|&j| j + 1 >= i && j <= i + 1));
            }
            assert!(m.annihilates_constants(1e-12));
        }
    }

    #[test]
    fn grid_hierarchy_statistics() {
        let a = generate_structured_grid(32, BoundaryCondition::Neumann, (1.0, 1.0)).unwrap().assemble_laplacian();
        let h = setup(&a, &SetupConfig::default()).unwrap();
        assert!(h.singular());
        assert!(h.matrix(h.coarsest()).n_rows() <= 100);
        for l in 0..h.coarsest() {
            let agg = h.aggregation(l).unwrap();
            assert_eq!(agg.n_coarse(), h.matrix(l + 1).n_rows());
            assert!(h.matrix(l + 1).annihilates_constants(1e-12));
            assert!(h.matrix(l + 1).is_symmetric(1e-14));
        }
        assert!(h.operator_complexity() >= 1.0 && h.operator_complexity() < 2.2);
        let s = h.summary();
        assert_eq!(s.levels.len(), h.n_levels());
        assert!(s.levels.last().unwrap().coarsening_ratio.is_none());
    }

    #[test]
    fn edgeless_graph_stagnates() {
        let a = CsrMatrix::identity(200);
        assert!(matches!(setup(&a, &SetupConfig::default()), Err(Error::Stagnation { level: 0, n: 200 })));
    }

    #[test]
    fn max_levels_one_is_direct_solve() {
        let a = generate_structured_grid(12, BoundaryCondition::Dirichlet, (1.0, 1.0)).unwrap().assemble_laplacian();
        let h = setup(&a, &SetupConfig { max_levels: 1, ..Default::default() }).unwrap();
        assert_eq!(h.n_levels(), 1);
    }
}
