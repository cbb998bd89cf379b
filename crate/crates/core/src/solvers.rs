//! Smoothers, grid transfers, V- and K-cycles and the outer flexible CG.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::Aggregation;
use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::sparse::CsrMatrix;
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SmootherKind {
    /// `x += omega D^{-1} r`.
    Jacobi { omega: f64 },
    /// `x += M^{-1} r` with `M_ii = a_ii + sum_{j != i} |a_ij|`.
    L1Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmootherSpec {
    pub kind: SmootherKind,
    pub sweeps: usize,
}

impl Default for SmootherSpec {
    fn default() -> Self {
        Self::l1(1)
    }
}

impl SmootherSpec {
    pub fn l1(sweeps: usize) -> Self {
        Self { kind: SmootherKind::L1Jacobi, sweeps }
    }

    pub fn jacobi(omega: f64, sweeps: usize) -> Self {
        Self { kind: SmootherKind::Jacobi { omega }, sweeps }
    }

    pub fn validate(&self) -> Result<()> {
        if let SmootherKind::Jacobi { omega } = self.kind {
            if !(omega > 0.0 && omega <= 1.0) {
                return Err(Error::InvalidConfig(format!("Jacobi damping {omega} outside (0, 1]")));
            }
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidConfig("smoother sweeps must be at least 1".into()));
        }
        Ok(())
    }

    /// Diagonal of the smoother's inverse, i.e. `omega / a_ii` or `1 / M_ii`.
    pub fn inverse_diagonal(&self, a: &CsrMatrix) -> Result<Vec<f64>> {
        (0..a.n_rows())
            .into_par_iter()
            .with_min_len(1024)
            .map(|i| {
                let (cols, vals) = a.row(i);
                let aii: f64 = cols.iter().zip(vals).filter(|(&j, _)| j == i).map(|(_, v)| *v).sum();
                let m = match self.kind {
                    SmootherKind::Jacobi { omega } => aii / omega,
                    SmootherKind::L1Jacobi => {
                        aii + cols.iter().zip(vals).filter(|(&j, _)| j != i).map(|(_, v)| v.abs()).sum::<f64>()
                    }
                };
                if m > 0.0 && m.is_finite() {
                    Ok(1.0 / m)
                } else {
                    Err(Error::ZeroDiagonal { row: i })
                }
            })
            .collect()
    }
}

impl FromStr for SmootherSpec {
    type Err = String;

    /// `l1`, `jacobi` (damping 2/3) or `jacobi:<omega>`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let spec = match s.split_once(':') {
            None if s == "l1" => Self::l1(1),
            None if s == "jacobi" => Self::jacobi(2.0 / 3.0, 1),
            Some(("jacobi", w)) => Self::jacobi(w.parse().map_err(|_| format!("bad Jacobi damping '{w}'"))?, 1),
            _ => return Err(format!("unknown smoother '{s}' (l1|jacobi|jacobi:<omega>)")),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl fmt::Display for SmootherSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SmootherKind::L1Jacobi => write!(f, "l1"),
            SmootherKind::Jacobi { omega } => write!(f, "jacobi:{omega}"),
        }
    }
}

fn smooth_with(a: &CsrMatrix, inv_diag: &[f64], x: &mut [f64], b: &[f64], sweeps: usize) {
    let mut r = vec![0.0; x.len()];
    for _ in 0..sweeps {
        a.spmv_into(x, &mut r);
        x.par_iter_mut()
            .zip(r.par_iter())
            .zip(b.par_iter().zip(inv_diag.par_iter()))
            .for_each(|((xi, ri), (bi, di))| *xi += di * (bi - ri));
    }
}

/// Applies `sweeps` pointwise smoothing steps to `x` for `A x = b`.
pub fn smooth(a: &CsrMatrix, spec: &SmootherSpec, x: &mut [f64], b: &[f64], sweeps: usize) -> Result<()> {
    spec.validate()?;
    for len in [x.len(), b.len()] {
        if len != a.n_rows() {
            return Err(Error::DimensionMismatch { expected: a.n_rows(), found: len });
        }
    }
    let inv = spec.inverse_diagonal(a)?;
    smooth_with(a, &inv, x, b, sweeps);
    Ok(())
}

/// `x_fine[i] += e_coarse[vertex_to_agg[i]]`.
pub fn prolongate_add(agg: &Aggregation, e_coarse: &[f64], x_fine: &mut [f64]) -> Result<()> {
    if e_coarse.len() != agg.n_coarse() {
        return Err(Error::DimensionMismatch { expected: agg.n_coarse(), found: e_coarse.len() });
    }
    if x_fine.len() != agg.n_fine() {
        return Err(Error::DimensionMismatch { expected: agg.n_fine(), found: x_fine.len() });
    }
    x_fine.par_iter_mut().zip(agg.vertex_to_agg().par_iter()).for_each(|(x, &k)| *x += e_coarse[k]);
    Ok(())
}

/// Aggregate-wise sums of `r_fine`, each summed in increasing fine index.
pub fn restrict(agg: &Aggregation, r_fine: &[f64]) -> Result<Vec<f64>> {
    if r_fine.len() != agg.n_fine() {
        return Err(Error::DimensionMismatch { expected: agg.n_fine(), found: r_fine.len() });
    }
    let (offsets, members) = agg.members();
    Ok(restrict_grouped(&offsets, &members, r_fine))
}

fn restrict_grouped(offsets: &[usize], members: &[usize], r: &[f64]) -> Vec<f64> {
    (0..offsets.len() - 1)
        .into_par_iter()
        .with_min_len(256)
        .map(|k| members[offsets[k]..offsets[k + 1]].iter().map(|&v| r[v]).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    V,
    K,
}

impl FromStr for CycleKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "v" | "vcycle" => Ok(Self::V),
            "k" | "kcycle" => Ok(Self::K),
            other => Err(format!("unknown cycle '{other}' (v|k)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleSpec {
    pub kind: CycleKind,
    /// Flexible CG steps on each coarse problem (K-cycle only). Zero turns
    /// the K-cycle into a V-cycle.
    pub inner_krylov_steps: usize,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

impl Default for CycleSpec {
    fn default() -> Self {
        Self { kind: CycleKind::K, inner_krylov_steps: 2, pre_sweeps: 1, post_sweeps: 1 }
    }
}

impl CycleSpec {
    pub fn v() -> Self {
        Self { kind: CycleKind::V, ..Self::default() }
    }
}

struct LevelData {
    inv_diag: Vec<f64>,
    offsets: Vec<usize>,
    members: Vec<usize>,
}

/// A hierarchy bound to a cycle and smoother, with per-level smoother
/// diagonals and aggregate groupings precomputed.
pub struct Multigrid<'h> {
    h: &'h Hierarchy,
    spec: CycleSpec,
    levels: Vec<LevelData>,
}

impl<'h> Multigrid<'h> {
    pub fn new(h: &'h Hierarchy, spec: CycleSpec, smoother: &SmootherSpec) -> Result<Self> {
        smoother.validate()?;
        let levels = (0..h.coarsest())
            .map(|l| {
                let (offsets, members) = h.aggregation(l).expect("non-coarsest level").members();
                Ok(LevelData { inv_diag: smoother.inverse_diagonal(h.matrix(l))?, offsets, members })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { h, spec, levels })
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        self.h
    }

    fn project(&self, x: &mut [f64]) {
        if self.h.singular() {
            vecops::remove_mean(x);
        }
    }

    /// One cycle from a zero initial guess on `level`.
    pub fn apply(&self, level: usize, b: &[f64]) -> Vec<f64> {
        let h = self.h;
        if level == h.coarsest() {
            return h.coarse_solve(b);
        }
        let a = h.matrix(level);
        let data = &self.levels[level];
        let mut x = vec![0.0; b.len()];
        smooth_with(a, &data.inv_diag, &mut x, b, self.spec.pre_sweeps);
        let r = a.residual(b, &x);
        let mut rc = restrict_grouped(&data.offsets, &data.members, &r);
        self.project(&mut rc);
        let ec = if self.spec.kind == CycleKind::V || self.spec.inner_krylov_steps == 0 || level + 1 == h.coarsest() {
            self.apply(level + 1, &rc)
        } else {
            self.inner_fcg(level + 1, &rc)
        };
        let map = h.aggregation(level).expect("non-coarsest level").vertex_to_agg();
        x.par_iter_mut().zip(map.par_iter()).for_each(|(xi, &k)| *xi += ec[k]);
        smooth_with(a, &data.inv_diag, &mut x, b, self.spec.post_sweeps);
        self.project(&mut x);
        x
    }

    /// A few flexible CG steps on `A_level e = r`, preconditioned by the
    /// cycle on that level.
    fn inner_fcg(&self, level: usize, r0: &[f64]) -> Vec<f64> {
        let a = self.h.matrix(level);
        let mut x = vec![0.0; r0.len()];
        let mut r = r0.to_vec();
        let mut prev: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        let scale = vecops::norm2(r0);
        for _ in 0..self.spec.inner_krylov_steps {
            if vecops::norm2(&r) <= 1e-15 * scale {
                break;
            }
            let mut p = self.apply(level, &r);
            if let Some((pp, qp, pq)) = &prev {
                let beta = vecops::dot(&p, qp) / pq;
                vecops::axpy(-beta, pp, &mut p);
            }
            let q = a.spmv(&p).expect("level dimensions");
            let pq = vecops::dot(&p, &q);
            if !(pq > 0.0) {
                break;
            }
            let alpha = vecops::dot(&p, &r) / pq;
            vecops::axpy(alpha, &p, &mut x);
            vecops::axpy(-alpha, &q, &mut r);
            prev = Some((p, q, pq));
        }
        x
    }
}

/// One cycle on `level` of the hierarchy applied to `b`.
pub fn cycle(h: &Hierarchy, spec: &CycleSpec, smoother: &SmootherSpec, level: usize, b: &[f64]) -> Result<Vec<f64>> {
    if level >= h.n_levels() {
        return Err(Error::InvalidConfig(format!("level {level} out of range")));
    }
    let n = h.matrix(level).n_rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let b = compatible_rhs(h, b)?;
    Ok(Multigrid::new(h, *spec, smoother)?.apply(level, &b))
}

/// Projects a nearly compatible right-hand side of a singular system onto
/// the range; rejects it if the constant component is not negligible.
fn compatible_rhs(h: &Hierarchy, b: &[f64]) -> Result<Vec<f64>> {
    let mut b = b.to_vec();
    if h.singular() {
        let norm = vecops::norm2(&b);
        if norm > 0.0 {
            let relative_mean = vecops::sum(&b).abs() / ((b.len() as f64).sqrt() * norm);
            if relative_mean > 1e-10 {
                return Err(Error::IncompatibleRhs { relative_mean });
            }
        }
        vecops::remove_mean(&mut b);
    }
    Ok(b)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_seconds: Option<f64>,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual norms `|r_k| / |b|`, starting with 1.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Wall-clock fields, kept apart so outputs can be compared with them
    /// masked.
    pub timings: Timings,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }
}

/// Flexible preconditioned CG with one multigrid cycle as preconditioner.
///
/// Each new direction is A-orthogonalized against the previous direction
/// only. After two consecutive residual increases the recurrence restarts
/// from the preconditioned residual. Singular systems keep every iterate
/// mean-free.
pub fn npcg_solve(
    h: &Hierarchy,
    spec: &CycleSpec,
    smoother: &SmootherSpec,
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let start = Instant::now();
    let a = h.matrix(0);
    if b.len() != a.n_rows() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), found: b.len() });
    }
    let mg = Multigrid::new(h, *spec, smoother)?;
    let b = compatible_rhs(h, b)?;
    let mut x = vec![0.0; b.len()];
    let b_norm = vecops::norm2(&b);
    let finish = |iterations, history: Vec<f64>, converged| SolveReport {
        iterations,
        residual_history: history,
        converged,
        timings: Timings { setup_seconds: None, solve_seconds: start.elapsed().as_secs_f64() },
    };
    if b_norm == 0.0 {
        return Ok((x, finish(0, vec![0.0], true)));
    }

    let mut r = b.clone();
    let mut history = vec![1.0];
    let mut prev: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let mut increases = 0;
    let mut iterations = 0;
    while history[iterations] > tol && iterations < max_iters {
        let mut p = mg.apply(0, &r);
        if increases >= 2 {
            log::debug!("npcg restart at iteration {iterations}");
            prev = None;
            increases = 0;
        }
        if let Some((pp, qp, pq)) = &prev {
            let beta = vecops::dot(&p, qp) / pq;
            vecops::axpy(-beta, pp, &mut p);
        }
        let q = a.spmv(&p)?;
        let pq = vecops::dot(&p, &q);
        if !(pq > 0.0) || !pq.is_finite() {
            return Err(Error::Breakdown {
                iteration: iterations,
                report: Box::new(finish(iterations, history, false)),
            });
        }
        let alpha = vecops::dot(&p, &r) / pq;
        vecops::axpy(alpha, &p, &mut x);
        vecops::axpy(-alpha, &q, &mut r);
        if h.singular() {
            vecops::remove_mean(&mut r);
        }
        iterations += 1;
        let rel = vecops::norm2(&r) / b_norm;
        increases = if rel > history[iterations - 1] { increases + 1 } else { 0 };
        history.push(rel);
        log::trace!("npcg iteration {iterations}: relative residual {rel:e}");
        prev = Some((p, q, pq));
    }
    if h.singular() {
        vecops::remove_mean(&mut x);
    }
    let converged = history[iterations] <= tol;
    Ok((x, finish(iterations, history, converged)))
}
