//! Aggregation quality: the energy norm of the ℓ² projection onto piecewise
//! constants, the symmetrized two-level convergence rate, and tables of
//! both over all level pairs of a hierarchy.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::aggregation::Aggregation;
use crate::error::{Error, Result};
use crate::hierarchy::{setup, Hierarchy, SetupConfig};
use crate::linalg::{lanczos_largest, start_vector, EnvelopeCholesky, LaplacianSolver};
use crate::solvers::{npcg_solve, prolongate_add, restrict, CycleSpec, SmootherSpec};
use crate::sparse::CsrMatrix;
use crate::vecops;

/// Problems up to this size are evaluated by dense eigensolves.
pub const DENSE_LIMIT: usize = 256;
/// Largest envelope (in stored entries) factored for iterative evaluation;
/// bigger problems use multigrid inner solves.
const PROFILE_LIMIT: usize = 40_000_000;
const LANCZOS_MAX_ITER: usize = 300;
const LANCZOS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelReport {
    pub fine_level: usize,
    pub coarse_level: usize,
    pub n_fine: usize,
    pub n_coarse: usize,
    pub coarsening_ratio: f64,
    pub q_energy_sq: f64,
    pub e_norm: Option<f64>,
}

enum InverseA {
    Direct(LaplacianSolver),
    Multigrid(Box<Hierarchy>),
}

/// Quality measures for aggregations of one fixed operator. Factorizations
/// are computed once and reused across aggregations.
pub struct QualityEvaluator<'a> {
    a: &'a CsrMatrix,
    singular: bool,
    method: Method,
    dense_chol: Option<Cholesky<f64, nalgebra::Dyn>>,
    inverse: Option<InverseA>,
}

impl<'a> QualityEvaluator<'a> {
    pub fn new(a: &'a CsrMatrix, singular: bool) -> Result<Self> {
        Self::with_method(a, singular, Method::Auto)
    }

    pub fn with_method(a: &'a CsrMatrix, singular: bool, method: Method) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.n_rows(), cols: a.n_cols() });
        }
        if a.n_rows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        let method = match method {
            Method::Auto if a.n_rows() <= DENSE_LIMIT => Method::Dense,
            Method::Auto => Method::Iterative,
            m => m,
        };
        let mut ev = Self { a, singular, method, dense_chol: None, inverse: None };
        if method == Method::Dense {
            // A + alpha 11'/n agrees with A on the mean-free subspace and is
            // definite, so the seminorm problems become definite ones.
            let mut reg = a.to_dense();
            if singular {
                let n = a.n_rows() as f64;
                let alpha = a.diagonal().iter().fold(0.0f64, |m, v| m.max(*v)).max(1.0);
                reg.add_scalar_mut(alpha / n);
            }
            ev.dense_chol =
                Some(Cholesky::new(reg).ok_or_else(|| Error::Factorization("operator is not definite".into()))?);
        }
        Ok(ev)
    }

    fn inverse(&mut self) -> Result<&InverseA> {
        if self.inverse.is_none() {
            let inv = if EnvelopeCholesky::profile_size(self.a) <= PROFILE_LIMIT {
                InverseA::Direct(LaplacianSolver::new(self.a, self.singular)?)
            } else {
                InverseA::Multigrid(Box::new(setup(self.a, &SetupConfig::default())?))
            };
            self.inverse = Some(inv);
        }
        Ok(self.inverse.as_ref().expect("just set"))
    }

    fn check(&self, agg: &Aggregation) -> Result<()> {
        if agg.n_fine() != self.a.n_rows() {
            return Err(Error::DimensionMismatch { expected: self.a.n_rows(), found: agg.n_fine() });
        }
        Ok(())
    }

    /// Largest eigenvalue of `N x = λ A x` on the mean-free subspace (or the
    /// whole space for definite `A`), given the symmetric `N` densely.
    fn dense_pencil_max(&self, n_mat: &DMatrix<f64>, absolute: bool) -> f64 {
        let chol = self.dense_chol.as_ref().expect("dense factorization");
        let l = chol.l();
        let y = l.solve_lower_triangular(n_mat).expect("nonsingular factor");
        let c = l.solve_lower_triangular(&y.transpose()).expect("nonsingular factor");
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(if absolute { v.abs() } else { *v }))
    }

    fn averaging(agg: &Aggregation, x: &[f64]) -> Vec<f64> {
        let mut sums = restrict(agg, x).expect("checked sizes");
        for (s, &size) in sums.iter_mut().zip(agg.agg_sizes()) {
            *s /= size as f64;
        }
        let mut out = vec![0.0; x.len()];
        prolongate_add(agg, &sums, &mut out).expect("checked sizes");
        out
    }

    /// `‖Q‖²_A` for `Q = P (P'P)^{-1} P'`.
    pub fn q_energy_sq(&mut self, agg: &Aggregation) -> Result<f64> {
        self.check(agg)?;
        let n = self.a.n_rows();
        if self.method == Method::Dense {
            let mut q = DMatrix::zeros(n, n);
            let (offsets, members) = agg.members();
            for k in 0..agg.n_coarse() {
                let group = &members[offsets[k]..offsets[k + 1]];
                let w = 1.0 / group.len() as f64;
                for &i in group {
                    for &j in group {
                        q[(i, j)] = w;
                    }
                }
            }
            let qaq = &q * self.a.to_dense() * &q;
            return Ok(self.dense_pencil_max(&qaq, false));
        }
        let singular = self.singular;
        let a = self.a;
        let inv = self.inverse()?;
        let op = |x: &[f64]| -> Result<Vec<f64>> {
            let rhs = Self::averaging(agg, &a.spmv(&Self::averaging(agg, x))?);
            apply_inverse(inv, a, &rhs, singular)
        };
        lanczos_largest(a, op, start_vector(n), singular, LANCZOS_MAX_ITER, LANCZOS_TOL)
    }

    /// `|E|_A` for the symmetrized two-level operator
    /// `E = S^ν (I - P A_c^{-1} P' A) S^ν`, `S = I - M^{-1} A`, with `ν`
    /// the smoother's sweep count and an exact coarse solve.
    pub fn two_level_rate(&mut self, agg: &Aggregation, smoother: &SmootherSpec) -> Result<f64> {
        self.check(agg)?;
        let a = self.a;
        let n = a.n_rows();
        let inv_diag = smoother.inverse_diagonal(a)?;
        let ac = crate::hierarchy::galerkin_coarse(a, agg)?;
        let coarse = LaplacianSolver::new(&ac, self.singular)?;
        let singular = self.singular;
        let apply_s = |x: &mut Vec<f64>| -> Result<()> {
            for _ in 0..smoother.sweeps {
                let ax = a.spmv(x)?;
                for i in 0..n {
                    x[i] -= inv_diag[i] * ax[i];
                }
            }
            Ok(())
        };
        let apply_e = |x: &[f64]| -> Result<Vec<f64>> {
            let mut v = x.to_vec();
            apply_s(&mut v)?;
            let mut rc = restrict(agg, &a.spmv(&v)?)?;
            if singular {
                vecops::remove_mean(&mut rc);
            }
            let ec = coarse.solve(&rc);
            let mut corr = vec![0.0; n];
            prolongate_add(agg, &ec, &mut corr)?;
            vecops::axpy(-1.0, &corr, &mut v);
            apply_s(&mut v)?;
            if singular {
                vecops::remove_mean(&mut v);
            }
            Ok(v)
        };
        if self.method == Method::Dense {
            let mut e = DMatrix::zeros(n, n);
            for j in 0..n {
                let mut unit = vec![0.0; n];
                unit[j] = 1.0;
                let col = apply_e(&unit)?;
                e.column_mut(j).copy_from_slice(&col);
            }
            let ae = a.to_dense() * e;
            let ae = (&ae + ae.transpose()) * 0.5;
            return Ok(self.dense_pencil_max(&ae, true));
        }
        lanczos_largest(a, apply_e, start_vector(n), singular, LANCZOS_MAX_ITER, LANCZOS_TOL)
    }
}

fn apply_inverse(inv: &InverseA, a: &CsrMatrix, b: &[f64], singular: bool) -> Result<Vec<f64>> {
    match inv {
        InverseA::Direct(s) => Ok(s.solve(b)),
        InverseA::Multigrid(h) => {
            let mut b = b.to_vec();
            if singular {
                vecops::remove_mean(&mut b);
            }
            let (x, report) = npcg_solve(h, &CycleSpec::default(), &SmootherSpec::l1(1), &b, 1e-12, 500)?;
            if !report.converged {
                log::warn!("inner solve stopped at {:e} on {} unknowns", report.final_residual(), a.n_rows());
            }
            Ok(x)
        }
    }
}

pub fn q_energy_norm(a: &CsrMatrix, agg: &Aggregation, singular: bool) -> Result<f64> {
    QualityEvaluator::new(a, singular)?.q_energy_sq(agg)
}

pub fn two_level_rate(a: &CsrMatrix, agg: &Aggregation, smoother: &SmootherSpec, singular: bool) -> Result<f64> {
    QualityEvaluator::new(a, singular)?.two_level_rate(agg, smoother)
}

/// Reports for every level pair `(l, l')`, `l < l'`, using the composed
/// aggregation from level `l` to level `l'`. `e_smoother` adds `|E|_A` for
/// fine levels of at most `e_limit` unknowns.
pub fn hierarchy_report(
    h: &Hierarchy,
    e_smoother: Option<&SmootherSpec>,
    e_limit: usize,
) -> Result<Vec<TwoLevelReport>> {
    let mut rows = Vec::new();
    for l in 0..h.coarsest() {
        let a = h.matrix(l);
        let mut ev = QualityEvaluator::new(a, h.singular())?;
        let mut composed = h.aggregation(l).expect("non-coarsest level").clone();
        for lc in l + 1..h.n_levels() {
            if lc > l + 1 {
                composed = composed.compose(h.aggregation(lc - 1).expect("non-coarsest level"))?;
            }
            let q = ev.q_energy_sq(&composed)?;
            let e = match e_smoother {
                Some(s) if a.n_rows() <= e_limit => Some(ev.two_level_rate(&composed, s)?),
                _ => None,
            };
            rows.push(TwoLevelReport {
                fine_level: l,
                coarse_level: lc,
                n_fine: composed.n_fine(),
                n_coarse: composed.n_coarse(),
                coarsening_ratio: composed.coarsening_ratio(),
                q_energy_sq: q,
                e_norm: e,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[TwoLevelReport], mut w: W) -> Result<()> {
    writeln!(w, "fine,coarse,ratio,q_energy_sq,e_norm")?;
    for r in rows {
        let e = r.e_norm.map(|e| format!("{e:.6}")).unwrap_or_default();
        writeln!(w, "{},{},{:.6},{:.6},{}", r.fine_level, r.coarse_level, r.coarsening_ratio, r.q_energy_sq, e)?;
    }
    Ok(())
}
