//! Unsmoothed-aggregation algebraic multigrid for weighted graph Laplacians.
//!
//! The pipeline is: assemble a Laplacian ([`sparse`]), partition its vertices
//! into aggregates ([`aggregation`]), optionally improve aggregate shapes
//! ([`reshaping`]), build the level hierarchy ([`hierarchy`]) and solve with
//! a K-cycle preconditioned flexible CG ([`solvers`]). [`analysis`] measures
//! aggregation quality.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod reshaping;
pub mod solvers;
pub mod sparse;
pub mod vecops;

pub use aggregation::{aggregate, Aggregation, AggregationConfig};
pub use error::{Error, Result};
pub use hierarchy::{galerkin_coarse, setup, Hierarchy, SetupConfig};
pub use solvers::{npcg_solve, CycleKind, CycleSpec, SmootherKind, SmootherSpec, SolveReport};
pub use sparse::{generate_structured_grid, BoundaryCondition, CsrMatrix, GraphProblem};
