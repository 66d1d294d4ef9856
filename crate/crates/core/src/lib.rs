//! Sparse linear regression with the multi-screen penalty (MSP) estimator.
//!
//! MSP starts from a lasso fit and then repeatedly re-solves an adaptively
//! weighted lasso restricted to the previous active set, so the candidate
//! set can only shrink. The crate also carries the usual comparison
//! estimators (lasso, adaptive lasso, OLS after lasso, capped-l1, LLA with
//! SCAD/MCP weights), synthetic scenarios that break the irrepresentable
//! condition, selection metrics and the experiment drivers behind the `msp`
//! command-line tool.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod simgen;
pub mod solver;

pub use error::{Error, Result};
pub use estimators::{EstimatorOptions, FitTrace, Method, PenaltyKind, TraceStep};
pub use metrics::{evaluate, summarize, EvalReport, MeanSd, Summary};
pub use model::{destandardize, standardize, Centering, Dataset, SparseCoefficients, StandardizedDesign, TruthInfo};
pub use simgen::{gen_scenario, Scenario, ScenarioConfig};
pub use solver::{fit_weighted_lasso, kkt_check, lambda_max, soft_threshold, PenaltySpec, SolveReport, SolverOptions};
