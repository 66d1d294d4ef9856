use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit_lasso, EstimatorOptions, Method};
use crate::model::{SparseCoefficients, StandardizedDesign};
use crate::simgen::ScenarioConfig;
use crate::solver::{lambda_max, SolveReport, SolverOptions};

/// Smallest grid value relative to `lambda_max`.
pub const DEFAULT_MIN_RATIO: f64 = 1e-3;

/// `count` log-spaced values from `lambda_max` down to `0.001 * lambda_max`.
pub fn lambda_grid(design: &StandardizedDesign, y: ArrayView1<'_, f64>, count: usize) -> Result<Vec<f64>> {
    lambda_grid_with_ratio(design, y, count, DEFAULT_MIN_RATIO)
}

pub fn lambda_grid_with_ratio(design: &StandardizedDesign, y: ArrayView1<'_, f64>, count: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::invalid("a lambda grid needs at least two points"));
    }
    if !(min_ratio > 0.0 && min_ratio < 1.0) {
        return Err(Error::invalid("min_ratio must lie in (0, 1)"));
    }
    let top = lambda_max(design, y, Array1::ones(design.p()).view())?;
    if !(top > 0.0) {
        return Err(Error::invalid("lambda_max is zero: the response is orthogonal to every column"));
    }
    let step = min_ratio.ln() / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|i| top * (step * i as f64).exp()).collect();
    grid[0] = top;
    grid[count - 1] = top * min_ratio;
    Ok(grid)
}

/// Role of a predictor in a simulated scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableClass {
    Relevant,
    Engineered,
    Irrelevant,
}

impl VariableClass {
    pub fn of(j: usize, support: &[usize]) -> Self {
        if support.contains(&j) {
            VariableClass::Relevant
        } else if j == ScenarioConfig::ENGINEERED {
            VariableClass::Engineered
        } else {
            VariableClass::Irrelevant
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VariableClass::Relevant => "relevant",
            VariableClass::Engineered => "engineered",
            VariableClass::Irrelevant => "irrelevant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub lambda: f64,
    pub coefs: SparseCoefficients,
    pub steps: usize,
    pub converged: bool,
    /// Number of nonzeros after each step of the fit.
    pub step_nz: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub method: Method,
    pub points: Vec<PathPoint>,
}

impl PathResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("empty lambda grid"));
    }
    if grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::invalid("lambda grid must be strictly decreasing"));
    }
    if grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::invalid("lambda grid values must be nonnegative"));
    }
    Ok(())
}

/// Lasso fits along a decreasing grid, each warm-started from the previous one.
pub fn lasso_path(design: &StandardizedDesign, y: ArrayView1<'_, f64>, grid: &[f64], opts: &SolverOptions) -> Result<Vec<SolveReport>> {
    check_grid(grid)?;
    let mut out: Vec<SolveReport> = Vec::with_capacity(grid.len());
    for (i, &lambda) in grid.iter().enumerate() {
        let solver = match out.last() {
            Some(prev) => opts.warm(prev.coefs.values()),
            None => opts.clone(),
        };
        let report = fit_lasso(design, y, lambda, &solver).map_err(|e| e.context(format!("lasso at grid index {i}")))?;
        out.push(report);
    }
    Ok(out)
}

/// Fits `method` at every grid value. The lasso screening fit is shared and
/// warm-started along the grid; the method-specific steps run in parallel.
/// MSP uses the same value for its screening and reweighting penalties.
pub fn trace_path(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    method: Method,
    grid: &[f64],
    opts: &EstimatorOptions,
) -> Result<PathResult> {
    let lasso = lasso_path(design, y, grid, &opts.solver)?;
    path_from_lasso(design, y, method, grid, lasso, opts)
}

pub(crate) fn path_from_lasso(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    method: Method,
    grid: &[f64],
    lasso: Vec<SolveReport>,
    opts: &EstimatorOptions,
) -> Result<PathResult> {
    let points = grid
        .par_iter()
        .zip(lasso.into_par_iter())
        .enumerate()
        .map(|(i, (&lambda, initial))| {
            let trace = method
                .fit_from_initial(design, y, lambda, initial, opts)
                .map_err(|e| e.context(format!("{method} at grid index {i}")))?;
            Ok(PathPoint {
                lambda,
                steps: trace.steps_used(),
                converged: trace.converged,
                step_nz: trace.steps.iter().map(|s| s.active_set.len()).collect(),
                coefs: trace.into_coefs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PathResult { method, points })
}
