//! Replicated scenario benchmark producing one summary row per method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorOptions, Method};
use crate::metrics::{evaluate, summarize, EvalReport, Summary};
use crate::model::{destandardize, standardize};
use crate::simgen::{gen_scenario_stream, ScenarioConfig};

use super::cv::cross_validate_many;
use super::path::lambda_grid;

/// How the MSP penalty is chosen in a benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MspLambdaPolicy {
    /// Fixed `fraction * lambda_max`, no cross-validation.
    FractionOfMax(f64),
    CrossValidated,
}

impl Default for MspLambdaPolicy {
    fn default() -> Self {
        MspLambdaPolicy::FractionOfMax(DEFAULT_MSP_FRACTION)
    }
}

/// Default fixed MSP penalty as a fraction of `lambda_max`.
pub const DEFAULT_MSP_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub scenario: ScenarioConfig,
    pub methods: Vec<Method>,
    pub reps: usize,
    pub grid_size: usize,
    pub folds: usize,
    pub msp_policy: MspLambdaPolicy,
    pub estimator: EstimatorOptions,
}

impl BenchConfig {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            scenario,
            methods: Method::ALL.to_vec(),
            reps: 100,
            grid_size: 100,
            folds: 10,
            msp_policy: MspLambdaPolicy::default(),
            estimator: EstimatorOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: Method,
    /// `None` when every replication failed.
    pub summary: Option<Summary>,
    /// Successful replications, keyed by replication index.
    pub reports: Vec<(usize, EvalReport)>,
    pub failures: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub rows: Vec<MethodRow>,
}

impl BenchResult {
    pub fn row(&self, method: Method) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

pub(crate) fn cv_seed(seed: u64, rep: usize) -> u64 {
    // splitmix64 finalizer over (seed, rep)
    let mut z = seed ^ (rep as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `reps` replications. Each replication draws its own scenario stream,
/// picks every method's penalty (cross-validation, or the MSP policy), refits
/// on the full sample and evaluates on the original predictor scale. A failed
/// (method, replication) pair is recorded and excluded from the summary.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchResult> {
    if config.reps < 2 {
        return Err(Error::invalid("a benchmark needs at least two replications"));
    }
    if config.methods.is_empty() {
        return Err(Error::invalid("no methods to benchmark"));
    }
    config.scenario.validate()?;

    let per_rep: Vec<Vec<std::result::Result<EvalReport, String>>> =
        (0..config.reps).into_par_iter().map(|rep| replicate(config, rep)).collect();

    let rows = config
        .methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let mut reports = Vec::new();
            let mut failures = Vec::new();
            for (rep, results) in per_rep.iter().enumerate() {
                match &results[m] {
                    Ok(r) => reports.push((rep, *r)),
                    Err(e) => failures.push((rep, e.clone())),
                }
            }
            if !failures.is_empty() {
                log::warn!("{method}: {} of {} replications failed", failures.len(), config.reps);
            }
            let evals: Vec<EvalReport> = reports.iter().map(|(_, r)| *r).collect();
            MethodRow {
                method,
                summary: summarize(&evals).ok(),
                reports,
                failures,
            }
        })
        .collect();
    Ok(BenchResult { rows })
}

fn replicate(config: &BenchConfig, rep: usize) -> Vec<std::result::Result<EvalReport, String>> {
    let fail_all = |e: Error| vec![Err(format!("replication {rep}: {e}")); config.methods.len()];
    let data = match gen_scenario_stream(&config.scenario, rep as u64) {
        Ok(d) => d,
        Err(e) => return fail_all(e),
    };
    let truth = data.truth().expect("simulated data carries truth").clone();
    let design = match standardize(&data, false) {
        Ok(d) => d,
        Err(e) => return fail_all(e),
    };
    let y = design.response().to_owned();
    let grid = match lambda_grid(&design, y.view(), config.grid_size) {
        Ok(g) => g,
        Err(e) => return fail_all(e),
    };

    let cv_methods: Vec<Method> = config
        .methods
        .iter()
        .copied()
        .filter(|&m| m != Method::Msp || config.msp_policy == MspLambdaPolicy::CrossValidated)
        .collect();
    let cv = if cv_methods.is_empty() {
        Ok(Vec::new())
    } else {
        cross_validate_many(
            &design,
            y.view(),
            &cv_methods,
            &grid,
            config.folds,
            cv_seed(config.scenario.seed, rep),
            &config.estimator,
        )
    };
    let cv = match cv {
        Ok(c) => c,
        Err(e) => return fail_all(e),
    };

    config
        .methods
        .iter()
        .map(|&method| {
            let lambda = match (method, config.msp_policy) {
                (Method::Msp, MspLambdaPolicy::FractionOfMax(f)) => grid[0] * f,
                _ => cv.iter().find(|c| c.method == method).expect("method was cross-validated").lambda,
            };
            method
                .fit(&design, y.view(), lambda, &config.estimator)
                .and_then(|t| destandardize(t.coefs(), &design))
                .and_then(|c| evaluate(&c, &truth))
                .map_err(|e| format!("{method}, replication {rep}: {e}"))
        })
        .collect()
}
