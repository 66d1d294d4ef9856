//! MSP estimation error across a list of fixed penalty levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit_msp, EstimatorOptions};
use crate::metrics::{evaluate, MeanSd};
use crate::model::{destandardize, standardize};
use crate::simgen::{gen_scenario_stream, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessPoint {
    pub lambda: f64,
    pub l2: MeanSd,
}

/// Mean l2 error of MSP (same value for both penalties) at each `lambda`.
/// Replication `r` uses scenario stream `r` for every entry of the list.
pub fn lambda_robustness(config: &ScenarioConfig, lambdas: &[f64], reps: usize, opts: &EstimatorOptions) -> Result<Vec<RobustnessPoint>> {
    if lambdas.is_empty() {
        return Err(Error::invalid("empty lambda list"));
    }
    if reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    // errors[rep][lambda]
    let errors = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<f64>> {
            let data = gen_scenario_stream(config, rep as u64)?;
            let truth = data.truth().expect("simulated data carries truth");
            let design = standardize(&data, false)?;
            let y = design.response();
            lambdas
                .iter()
                .map(|&lambda| {
                    let trace =
                        fit_msp(&design, y, lambda, lambda, opts).map_err(|e| e.context(format!("replication {rep}, lambda {lambda}")))?;
                    let coefs = destandardize(trace.coefs(), &design)?;
                    Ok(evaluate(&coefs, truth)?.l2_err)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| RobustnessPoint {
            lambda,
            l2: MeanSd::of(errors.iter().map(|e| e[i])).expect("reps > 0"),
        })
        .collect())
}
