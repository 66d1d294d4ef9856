//! K-fold cross-validation over a penalty grid.
//!
//! Rows are shuffled by a seeded permutation and cut into contiguous blocks.
//! Each training fold is re-standardized and fitted on the grid scaled by
//! `n_train / n`, which keeps the penalty comparable to the full-data fit
//! under the unnormalized `(1/2)||y - Xb||^2` loss.

use ndarray::{Array1, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorOptions, Method};
use crate::model::{standardize, Dataset, StandardizedDesign};

use super::path::{lasso_path, path_from_lasso};

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub method: Method,
    pub lambda: f64,
    /// Position of `lambda` in the grid.
    pub index: usize,
    /// Mean held-out squared error per grid value; `inf` where a fit failed.
    pub errors: Vec<f64>,
}

/// Held-out row indices for each fold.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least two folds"));
    }
    if n < 2 * folds {
        return Err(Error::invalid(format!(
            "{n} rows cannot fill {folds} folds with at least two rows each"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}

/// Selects the grid value minimizing mean held-out squared error. Ties go to
/// the larger penalty.
pub fn cross_validate(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    method: Method,
    grid: &[f64],
    folds: usize,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<CvResult> {
    let mut out = cross_validate_many(design, y, &[method], grid, folds, seed, opts)?;
    Ok(out.pop().expect("one method in, one result out"))
}

/// Cross-validates several methods on the same folds, sharing each fold's
/// lasso path.
pub fn cross_validate_many(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    methods: &[Method],
    grid: &[f64],
    folds: usize,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<Vec<CvResult>> {
    let n = design.n();
    if y.len() != n {
        return Err(Error::dims("response length does not match the design"));
    }
    let assignment = fold_assignment(n, folds, seed)?;
    let x_all = design.x();

    // errors[fold][method][grid]
    let per_fold = assignment
        .par_iter()
        .enumerate()
        .map(|(f, test)| -> Result<Vec<Vec<f64>>> {
            let mut is_test = vec![false; n];
            test.iter().for_each(|&i| is_test[i] = true);
            let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
            let train_data = Dataset::new(x_all.select(Axis(0), &train), y.select(Axis(0), &train))?;
            let train_design = standardize(&train_data, false).map_err(|e| e.context(format!("fold {f}")))?;
            let y_train = train_design.response().to_owned();
            let scale = train.len() as f64 / n as f64;
            let fold_grid: Vec<f64> = grid.iter().map(|l| l * scale).collect();
            let lasso = lasso_path(&train_design, y_train.view(), &fold_grid, &opts.solver)?;
            let x_test = x_all.select(Axis(0), test);
            let y_test = y.select(Axis(0), test);

            methods
                .iter()
                .map(|&method| {
                    let errs = fold_errors(
                        &train_design,
                        y_train.view(),
                        method,
                        &fold_grid,
                        lasso.clone(),
                        opts,
                        &x_test,
                        &y_test,
                    );
                    Ok(errs)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let errors: Vec<f64> = (0..grid.len())
                .map(|g| per_fold.iter().map(|fold| fold[m][g]).sum::<f64>() / folds as f64)
                .collect();
            let mut index = 0;
            for (g, &e) in errors.iter().enumerate() {
                if e < errors[index] {
                    index = g;
                }
            }
            CvResult {
                method,
                lambda: grid[index],
                index,
                errors,
            }
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn fold_errors(
    train: &StandardizedDesign,
    y_train: ArrayView1<'_, f64>,
    method: Method,
    grid: &[f64],
    lasso: Vec<crate::solver::SolveReport>,
    opts: &EstimatorOptions,
    x_test: &ndarray::Array2<f64>,
    y_test: &Array1<f64>,
) -> Vec<f64> {
    let path = match path_from_lasso(train, y_train, method, grid, lasso, opts) {
        Ok(path) => path,
        Err(_) => {
            // fall back to per-point fits so one failing grid value does not poison the rest
            return grid
                .iter()
                .map(|&l| match method.fit(train, y_train, l, opts) {
                    Ok(t) => held_out_mse(train, t.coefs(), x_test, y_test),
                    Err(e) => {
                        log::debug!("cv: {method} failed at lambda {l}: {e}");
                        f64::INFINITY
                    }
                })
                .collect();
        }
    };
    path.points
        .iter()
        .map(|pt| held_out_mse(train, &pt.coefs, x_test, y_test))
        .collect()
}

fn held_out_mse(
    train: &StandardizedDesign,
    coefs: &crate::model::SparseCoefficients,
    x_test: &ndarray::Array2<f64>,
    y_test: &Array1<f64>,
) -> f64 {
    match train.predict(x_test.view(), coefs) {
        Ok(pred) => {
            let d = &pred - y_test;
            d.dot(&d) / y_test.len() as f64
        }
        Err(_) => f64::INFINITY,
    }
}
