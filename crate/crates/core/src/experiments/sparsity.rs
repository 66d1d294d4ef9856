//! Penalty selection under a cap on the number of selected variables.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorOptions, FitTrace, Method};
use crate::model::StandardizedDesign;

use super::path::{lambda_grid_with_ratio, lasso_path, path_from_lasso, DEFAULT_MIN_RATIO};

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityOptions {
    pub grid_size: usize,
    /// Grid floor relative to `lambda_max`.
    pub min_ratio: f64,
    /// Extra solves spent refining between bracketing grid points.
    pub max_bisections: usize,
    pub estimator: EstimatorOptions,
}

impl Default for SparsityOptions {
    fn default() -> Self {
        Self {
            grid_size: 100,
            min_ratio: DEFAULT_MIN_RATIO,
            max_bisections: 20,
            estimator: EstimatorOptions::default(),
        }
    }
}

/// Walks the decreasing grid until the fit first selects more than `k`
/// variables. Among the earlier fits with `1..=k` nonzeros it keeps the one
/// with the most nonzeros (smallest penalty on ties). If that fit sits right
/// before the violation, the gap is bisected on a log scale. The returned fit
/// always has at most `k` nonzeros.
pub fn select_lambda_for_sparsity(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    method: Method,
    k: usize,
    opts: &SparsityOptions,
) -> Result<(f64, FitTrace)> {
    if k == 0 || k > design.n().min(design.p()) {
        return Err(Error::invalid(format!("sparsity target must lie in [1, min(n, p)], got {k}")));
    }
    let grid = lambda_grid_with_ratio(design, y, opts.grid_size, opts.min_ratio)?;
    let est = &opts.estimator;
    let lasso = lasso_path(design, y, &grid, &est.solver)?;
    let path = path_from_lasso(design, y, method, &grid, lasso, est)?;

    let mut best: Option<usize> = None;
    let mut violation: Option<usize> = None;
    for (i, pt) in path.points.iter().enumerate() {
        let nz = pt.coefs.nz();
        if nz > k {
            violation = Some(i);
            break;
        }
        if nz >= 1 && best.is_none_or(|b| nz >= path.points[b].coefs.nz()) {
            best = Some(i);
        }
    }
    let best = best.ok_or_else(|| Error::invalid(format!("no grid penalty selects between 1 and {k} variables")))?;

    let mut chosen = grid[best];
    let mut trace = method.fit(design, y, chosen, est)?;
    if let Some(v) = violation.filter(|&v| v == best + 1) {
        let (mut upper, mut lower) = (grid[best], grid[v]);
        for _ in 0..opts.max_bisections {
            let mid = (upper * lower).sqrt();
            let fit = method.fit(design, y, mid, est)?;
            let nz = fit.coefs().nz();
            if nz <= k && nz >= trace.coefs().nz() {
                upper = mid;
                chosen = mid;
                trace = fit;
            } else if nz > k {
                lower = mid;
            } else {
                upper = mid;
            }
        }
    }
    Ok((chosen, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{standardize, Dataset};
    use crate::solver::dot;
    use ndarray::{Array1, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn data(n: usize, p: usize, seed: u64) -> (StandardizedDesign, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
        let beta = Array1::from_shape_fn(p, |j| if j < 4 { 1.0 + j as f64 } else { 0.0 });
        let y = x.dot(&beta) + Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        (standardize(&Dataset::new(x, y.clone()).unwrap(), false).unwrap(), y)
    }

    #[test]
    fn k_one_picks_first_entrant() {
        let (d, y) = data(50, 12, 1);
        let (_, fit) = select_lambda_for_sparsity(&d, y.view(), Method::Lasso, 1, &SparsityOptions::default()).unwrap();
        assert_eq!(fit.coefs().nz(), 1);
        let ys = y.as_slice().unwrap();
        let first = (0..12)
            .max_by(|&a, &b| dot(d.column(a), ys).abs().total_cmp(&dot(d.column(b), ys).abs()))
            .unwrap();
        assert_eq!(fit.coefs().support(), &[first]);
    }

    #[test]
    fn k_equal_p_with_tiny_floor_is_near_ols() {
        let (d, y) = data(60, 6, 2);
        let opts = SparsityOptions {
            min_ratio: 1e-9,
            ..Default::default()
        };
        let (_, fit) = select_lambda_for_sparsity(&d, y.view(), Method::Lasso, 6, &opts).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let ols = crate::estimators::restricted_least_squares(&d, y.view(), &all).unwrap();
        for j in 0..6 {
            assert!((fit.coefs().values()[j] - ols[j]).abs() < 1e-5);
        }
    }

    #[test]
    fn respects_cap_for_every_method() {
        let (d, y) = data(40, 30, 3);
        for m in Method::ALL {
            let (_, fit) = select_lambda_for_sparsity(&d, y.view(), m, 3, &SparsityOptions::default()).unwrap();
            assert!((1..=3).contains(&fit.coefs().nz()), "{m}");
        }
        assert!(select_lambda_for_sparsity(&d, y.view(), Method::Lasso, 0, &SparsityOptions::default()).is_err());
        assert!(select_lambda_for_sparsity(&d, y.view(), Method::Lasso, 41, &SparsityOptions::default()).is_err());
    }
}
