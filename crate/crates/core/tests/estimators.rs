mod common;

use common::*;
use msp_core::estimators::{fit_capped_l1, fit_lla_default, fit_msp, penalty_derivative, EstimatorOptions, Method, PenaltyKind};
use msp_core::solver::{lambda_max, SolverOptions};
use msp_core::{destandardize, standardize, Dataset};
use ndarray::{Array1, Array2, Axis};
use proptest::prelude::*;

fn lmax(d: &msp_core::StandardizedDesign, y: &Array1<f64>) -> f64 {
    lambda_max(d, y.view(), Array1::ones(d.p()).view()).unwrap()
}

/// `X_j' r` for every column, computed from scratch.
fn correlations(x: ndarray::ArrayView2<'_, f64>, y: &Array1<f64>, b: ndarray::ArrayView1<'_, f64>) -> Array1<f64> {
    let r = y - &x.dot(&b);
    x.t().dot(&r)
}

#[test]
fn msp_recovers_the_best_subset_with_large_signal() {
    for seed in 0..5 {
        let (d, y, _) = instance(30, 6, &[5.0, 5.0], 0.01, 200 + seed);
        let lambda = 0.05 * lmax(&d, &y);
        let fit = Method::Msp.fit(&d, y.view(), lambda, &EstimatorOptions::default()).unwrap();
        assert!(fit.converged);
        let best = best_subset_of_size(d.x(), y.view(), 2);
        assert_eq!(fit.coefs().support(), best.as_slice(), "seed {seed}");

        // fixed point: X_S'X_S b = X_S'y - lambda sign(b)/|b|
        let b = fit.coefs().values();
        let g = correlations(d.x(), &y, b);
        for &j in &best {
            let target = lambda * b[j].signum() / b[j].abs();
            assert!((g[j] - target).abs() < 1e-3 * lambda, "seed {seed} j {j}: {} vs {target}", g[j]);
        }
        let (ols, _) = subset_ols(d.x(), y.view(), &best).unwrap();
        for (a, &j) in best.iter().enumerate() {
            assert!((b[j] - ols[a]).abs() < 0.2);
        }
    }
}

#[test]
fn post_lasso_solves_the_normal_equations() {
    let (d, y, _) = instance(40, 10, &[2.0, -1.5, 1.0], 0.5, 7);
    let lambda = 0.1 * lmax(&d, &y);
    let fit = Method::PostLasso.fit(&d, y.view(), lambda, &EstimatorOptions::default()).unwrap();
    let lasso = Method::Lasso.fit(&d, y.view(), lambda, &EstimatorOptions::default()).unwrap();
    let support = lasso.coefs().support().to_vec();
    assert!(!support.is_empty());
    assert_eq!(fit.coefs().support(), support.as_slice());
    let (ols, _) = subset_ols(d.x(), y.view(), &support).unwrap();
    for (a, &j) in support.iter().enumerate() {
        assert!((fit.coefs().values()[j] - ols[a]).abs() < 1e-6);
    }
}

#[test]
fn capped_l1_satisfies_its_mixed_conditions() {
    let (d, y, _) = instance(50, 20, &[3.0, -3.0, 2.0], 0.5, 11);
    let opts = EstimatorOptions::default();
    let lambda = 0.1 * lmax(&d, &y);
    let fit = fit_capped_l1(&d, y.view(), lambda, opts.cap_a, &opts).unwrap();
    assert!(fit.converged);
    let b = fit.coefs().values();
    let g = correlations(d.x(), &y, b);
    let slack = 1e-4 * lambda;
    for j in 0..20 {
        if b[j].abs() >= opts.cap_a {
            assert!(g[j].abs() < slack, "capped coordinate {j} not at least squares: {}", g[j]);
        } else if b[j] != 0.0 {
            assert!((g[j] - lambda * b[j].signum()).abs() < slack);
        } else {
            assert!(g[j].abs() <= lambda + slack);
        }
    }
    assert!([0, 1, 2].iter().all(|&j| b[j].abs() >= opts.cap_a));
}

#[test]
fn lla_scad_leaves_large_coefficients_unpenalized() {
    let (d, y, _) = instance(60, 15, &[3.0, -2.5], 0.5, 12);
    let lambda = 0.1 * lmax(&d, &y);
    let kind = PenaltyKind::scad(3.7).unwrap();
    let opts = EstimatorOptions::default();
    let fit = fit_lla_default(&d, y.view(), lambda, kind, &opts).unwrap();
    assert!(fit.converged);
    let b = fit.coefs().values();
    let g = correlations(d.x(), &y, b);
    let per_obs = lambda / 60.0;
    for j in 0..15 {
        let w = penalty_derivative(kind, b[j].abs(), per_obs) / per_obs;
        assert!(
            g[j].abs() <= lambda * w + 1e-3 * lambda,
            "j {j}: |g| {} bound {}",
            g[j].abs(),
            lambda * w
        );
    }
    assert!(b[0].abs() > 3.7 * per_obs && g[0].abs() < 1e-3 * lambda);
}

#[test]
fn adaptive_lasso_is_closer_to_the_truth_than_the_lasso() {
    // each method at its own best penalty on a shared grid
    let opts = EstimatorOptions::default();
    let (mut adaptive, mut lasso) = (0.0, 0.0);
    for seed in 0..10 {
        let (d, y, beta) = instance(50, 20, &[2.0, -2.0, 1.5, 1.0], 1.0, 300 + seed);
        let lm = lmax(&d, &y);
        let best = |m: Method| {
            (0..20)
                .map(|k| {
                    let lambda = lm * 0.5 * 0.7f64.powi(k);
                    let c = m.fit(&d, y.view(), lambda, &opts).unwrap();
                    (&c.coefs().values() - &beta).mapv(|v| v * v).sum().sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        };
        adaptive += best(Method::AdaptiveLasso);
        lasso += best(Method::Lasso);
    }
    assert!(adaptive < lasso, "adaptive {adaptive} lasso {lasso}");
}

#[test]
fn every_method_certifies_its_final_step() {
    let opts = EstimatorOptions::default();
    for seed in 0..5 {
        let (d, y, _) = instance(60, 40, &[1.5, -1.0, 1.0, 0.8], 1.0, 400 + seed);
        let lm = lmax(&d, &y);
        for frac in [0.3, 0.05, 0.01] {
            for m in Method::ALL {
                let fit = m.fit(&d, y.view(), lm * frac, &opts).unwrap();
                let last = fit.final_report();
                assert!(last.converged, "{m} seed {seed} frac {frac}");
                assert!(last.kkt_violation <= 10.0 * opts.solver.tol, "{m}: kkt {}", last.kkt_violation);
            }
        }
    }
}

#[test]
fn destandardized_fit_solves_the_raw_scale_problem() {
    let mut r = rng(21);
    let mut x = gaussian_matrix(&mut r, 20, 5);
    for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
        col.mapv_inplace(|v| v * (0.5 + j as f64) + 0.1);
    }
    let y = x.column(0).to_owned() * 1.0 - &(x.column(3).to_owned() * 0.5) + gaussian_matrix(&mut r, 20, 1).column(0).to_owned() * 0.3;
    let d = standardize(&Dataset::new(x.clone(), y.clone()).unwrap(), false).unwrap();
    let lambda = 0.2 * lmax(&d, &y);
    let fit = Method::Lasso.fit(&d, y.view(), lambda, &EstimatorOptions::default()).unwrap();
    let raw = destandardize(fit.coefs(), &d).unwrap();
    // raw problem: penalty weight for column j is lambda * scale_j
    let g = correlations(x.view(), &y, raw.values());
    let scales = d.scales();
    for j in 0..5 {
        let w = lambda * scales[j];
        let b = raw.values()[j];
        if b != 0.0 {
            assert!((g[j] - w * b.signum()).abs() < 1e-5 * w);
        } else {
            assert!(g[j].abs() <= w * (1.0 + 1e-6));
        }
    }
}

#[test]
fn msp_is_equivariant_under_column_permutation() {
    let (d, y, _) = instance(30, 8, &[2.0, 0.0, -1.5, 0.0, 1.0], 0.5, 31);
    let perm = [5, 2, 7, 0, 1, 6, 4, 3];
    let xp: Array2<f64> = d.x().select(Axis(1), &perm);
    let dp = standardize(&Dataset::new(xp, y.clone()).unwrap(), false).unwrap();
    let lambda = 0.05 * lmax(&d, &y);
    let opts = EstimatorOptions::default();
    let a = Method::Msp.fit(&d, y.view(), lambda, &opts).unwrap();
    let b = Method::Msp.fit(&dp, y.view(), lambda, &opts).unwrap();
    for (k, &j) in perm.iter().enumerate() {
        assert!((a.coefs().values()[j] - b.coefs().values()[k]).abs() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn msp_screens_never_grow(seed in 0u64..10_000, f0 in 0.02f64..0.5, f in 0.005f64..0.5) {
        let (d, y, _) = instance(40, 30, &[1.5, -1.0, 1.0], 1.0, seed);
        let lm = lmax(&d, &y);
        let fit = fit_msp(&d, y.view(), lm * f0, lm * f, &EstimatorOptions::default()).unwrap();
        for pair in fit.steps.windows(2) {
            prop_assert!(pair[1].active_set.iter().all(|j| pair[0].active_set.contains(j)));
        }
        prop_assert!(fit.steps_used() <= 50);
    }

    #[test]
    fn huge_penalty_gives_zero_for_every_method(seed in 0u64..10_000, mult in 1.0f64..100.0) {
        let (d, y, _) = instance(25, 10, &[1.0], 1.0, seed);
        let lambda = lmax(&d, &y) * mult;
        for m in Method::ALL {
            let fit = m.fit(&d, y.view(), lambda, &EstimatorOptions { solver: SolverOptions::default(), ..EstimatorOptions::default() }).unwrap();
            prop_assert_eq!(fit.coefs().nz(), 0);
        }
    }
}
