//! Shared fixtures and independent reference computations for the
//! integration tests. Nothing here calls into the crate's own solvers.
#![allow(dead_code)]

use msp_core::simgen::Scenario;
use msp_core::{standardize, Dataset, StandardizedDesign};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.sample(StandardNormal))
}

/// Standardized Gaussian design with `y = X beta + sigma e` built on the
/// standardized columns.
pub fn instance(n: usize, p: usize, beta: &[f64], sigma: f64, seed: u64) -> (StandardizedDesign, Array1<f64>, Array1<f64>) {
    let mut r = rng(seed);
    let x = gaussian_matrix(&mut r, n, p);
    let d = standardize(&Dataset::new(x, Array1::zeros(n)).unwrap(), false).unwrap();
    let mut b = Array1::zeros(p);
    for (j, &v) in beta.iter().enumerate() {
        b[j] = v;
    }
    let noise = Array1::from_shape_fn(n, |_| sigma * r.sample::<f64, _>(StandardNormal));
    let y = d.x().dot(&b) + noise;
    (d, y, b)
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Option<Array1<f64>> {
    let k = b.len();
    let mut m = a.to_owned();
    let mut v = b.to_owned();
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))?;
        if m[[pivot, col]].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..k {
                m.swap([pivot, c], [col, c]);
            }
            v.swap(pivot, col);
        }
        for row in col + 1..k {
            let f = m[[row, col]] / m[[col, col]];
            for c in col..k {
                m[[row, c]] -= f * m[[col, c]];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = Array1::zeros(k);
    for row in (0..k).rev() {
        let mut acc = v[row];
        for c in row + 1..k {
            acc -= m[[row, c]] * x[c];
        }
        x[row] = acc / m[[row, row]];
    }
    Some(x)
}

/// Least squares on `cols` of `x` via the normal equations, solved by
/// [`gauss_solve`]. Returns the coefficients and the residual sum of squares.
pub fn subset_ols(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, cols: &[usize]) -> Option<(Array1<f64>, f64)> {
    let k = cols.len();
    if k == 0 {
        return Some((Array1::zeros(0), y.dot(&y)));
    }
    let xs = Array2::from_shape_fn((x.nrows(), k), |(i, a)| x[[i, cols[a]]]);
    let gram = xs.t().dot(&xs);
    let rhs = xs.t().dot(&y);
    let b = gauss_solve(gram.view(), rhs.view())?;
    let r = &y - &xs.dot(&b);
    Some((b, r.dot(&r)))
}

/// Exhaustive search for the size-`k` subset with the smallest residual sum
/// of squares.
pub fn best_subset_of_size(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, k: usize) -> Vec<usize> {
    let p = x.ncols();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1 << p) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let cols: Vec<usize> = (0..p).filter(|&j| mask & (1 << j) != 0).collect();
        if let Some((_, rss)) = subset_ols(x, y, &cols) {
            if rss < best.0 {
                best = (rss, cols);
            }
        }
    }
    best.1
}

/// Random `n x p` matrix with `(1/n) X'X = I`, by Gram-Schmidt.
pub fn orthonormal_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    let mut q = gaussian_matrix(rng, n, p);
    for j in 0..p {
        for k in 0..j {
            let proj = q.column(j).dot(&q.column(k));
            let ck = q.column(k).to_owned();
            q.column_mut(j).scaled_add(-proj, &ck);
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    q * (n as f64).sqrt()
}

pub fn soft(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub fn linf(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Covariance of the generator written out from its definition, without
/// going through the crate.
pub fn covariance_by_hand(scenario: Scenario, p: usize) -> Array2<f64> {
    let base = |j: usize, k: usize| match scenario {
        Scenario::Independent => f64::from(u8::from(j == k)),
        Scenario::Toeplitz => 0.5f64.powi((j as i32 - k as i32).abs()),
    };
    // x1 = A z + e/8 with z = (x2..xp)
    let mut a = vec![0.0; p];
    a[p - 1] = 7.0 / 8.0;
    a[1] = 3.0 / 8.0;
    for v in a.iter_mut().take(7).skip(2) {
        *v = 1.0 / 8.0;
    }
    let mut c = Array2::zeros((p, p));
    for j in 1..p {
        for k in 1..p {
            c[[j, k]] = base(j, k);
        }
    }
    for k in 1..p {
        let v: f64 = (1..p).map(|j| a[j] * base(j, k)).sum();
        c[[0, k]] = v;
        c[[k, 0]] = v;
    }
    c[[0, 0]] = 1.0 / 64.0 + (1..p).map(|j| (1..p).map(|k| a[j] * a[k] * base(j, k)).sum::<f64>()).sum::<f64>();
    c
}

pub fn irrepresentable_by_hand(c: &Array2<f64>, support: &[usize]) -> f64 {
    let k = support.len();
    let css = Array2::from_shape_fn((k, k), |(a, b)| c[[support[a], support[b]]]);
    let v = gauss_solve(css.view(), Array1::ones(k).view()).unwrap();
    (0..c.nrows())
        .filter(|j| !support.contains(j))
        .map(|j| support.iter().zip(v.iter()).map(|(&s, &w)| c[[j, s]] * w).sum::<f64>().abs())
        .fold(0.0, f64::max)
}
