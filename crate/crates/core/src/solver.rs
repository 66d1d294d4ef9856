//! Weighted-l1 least squares by cyclic coordinate descent.
//!
//! Minimizes
//!
//! ```text
//! (1/2) ||y - X b||^2 + lambda * sum_j w_j |b_j|
//! ```
//!
//! subject to `b_j = 0` for every `j` outside an optional restriction set.
//! Note the loss carries no `1/n` factor: a `lambda` from a `1/(2n)`-scaled
//! implementation corresponds to `n * lambda` here.
//!
//! The kernel alternates full cyclic passes over every admissible coordinate
//! with passes over the current nonzero set. Convergence needs a full pass
//! whose largest coordinate move is at most `tol` *and* a KKT residual of at
//! most `10 * tol`, so a converged report always carries its own certificate.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::model::{SparseCoefficients, StandardizedDesign};

/// Residual is rebuilt from scratch after this many passes to cap drift.
const RESIDUAL_REFRESH: usize = 100;

/// Active-set passes between attempts at a direct solve on the active set.
const POLISH_EVERY: usize = 10;
/// Coordinates a single polish call may drop before handing back to descent.
const POLISH_DROPS: usize = 8;
/// Pivot-to-diagonal ratio below which a Gram block counts as singular.
const SINGULAR_RATIO: f64 = 1e-10;

/// Penalty level, per-coefficient weights and an optional active-set restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    lambda: f64,
    weights: Array1<f64>,
    restriction: Option<Vec<usize>>,
}

impl PenaltySpec {
    /// `restriction` is sorted and deduplicated; coefficients outside it are pinned to zero.
    pub fn new(lambda: f64, weights: Array1<f64>, restriction: Option<Vec<usize>>) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!("penalty weights must be finite and nonnegative, got {w}")));
        }
        let restriction = restriction.map(|mut r| {
            r.sort_unstable();
            r.dedup();
            r
        });
        if let Some(r) = &restriction {
            if r.last().is_some_and(|&j| j >= weights.len()) {
                return Err(Error::invalid("restriction index out of range"));
            }
        }
        Ok(Self {
            lambda,
            weights,
            restriction,
        })
    }

    /// Plain lasso penalty: unit weights, no restriction.
    pub fn unit(lambda: f64, p: usize) -> Result<Self> {
        Self::new(lambda, Array1::ones(p), None)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn restriction(&self) -> Option<&[usize]> {
        self.restriction.as_deref()
    }

    pub fn p(&self) -> usize {
        self.weights.len()
    }

    /// Coordinates the solver may move, ascending.
    pub fn admissible(&self) -> Vec<usize> {
        match &self.restriction {
            Some(r) => r.clone(),
            None => (0..self.weights.len()).collect(),
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.weights.clone(), self.restriction.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Bound on the largest coordinate move in a full pass.
    pub tol: f64,
    /// Cap on coordinate passes (full and active-set passes both count).
    pub max_sweeps: usize,
    pub warm_start: Option<Array1<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 10_000,
            warm_start: None,
        }
    }
}

impl SolverOptions {
    pub fn warm(&self, start: ArrayView1<'_, f64>) -> Self {
        Self {
            warm_start: Some(start.to_owned()),
            ..self.clone()
        }
    }

    pub fn cold(&self) -> Self {
        Self {
            warm_start: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub coefs: SparseCoefficients,
    pub sweeps_used: usize,
    pub converged: bool,
    pub kkt_violation: f64,
    /// The penalty this report solves, for re-checking optimality later.
    pub penalty: PenaltySpec,
}

/// `sign(z) * max(|z| - t, 0)`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Smallest `lambda` at which the zero vector is optimal:
/// `max_j |x_j' y| / w_j`. Coordinates with infinite weight never enter and
/// are skipped.
pub fn lambda_max(design: &StandardizedDesign, y: ArrayView1<'_, f64>, weights: ArrayView1<'_, f64>) -> Result<f64> {
    if y.len() != design.n() || weights.len() != design.p() {
        return Err(Error::dims("lambda_max inputs do not match the design"));
    }
    let y = y.as_standard_layout();
    let y = y.as_slice().expect("standard layout");
    let mut best: Option<f64> = None;
    for (j, &w) in weights.iter().enumerate() {
        if w == f64::INFINITY {
            continue;
        }
        if !(w > 0.0) {
            return Err(Error::invalid(format!(
                "lambda_max needs strictly positive weights, coordinate {j} has {w}"
            )));
        }
        let v = dot(design.column(j), y).abs() / w;
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    best.ok_or_else(|| Error::invalid("lambda_max: every weight is infinite"))
}

/// Largest KKT residual of `coefs` for the weighted-l1 problem.
///
/// Active `j`: `|x_j'r - lambda w_j sign(b_j)|`; inactive admissible `j`:
/// `max(|x_j'r| - lambda w_j, 0)`. A nonzero coefficient outside the
/// restriction yields `+inf`.
///
/// # Panics
///
/// Panics if `y`, `penalty` or `coefs` do not match the design dimensions.
pub fn kkt_check(design: &StandardizedDesign, y: ArrayView1<'_, f64>, penalty: &PenaltySpec, coefs: &SparseCoefficients) -> f64 {
    assert_eq!(y.len(), design.n(), "response length");
    assert_eq!(penalty.p(), design.p(), "penalty width");
    assert_eq!(coefs.len(), design.p(), "coefficient length");
    let beta = coefs.values();
    let resid = &y - &design.fitted(beta);
    let beta = beta.to_vec();
    let thresholds = thresholds(penalty);
    kkt_from_residual(design, resid.as_slice().unwrap(), &beta, &thresholds, penalty)
}

fn thresholds(penalty: &PenaltySpec) -> Vec<f64> {
    penalty.weights.iter().map(|w| penalty.lambda * w).collect()
}

fn kkt_from_residual(design: &StandardizedDesign, resid: &[f64], beta: &[f64], thresholds: &[f64], penalty: &PenaltySpec) -> f64 {
    let mut worst: f64 = 0.0;
    let mut check = |j: usize| {
        let g = dot(design.column(j), resid);
        let t = thresholds[j];
        let v = if beta[j] != 0.0 {
            (g - t * beta[j].signum()).abs()
        } else {
            (g.abs() - t).max(0.0)
        };
        worst = worst.max(v);
    };
    match penalty.restriction() {
        Some(r) => {
            r.iter().copied().for_each(&mut check);
            let mut allowed = vec![false; beta.len()];
            r.iter().for_each(|&j| allowed[j] = true);
            if beta.iter().zip(&allowed).any(|(&b, &ok)| b != 0.0 && !ok) {
                return f64::INFINITY;
            }
        }
        None => (0..beta.len()).for_each(&mut check),
    }
    worst
}

/// Solves the weighted, restricted lasso problem described in the module docs.
///
/// Weight 0 leaves a coordinate unpenalized. Running out of passes is not an
/// error: the report comes back with `converged == false`.
pub fn fit_weighted_lasso(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let (n, p) = (design.n(), design.p());
    if y.len() != n {
        return Err(Error::dims(format!("response length {} for {n} rows", y.len())));
    }
    if penalty.p() != p {
        return Err(Error::dims(format!("{} penalty weights for {p} columns", penalty.p())));
    }
    if !(opts.tol > 0.0) || opts.max_sweeps == 0 {
        return Err(Error::invalid("solver needs tol > 0 and max_sweeps >= 1"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }

    let admissible = penalty.admissible();
    let mut beta = vec![0.0; p];
    if let Some(start) = &opts.warm_start {
        if start.len() != p {
            return Err(Error::dims("warm start length"));
        }
        for &j in &admissible {
            if !start[j].is_finite() {
                return Err(Error::NonFinite("warm start"));
            }
            beta[j] = start[j];
        }
    }

    let y: Vec<f64> = y.iter().copied().collect();
    let mut cd = Descent {
        design,
        y: &y,
        col_sq: design.col_sq_norms(),
        thresholds: thresholds(penalty),
        resid: vec![0.0; n],
        beta,
    };
    cd.refresh_residual();

    let tol = opts.tol;
    let mut sweeps = 0;
    let mut since_refresh = 0;
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    let mut active = Vec::new();

    'outer: while sweeps < opts.max_sweeps {
        let change = cd.pass(&admissible)?;
        sweeps += 1;
        since_refresh += 1;
        if change <= tol {
            cd.refresh_residual();
            since_refresh = 0;
            kkt = kkt_from_residual(design, &cd.resid, &cd.beta, &cd.thresholds, penalty);
            if kkt <= 10.0 * tol {
                converged = true;
                break;
            }
            // tiny moves without optimality: an ill-conditioned active set
            active.clear();
            active.extend(admissible.iter().copied().filter(|&j| cd.beta[j] != 0.0));
            cd.polish(&active);
            continue;
        }
        active.clear();
        active.extend(admissible.iter().copied().filter(|&j| cd.beta[j] != 0.0));
        for inner in 1.. {
            if sweeps >= opts.max_sweeps {
                break 'outer;
            }
            if inner % POLISH_EVERY == 0 {
                cd.polish(&active);
            }
            if since_refresh >= RESIDUAL_REFRESH {
                cd.refresh_residual();
                since_refresh = 0;
            }
            let change = cd.pass(&active)?;
            sweeps += 1;
            since_refresh += 1;
            if change <= tol {
                break;
            }
        }
    }

    if !converged {
        cd.refresh_residual();
        kkt = kkt_from_residual(design, &cd.resid, &cd.beta, &cd.thresholds, penalty);
    }
    Ok(SolveReport {
        coefs: SparseCoefficients::from_values(Array1::from(cd.beta)),
        sweeps_used: sweeps,
        converged,
        kkt_violation: kkt,
        penalty: penalty.clone(),
    })
}

struct Descent<'a> {
    design: &'a StandardizedDesign,
    y: &'a [f64],
    col_sq: ArrayView1<'a, f64>,
    thresholds: Vec<f64>,
    resid: Vec<f64>,
    beta: Vec<f64>,
}

impl Descent<'_> {
    fn refresh_residual(&mut self) {
        self.resid.copy_from_slice(self.y);
        for (j, &b) in self.beta.iter().enumerate() {
            if b != 0.0 {
                axpy(&mut self.resid, -b, self.design.column(j));
            }
        }
    }

    /// Objective restricted to the coordinates in `idx`; the rest are constant.
    fn partial_objective(&self, idx: &[usize]) -> f64 {
        let rss: f64 = self.resid.iter().map(|r| r * r).sum();
        let pen: f64 = idx.iter().map(|&j| self.thresholds[j] * self.beta[j].abs()).sum();
        0.5 * rss + pen
    }

    /// Active-set Newton step over `active`: moves toward the minimizer of the
    /// smooth problem with the current signs fixed, stopping where the first
    /// coordinate reaches zero, dropping it and repeating. Every move stays in
    /// the current orthant, where the objective is a convex quadratic, so the
    /// objective never increases. When the active columns are linearly
    /// dependent it instead slides along a null direction, which leaves the
    /// fit unchanged and lowers the penalty, until a coordinate reaches zero.
    /// Returns whether the iterate moved.
    fn polish(&mut self, active: &[usize]) -> bool {
        let (n, k0) = (self.y.len(), active.len());
        if k0 == 0 || k0 > 2 * n + 10 {
            return false;
        }
        let cols: Vec<&[f64]> = active.iter().map(|&j| self.design.column(j)).collect();
        let mut gram = DMatrix::zeros(k0, k0);
        for a in 0..k0 {
            for b in 0..=a {
                let v = dot(cols[a], cols[b]);
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
        }
        let xty: Vec<f64> = cols.iter().map(|c| dot(c, self.y)).collect();

        // positions into `active` still in play
        let mut set: Vec<usize> = (0..k0).filter(|&i| self.beta[active[i]] != 0.0).collect();
        let mut moved = false;
        for _ in 0..POLISH_DROPS {
            if set.is_empty() {
                break;
            }
            let k = set.len();
            let sub = DMatrix::from_fn(k, k, |a, b| gram[(set[a], set[b])]);
            let dir = match partial_cholesky(&sub) {
                Ok(l) => {
                    let rhs = DVector::from_fn(k, |a, _| {
                        let j = active[set[a]];
                        xty[set[a]] - self.thresholds[j] * self.beta[j].signum()
                    });
                    let Some(target) = l.solve_lower_triangular(&rhs).and_then(|w| l.tr_solve_lower_triangular(&w)) else {
                        return moved;
                    };
                    Direction::Newton(target)
                }
                Err((m, l)) => {
                    // column m is a combination of columns 0..m
                    let lm = l.view((0, 0), (m, m));
                    let g = sub.view((0, m), (m, 1)).into_owned();
                    let Some(u) = lm.solve_lower_triangular(&g).and_then(|w| lm.tr_solve_lower_triangular(&w)) else {
                        return moved;
                    };
                    let mut v = DVector::zeros(k);
                    v.rows_mut(0, m).copy_from(&(-u));
                    v[m] = 1.0;
                    Direction::Null(v)
                }
            };
            match self.step(&set, active, &cols, dir) {
                Some(Some(a)) => {
                    set.remove(a);
                    moved = true;
                }
                Some(None) => return true,
                None => return moved,
            }
        }
        moved
    }

    /// Applies one polish move to the coordinates in `set`. Returns `None` if
    /// nothing moved, `Some(Some(a))` when position `a` of `set` was zeroed
    /// and `Some(None)` when a Newton step completed unblocked.
    fn step(&mut self, set: &[usize], active: &[usize], cols: &[&[f64]], dir: Direction) -> Option<Option<usize>> {
        let from: Vec<f64> = set.iter().map(|&i| self.beta[active[i]]).collect();
        let (delta, max_step) = match dir {
            Direction::Newton(target) => (DVector::from_fn(set.len(), |a, _| target[a] - from[a]), 1.0),
            Direction::Null(mut v) => {
                let slope: f64 = set
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| self.thresholds[active[i]] * from[a].signum() * v[a])
                    .sum();
                if slope > 0.0 {
                    v.neg_mut();
                }
                (v, f64::INFINITY)
            }
        };
        // largest step keeping every sign, and the coordinate that limits it
        let mut step = max_step;
        let mut blocking = None;
        for a in 0..set.len() {
            if from[a] * delta[a] < 0.0 {
                let t = -from[a] / delta[a];
                if t < step {
                    step = t;
                    blocking = Some(a);
                }
            }
        }
        if !step.is_finite() {
            return None;
        }
        let idx: Vec<usize> = set.iter().map(|&i| active[i]).collect();
        let before = self.partial_objective(&idx);
        for (a, &i) in set.iter().enumerate() {
            let new = if Some(a) == blocking { 0.0 } else { from[a] + step * delta[a] };
            axpy(&mut self.resid, self.beta[idx[a]] - new, cols[i]);
            self.beta[idx[a]] = new;
        }
        if self.partial_objective(&idx) > before {
            // rounding on a nearly singular system; undo
            for (a, &i) in set.iter().enumerate() {
                axpy(&mut self.resid, self.beta[idx[a]] - from[a], cols[i]);
                self.beta[idx[a]] = from[a];
            }
            return None;
        }
        Some(blocking)
    }

    /// One cyclic pass over `idx`; returns the largest coordinate move.
    fn pass(&mut self, idx: &[usize]) -> Result<f64> {
        let before = if cfg!(debug_assertions) { self.partial_objective(idx) } else { 0.0 };
        let mut max_change: f64 = 0.0;
        for &j in idx {
            let c = self.col_sq[j];
            if c <= 0.0 {
                continue;
            }
            let col = self.design.column(j);
            let old = self.beta[j];
            let z = dot(col, &self.resid) + c * old;
            if !z.is_finite() {
                return Err(Error::NonFinite("coordinate descent update"));
            }
            let new = soft_threshold(z, self.thresholds[j]) / c;
            if new != old {
                axpy(&mut self.resid, old - new, col);
                self.beta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if cfg!(debug_assertions) {
            let after = self.partial_objective(idx);
            debug_assert!(
                after <= before + 1e-9 * before.abs().max(1.0),
                "objective increased during a pass: {before} -> {after}"
            );
        }
        Ok(max_change)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

enum Direction {
    /// Minimizer of the sign-fixed quadratic.
    Newton(DVector<f64>),
    /// Null vector of the active Gram block.
    Null(DVector<f64>),
}

/// Lower Cholesky factor of a symmetric matrix, or the first column whose
/// pivot falls below `SINGULAR_RATIO` times the largest diagonal entry along
/// with the columns factored so far.
fn partial_cholesky(a: &DMatrix<f64>) -> std::result::Result<DMatrix<f64>, (usize, DMatrix<f64>)> {
    let k = a.nrows();
    let top = a.diagonal().max().max(f64::MIN_POSITIVE);
    let mut l = DMatrix::zeros(k, k);
    for j in 0..k {
        let mut d = a[(j, j)];
        for c in 0..j {
            d -= l[(j, c)] * l[(j, c)];
        }
        if !(d > SINGULAR_RATIO * top) {
            return Err((j, l));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..k {
            let mut v = a[(i, j)];
            for c in 0..j {
                v -= l[(i, c)] * l[(j, c)];
            }
            l[(i, j)] = v / d;
        }
    }
    Ok(l)
}

#[inline]
fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{standardize, Dataset};
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_design(n: usize, p: usize, seed: u64) -> (StandardizedDesign, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0));
        let y = Array1::from_shape_fn(n, |_| rng.random_range(-2.0..2.0));
        let d = standardize(&Dataset::new(x, y.clone()).unwrap(), false).unwrap();
        (d, y)
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(0.0, 5.0), 0.0);
        assert_eq!(soft_threshold(-4.0, 1.5), -2.5);
        // tie goes to zero
        assert_eq!(soft_threshold(1.0, 1.0), 0.0);
    }

    #[test]
    fn lambda_max_of_own_column() {
        let x = Array2::from_shape_fn((8, 2), |(i, j)| if (i + j) % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + j as f64));
        let data = Dataset::new(x, Array1::zeros(8)).unwrap();
        let d = standardize(&data, false).unwrap();
        let y = Array1::from(d.column(0).to_vec());
        let lm = lambda_max(&d, y.view(), Array1::ones(2).view()).unwrap();
        assert!((lm - 8.0).abs() < 1e-12);
        let lm2 = lambda_max(&d, y.view(), Array1::from_elem(2, 2.0).view()).unwrap();
        assert!((lm2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_max_orthogonal_response_is_zero() {
        let x = array![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
        let data = Dataset::new(x, Array1::zeros(4)).unwrap();
        let d = standardize(&data, false).unwrap();
        let y = array![1.0, -1.0, -1.0, 1.0];
        assert_eq!(lambda_max(&d, y.view(), Array1::ones(2).view()).unwrap(), 0.0);
    }

    #[test]
    fn lambda_max_weight_errors() {
        let (d, y) = random_design(10, 3, 1);
        assert!(lambda_max(&d, y.view(), array![1.0, 0.0, 1.0].view()).is_err());
        let inf = Array1::from_elem(3, f64::INFINITY);
        assert!(lambda_max(&d, y.view(), inf.view()).is_err());
        let partial = array![f64::INFINITY, 1.0, f64::INFINITY];
        let lm = lambda_max(&d, y.view(), partial.view()).unwrap();
        assert!((lm - dot(d.column(1), y.as_slice().unwrap()).abs()).abs() < 1e-12);
    }

    #[test]
    fn zero_above_lambda_max() {
        let (d, y) = random_design(30, 10, 2);
        let lm = lambda_max(&d, y.view(), Array1::ones(10).view()).unwrap();
        let pen = PenaltySpec::unit(lm * 1.0001, 10).unwrap();
        let rep = fit_weighted_lasso(&d, y.view(), &pen, &SolverOptions::default()).unwrap();
        assert_eq!(rep.coefs.nz(), 0);
        assert!(rep.converged);
        assert!(rep.sweeps_used <= 2);
        let at = PenaltySpec::unit(lm, 10).unwrap();
        let v = kkt_check(&d, y.view(), &at, &SparseCoefficients::zeros(10));
        assert!(v <= 1e-10);
    }

    #[test]
    fn restriction_pins_coordinates() {
        let (d, y) = random_design(40, 12, 3);
        let pen = PenaltySpec::new(0.5, Array1::ones(12), Some(vec![7, 2, 2, 9])).unwrap();
        assert_eq!(pen.restriction(), Some(&[2, 7, 9][..]));
        let rep = fit_weighted_lasso(&d, y.view(), &pen, &SolverOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.coefs.support().iter().all(|j| [2, 7, 9].contains(j)));
        assert!(rep.kkt_violation <= 1e-6);
    }

    #[test]
    fn warm_start_outside_restriction_is_ignored() {
        let (d, y) = random_design(30, 6, 4);
        let pen = PenaltySpec::new(1.0, Array1::ones(6), Some(vec![0, 1])).unwrap();
        let opts = SolverOptions::default().warm(Array1::from_elem(6, 3.0).view());
        let rep = fit_weighted_lasso(&d, y.view(), &pen, &opts).unwrap();
        assert!(rep.coefs.support().iter().all(|&j| j < 2));
    }

    #[test]
    fn kkt_flags_nonzero_outside_restriction() {
        let (d, y) = random_design(20, 4, 5);
        let pen = PenaltySpec::new(1.0, Array1::ones(4), Some(vec![0])).unwrap();
        let c = SparseCoefficients::from_values(array![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(kkt_check(&d, y.view(), &pen, &c), f64::INFINITY);
    }

    #[test]
    fn perturbing_active_coefficient_raises_violation() {
        let (d, y) = random_design(50, 8, 6);
        let pen = PenaltySpec::unit(3.0, 8).unwrap();
        let rep = fit_weighted_lasso(&d, y.view(), &pen, &SolverOptions::default()).unwrap();
        let base = kkt_check(&d, y.view(), &pen, &rep.coefs);
        let j = rep.coefs.support()[0];
        let mut v = rep.coefs.values().to_owned();
        v[j] += 0.1;
        let bumped = kkt_check(&d, y.view(), &pen, &SparseCoefficients::from_values(v));
        assert!(bumped > base);
    }

    #[test]
    fn zero_weight_is_unpenalized() {
        let (d, y) = random_design(40, 5, 8);
        let pen = PenaltySpec::new(1e6, array![0.0, 1.0, 1.0, 1.0, 1.0], None).unwrap();
        let rep = fit_weighted_lasso(&d, y.view(), &pen, &SolverOptions::default()).unwrap();
        assert_eq!(rep.coefs.support(), &[0]);
        let c0 = d.column(0);
        let expect = dot(c0, y.as_slice().unwrap()) / dot(c0, c0);
        assert!((rep.coefs.values()[0] - expect).abs() < 1e-8);
    }

    #[test]
    fn non_convergence_is_reported() {
        let (d, y) = random_design(40, 20, 9);
        let pen = PenaltySpec::unit(0.01, 20).unwrap();
        let opts = SolverOptions {
            max_sweeps: 1,
            ..Default::default()
        };
        let rep = fit_weighted_lasso(&d, y.view(), &pen, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.sweeps_used, 1);
    }

    #[test]
    fn rejects_bad_options_and_penalties() {
        let (d, y) = random_design(10, 3, 10);
        assert!(PenaltySpec::unit(-1.0, 3).is_err());
        assert!(PenaltySpec::new(1.0, array![1.0, f64::INFINITY, 1.0], None).is_err());
        assert!(PenaltySpec::new(1.0, array![1.0, 1.0, 1.0], Some(vec![3])).is_err());
        let pen = PenaltySpec::unit(1.0, 3).unwrap();
        let bad = SolverOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(fit_weighted_lasso(&d, y.view(), &pen, &bad).is_err());
        let wrong = PenaltySpec::unit(1.0, 4).unwrap();
        assert!(fit_weighted_lasso(&d, y.view(), &wrong, &SolverOptions::default()).is_err());
        let mut ynan = y.clone();
        ynan[0] = f64::NAN;
        assert!(matches!(
            fit_weighted_lasso(&d, ynan.view(), &pen, &SolverOptions::default()),
            Err(Error::NonFinite(_))
        ));
    }
}
