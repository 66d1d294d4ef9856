//! Estimators built as reweighting policies over the weighted-lasso kernel.
//!
//! Every estimator starts from a plain lasso fit and records each kernel
//! solve in a [`FitTrace`]. The multi-screen penalty (MSP) re-solves with
//! weights `1/|b_j|` from the previous step, restricted to the previous
//! active set, until the active set and the coefficients stop moving.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{SparseCoefficients, StandardizedDesign};
use crate::solver::{fit_weighted_lasso, lambda_max, PenaltySpec, SolveReport, SolverOptions};

/// Adaptive weights `1/|b|` are clamped here.
pub const MAX_ADAPTIVE_WEIGHT: f64 = 1e12;

/// One kernel solve of a multi-step fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    /// Support of this step's solution.
    pub active_set: Vec<usize>,
    pub report: SolveReport,
}

impl TraceStep {
    fn new(report: SolveReport) -> Self {
        Self {
            active_set: report.coefs.support().to_vec(),
            report,
        }
    }
}

/// Every solve of a (possibly multi-step) fit; the last step is the estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
}

impl FitTrace {
    pub fn steps_used(&self) -> usize {
        self.steps.len()
    }

    pub fn final_report(&self) -> &SolveReport {
        &self.steps.last().expect("trace has at least one step").report
    }

    pub fn coefs(&self) -> &SparseCoefficients {
        &self.final_report().coefs
    }

    pub fn into_coefs(mut self) -> SparseCoefficients {
        self.steps.pop().expect("trace has at least one step").report.coefs
    }
}

/// Concave penalty whose derivative drives the LLA weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PenaltyKind {
    Scad { a: f64 },
    Mcp { gamma: f64 },
}

impl PenaltyKind {
    pub fn scad(a: f64) -> Result<Self> {
        if !(a > 2.0) {
            return Err(Error::invalid(format!("SCAD needs a > 2, got {a}")));
        }
        Ok(PenaltyKind::Scad { a })
    }

    pub fn mcp(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::invalid(format!("MCP needs gamma > 1, got {gamma}")));
        }
        Ok(PenaltyKind::Mcp { gamma })
    }
}

/// Derivative of the SCAD or MCP penalty at `t = |b| >= 0`.
pub fn penalty_derivative(kind: PenaltyKind, beta_abs: f64, lambda: f64) -> f64 {
    let t = beta_abs;
    match kind {
        PenaltyKind::Scad { a } => {
            if t <= lambda {
                lambda
            } else if t < a * lambda {
                (a * lambda - t) / (a - 1.0)
            } else {
                0.0
            }
        }
        PenaltyKind::Mcp { gamma } => {
            if t < gamma * lambda {
                lambda - t / gamma
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOptions {
    pub solver: SolverOptions,
    /// l-infinity bound on the coefficient change between consecutive steps.
    pub step_tol: f64,
    pub msp_max_steps: usize,
    pub lla_max_steps: usize,
    pub capped_max_steps: usize,
    /// Capped-l1 threshold on the standardized scale.
    pub cap_a: f64,
    /// Exponent in the adaptive-lasso weights `1/|b|^gamma`.
    pub adaptive_gamma: f64,
    pub scad_a: f64,
    pub mcp_gamma: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            step_tol: 1e-6,
            msp_max_steps: 50,
            lla_max_steps: 20,
            capped_max_steps: 50,
            cap_a: 1.0,
            adaptive_gamma: 1.0,
            scad_a: 3.0,
            mcp_gamma: 3.7,
        }
    }
}

/// Estimators available to the experiment drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "msp")]
    Msp,
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "alasso")]
    AdaptiveLasso,
    #[serde(rename = "plasso")]
    PostLasso,
    #[serde(rename = "capped")]
    CappedL1,
    #[serde(rename = "lla-scad")]
    LlaScad,
    #[serde(rename = "lla-mcp")]
    LlaMcp,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Msp,
        Method::Lasso,
        Method::AdaptiveLasso,
        Method::PostLasso,
        Method::CappedL1,
        Method::LlaScad,
        Method::LlaMcp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Msp => "msp",
            Method::Lasso => "lasso",
            Method::AdaptiveLasso => "alasso",
            Method::PostLasso => "plasso",
            Method::CappedL1 => "capped",
            Method::LlaScad => "lla-scad",
            Method::LlaMcp => "lla-mcp",
        }
    }

    /// Fits at a single `lambda`; MSP uses it for both the screening lasso
    /// and the reweighted steps.
    pub fn fit(self, design: &StandardizedDesign, y: ArrayView1<'_, f64>, lambda: f64, opts: &EstimatorOptions) -> Result<FitTrace> {
        let initial = fit_lasso(design, y, lambda, &opts.solver)?;
        self.fit_from_initial(design, y, lambda, initial, opts)
    }

    /// Continues from an already computed lasso fit at the same `lambda`.
    /// Lets path and cross-validation drivers share one warm-started lasso
    /// path across methods.
    pub fn fit_from_initial(
        self,
        design: &StandardizedDesign,
        y: ArrayView1<'_, f64>,
        lambda: f64,
        initial: SolveReport,
        opts: &EstimatorOptions,
    ) -> Result<FitTrace> {
        match self {
            Method::Lasso => Ok(FitTrace {
                converged: initial.converged,
                steps: vec![TraceStep::new(initial)],
            }),
            Method::Msp => msp_from_initial(design, y, initial, lambda, opts),
            Method::AdaptiveLasso => adaptive_from_initial(design, y, initial, lambda, opts),
            Method::PostLasso => post_lasso_from_initial(design, y, initial, opts),
            Method::CappedL1 => capped_from_initial(design, y, initial, lambda, opts.cap_a, opts),
            Method::LlaScad | Method::LlaMcp => {
                let kind = self.lla_kind(opts)?;
                let start = initial.coefs.clone();
                let per_obs = lambda / design.n() as f64;
                reweight(
                    design,
                    y,
                    lambda,
                    opts,
                    vec![TraceStep::new(initial)],
                    start,
                    opts.lla_max_steps,
                    false,
                    |b| lla_weight(kind, b, per_obs),
                )
            }
        }
    }

    fn lla_kind(self, opts: &EstimatorOptions) -> Result<PenaltyKind> {
        match self {
            Method::LlaScad => PenaltyKind::scad(opts.scad_a),
            Method::LlaMcp => PenaltyKind::mcp(opts.mcp_gamma),
            _ => Err(Error::invalid(format!("{self} is not an LLA method"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`")))
    }
}

/// Unit-weight, unrestricted lasso.
pub fn fit_lasso(design: &StandardizedDesign, y: ArrayView1<'_, f64>, lambda0: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let penalty = PenaltySpec::unit(lambda0, design.p())?;
    fit_weighted_lasso(design, y, &penalty, opts)
}

/// Multi-screen penalty fit: lasso at `lambda0`, then adaptive restricted
/// steps at `lambda`.
pub fn fit_msp(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    lambda0: f64,
    lambda: f64,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    let initial = fit_lasso(design, y, lambda0, &opts.solver)?;
    msp_from_initial(design, y, initial, lambda, opts)
}

pub fn msp_from_initial(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    initial: SolveReport,
    lambda: f64,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    if initial.coefs.nz() == 0 {
        return Ok(FitTrace {
            converged: initial.converged,
            steps: vec![TraceStep::new(initial)],
        });
    }
    let start = initial.coefs.clone();
    reweight(
        design,
        y,
        lambda,
        opts,
        vec![TraceStep::new(initial)],
        start,
        opts.msp_max_steps,
        true,
        |b| adaptive_weight(b, 1.0),
    )
}

/// Two-step adaptive lasso: lasso, then one solve with weights
/// `1/|b_init|^gamma` restricted to the initial support.
pub fn fit_adaptive_lasso(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    lambda: f64,
    opts: &EstimatorOptions,
) -> Result<SolveReport> {
    let initial = fit_lasso(design, y, lambda, &opts.solver)?;
    let trace = adaptive_from_initial(design, y, initial, lambda, opts)?;
    Ok(trace.final_report().clone())
}

fn adaptive_from_initial(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    initial: SolveReport,
    lambda: f64,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    if initial.coefs.nz() == 0 {
        return Ok(FitTrace {
            converged: initial.converged,
            steps: vec![TraceStep::new(initial)],
        });
    }
    let weights = initial.coefs.values().mapv(|b| adaptive_weight(b.abs(), opts.adaptive_gamma));
    let penalty = PenaltySpec::new(lambda, weights, Some(initial.coefs.support().to_vec()))?;
    let report = fit_weighted_lasso(design, y, &penalty, &opts.solver.warm(initial.coefs.values()))?;
    Ok(FitTrace {
        converged: report.converged,
        steps: vec![TraceStep::new(initial), TraceStep::new(report)],
    })
}

/// Lasso followed by an unpenalized refit on the lasso support.
pub fn fit_ols_post_lasso(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    lambda: f64,
    opts: &EstimatorOptions,
) -> Result<SolveReport> {
    let initial = fit_lasso(design, y, lambda, &opts.solver)?;
    let trace = post_lasso_from_initial(design, y, initial, opts)?;
    Ok(trace.final_report().clone())
}

fn post_lasso_from_initial(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    initial: SolveReport,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    let support = initial.coefs.support().to_vec();
    if support.is_empty() {
        return Ok(FitTrace {
            converged: initial.converged,
            steps: vec![TraceStep::new(initial)],
        });
    }
    if support.len() > design.n() {
        return Err(Error::Singular(format!(
            "refit on {} columns with only {} rows",
            support.len(),
            design.n()
        )));
    }
    // Seed the kernel with the normal-equations solution; on a well-posed
    // support it certifies convergence in one pass.
    let mut start = initial.coefs.values().to_owned();
    if let Ok(ls) = restricted_least_squares(design, y, &support) {
        for (&j, &b) in support.iter().zip(ls.iter()) {
            start[j] = b;
        }
    }
    let penalty = PenaltySpec::new(0.0, Array1::ones(design.p()), Some(support))?;
    let report = fit_weighted_lasso(design, y, &penalty, &opts.solver.warm(start.view()))?;
    Ok(FitTrace {
        converged: report.converged,
        steps: vec![TraceStep::new(initial), TraceStep::new(report)],
    })
}

/// Capped-l1 by multi-step convex relaxation: weight 1 while `|b_j| < cap_a`,
/// 0 (unpenalized) once a coefficient reaches the cap.
pub fn fit_capped_l1(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    lambda: f64,
    cap_a: f64,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    let initial = fit_lasso(design, y, lambda, &opts.solver)?;
    capped_from_initial(design, y, initial, lambda, cap_a, opts)
}

fn capped_from_initial(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    initial: SolveReport,
    lambda: f64,
    cap_a: f64,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    if !(cap_a > 0.0) {
        return Err(Error::invalid(format!("cap must be positive, got {cap_a}")));
    }
    let start = initial.coefs.clone();
    reweight(
        design,
        y,
        lambda,
        opts,
        vec![TraceStep::new(initial)],
        start,
        opts.capped_max_steps,
        false,
        |b| {
            if b < cap_a {
                1.0
            } else {
                0.0
            }
        },
    )
}

/// Local linear approximation of a SCAD or MCP penalty, starting from `init`.
/// Each step solves an unrestricted lasso with weights `p'(|b_j|)/lambda_n`,
/// where `lambda_n = lambda / n` is the penalty level on the per-observation
/// loss scale the SCAD and MCP thresholds are defined on.
pub fn fit_lla(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    lambda: f64,
    kind: PenaltyKind,
    init: &SparseCoefficients,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    if init.len() != design.p() {
        return Err(Error::dims("LLA initial coefficients do not match the design"));
    }
    let per_obs = lambda / design.n() as f64;
    reweight(design, y, lambda, opts, Vec::new(), init.clone(), opts.lla_max_steps, false, |b| {
        lla_weight(kind, b, per_obs)
    })
}

/// [`fit_lla`] started from the lasso at the same `lambda`.
pub fn fit_lla_default(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    lambda: f64,
    kind: PenaltyKind,
    opts: &EstimatorOptions,
) -> Result<FitTrace> {
    let init = fit_lasso(design, y, lambda, &opts.solver)?;
    fit_lla(design, y, lambda, kind, &init.coefs, opts)
}

fn lla_weight(kind: PenaltyKind, beta_abs: f64, lambda: f64) -> f64 {
    if lambda > 0.0 {
        penalty_derivative(kind, beta_abs, lambda) / lambda
    } else {
        1.0
    }
}

fn adaptive_weight(beta_abs: f64, gamma: f64) -> f64 {
    if beta_abs == 0.0 {
        // Only reached off the restriction set, where the weight is unused.
        1.0
    } else {
        beta_abs.powf(-gamma).min(MAX_ADAPTIVE_WEIGHT)
    }
}

/// Generic reweighting loop. Each step builds weights from the previous
/// coefficients, optionally restricts to their support, and solves warm.
/// Stops once support and coefficients are stable or `max_steps` solves
/// are in the trace. A step whose penalty equals the previous step's
/// reuses that solution.
#[allow(clippy::too_many_arguments)]
fn reweight(
    design: &StandardizedDesign,
    y: ArrayView1<'_, f64>,
    lambda: f64,
    opts: &EstimatorOptions,
    mut steps: Vec<TraceStep>,
    start: SparseCoefficients,
    max_steps: usize,
    restrict: bool,
    weight: impl Fn(f64) -> f64,
) -> Result<FitTrace> {
    let mut prev = start;
    let mut stable = false;
    while steps.len() < max_steps.max(1) {
        let weights = prev.values().mapv(|b| weight(b.abs()));
        let restriction = restrict.then(|| prev.support().to_vec());
        let penalty = PenaltySpec::new(lambda, weights, restriction)?;
        let report = match steps.last() {
            Some(last) if last.report.penalty == penalty => last.report.clone(),
            _ => fit_weighted_lasso(design, y, &penalty, &opts.solver.warm(prev.values()))?,
        };
        stable = steps.last().is_some_and(|last| {
            last.active_set == report.coefs.support() && linf_distance(last.report.coefs.values(), report.coefs.values()) <= opts.step_tol
        });
        prev = report.coefs.clone();
        steps.push(TraceStep::new(report));
        if stable {
            break;
        }
    }
    let solver_ok = steps.last().is_some_and(|s| s.report.converged);
    Ok(FitTrace {
        steps,
        converged: stable && solver_ok,
    })
}

fn linf_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least squares on the columns in `support` via the normal equations.
pub fn restricted_least_squares(design: &StandardizedDesign, y: ArrayView1<'_, f64>, support: &[usize]) -> Result<Array1<f64>> {
    let k = support.len();
    let y = y.to_vec();
    let mut gram = ndarray::Array2::zeros((k, k));
    let mut rhs = Array1::zeros(k);
    for (a, &i) in support.iter().enumerate() {
        let ci = design.column(i);
        rhs[a] = crate::solver::dot(ci, &y);
        for (b, &j) in support.iter().enumerate().skip(a) {
            let v = crate::solver::dot(ci, design.column(j));
            gram[[a, b]] = v;
            gram[[b, a]] = v;
        }
    }
    linalg::solve_spd(gram.view(), rhs.view())
}

/// Theory-driven penalty levels `(lambda0, lambda)`:
/// `4 sigma sqrt(n log p)` and `4 sigma sqrt(n log n)`. With `same = true`
/// both use the `log n` rate.
pub fn default_lambdas(n: usize, p: usize, sigma: f64, same: bool) -> Result<(f64, f64)> {
    if n < 2 || p < 2 || !(sigma > 0.0) {
        return Err(Error::invalid("default lambdas need n >= 2, p >= 2 and sigma > 0"));
    }
    default_lambdas_real(n as f64, p as f64, sigma, same)
}

pub(crate) fn default_lambdas_real(n: f64, p: f64, sigma: f64, same: bool) -> Result<(f64, f64)> {
    let lambda = 4.0 * sigma * (n * n.ln()).sqrt();
    let lambda0 = if same { lambda } else { 4.0 * sigma * (n * p.ln()).sqrt() };
    Ok((lambda0, lambda))
}

/// Noise level for data without a known `sigma`: sample standard deviation
/// of the residuals of a lasso fit at `lambda_max / 10`.
pub fn estimate_sigma(design: &StandardizedDesign, y: ArrayView1<'_, f64>, opts: &SolverOptions) -> Result<f64> {
    let lm = lambda_max(design, y, Array1::ones(design.p()).view())?;
    let fit = fit_lasso(design, y, lm / 10.0, opts)?;
    let resid = &y - &design.fitted(fit.coefs.values());
    let n = resid.len() as f64;
    if n < 2.0 {
        return Err(Error::invalid("need at least two rows to estimate sigma"));
    }
    let mean = resid.sum() / n;
    Ok((resid.mapv(|r| (r - mean).powi(2)).sum() / (n - 1.0)).sqrt())
}
