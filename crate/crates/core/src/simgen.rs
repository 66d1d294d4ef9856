//! Synthetic regression scenarios with an engineered irrepresentable-condition
//! violation, their population covariance, and synthetic price panels for the
//! index-tracking pipeline.
//!
//! Predictors `2..=p` are Gaussian with identity (scenario 1) or Toeplitz
//! `0.5^|j-k|` (scenario 2) covariance. Predictor 1 is built from others:
//!
//! ```text
//! x1 = 7/8 x_p + 3/8 x2 + 1/8 (x3 + x4 + x5 + x6 + x7) + 1/8 e,   e ~ N(0, 1)
//! ```
//!
//! Nonzero coefficients sit at predictors 2, 3, 4 and p (1-based), so the
//! irrelevant `x1` is strongly correlated with the true model.
//!
//! Randomness comes from a ChaCha20 generator seeded by `seed`; replication
//! `r` reads stream `r`, so replications are independent of scheduling order.

use chrono::{Datelike, NaiveDate, Weekday};
use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::tracking::PriceTable;
use crate::linalg;
use crate::model::{Dataset, TruthInfo};

/// Decay of the scenario-2 Toeplitz covariance.
pub const TOEPLITZ_RHO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Independent predictors 2..p.
    Independent,
    /// Toeplitz `0.5^|j-k|` covariance on predictors 2..p.
    Toeplitz,
}

impl Scenario {
    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Scenario::Independent),
            2 => Ok(Scenario::Toeplitz),
            _ => Err(Error::invalid(format!("scenario must be 1 or 2, got {k}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Scenario::Independent => 1,
            Scenario::Toeplitz => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub scenario: Scenario,
    pub q: usize,
    pub sigma: f64,
    pub coef_low: f64,
    pub coef_high: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, n: usize, p: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            scenario,
            q: 4,
            sigma: 1.0,
            coef_low: 0.5,
            coef_high: 2.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 8 {
            return Err(Error::invalid(format!("scenarios need p >= 8, got {}", self.p)));
        }
        if self.q < 4 || self.q > self.p - 1 {
            return Err(Error::invalid(format!("q must lie in [4, p-1], got {}", self.q)));
        }
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma must be positive"));
        }
        if !(0.0 < self.coef_low && self.coef_low <= self.coef_high && self.coef_high.is_finite()) {
            return Err(Error::invalid("coefficient range must satisfy 0 < low <= high"));
        }
        Ok(())
    }

    /// True support, 0-based: predictors 2, 3, 4, p (1-based), then 5..=q
    /// for `q > 4`.
    pub fn support(&self) -> Vec<usize> {
        let mut s = vec![1, 2, 3];
        s.extend(4..self.q);
        s.push(self.p - 1);
        s
    }

    /// Index of the engineered irrelevant predictor (0-based).
    pub const ENGINEERED: usize = 0;
}

/// Weights of the construction `x1 = sum_j a_j x_j + e/8`, indexed 0-based.
fn x1_loadings(p: usize) -> Vec<(usize, f64)> {
    let mut a = vec![(p - 1, 7.0 / 8.0), (1, 3.0 / 8.0)];
    a.extend((2..=6).map(|j| (j, 1.0 / 8.0)));
    a
}

const X1_NOISE: f64 = 1.0 / 8.0;

pub fn scenario_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates stream 0 of the configured scenario.
pub fn gen_scenario(config: &ScenarioConfig) -> Result<Dataset> {
    gen_scenario_stream(config, 0)
}

/// Generates replication `stream` of the configured scenario.
pub fn gen_scenario_stream(config: &ScenarioConfig, stream: u64) -> Result<Dataset> {
    config.validate()?;
    let (n, p) = (config.n, config.p);
    let mut rng = scenario_rng(config.seed, stream);

    let coef_dist = Uniform::new_inclusive(config.coef_low, config.coef_high).map_err(|e| Error::invalid(e.to_string()))?;
    let mut beta = Array1::zeros(p);
    for j in config.support() {
        beta[j] = coef_dist.sample(&mut rng);
    }

    let innovation = (1.0 - TOEPLITZ_RHO * TOEPLITZ_RHO).sqrt();
    let loadings = x1_loadings(p);
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        let mut prev = 0.0;
        for j in 1..p {
            let u: f64 = rng.sample(StandardNormal);
            // AR(1) recursion applies the Cholesky factor of the Toeplitz matrix row by row.
            let v = match config.scenario {
                Scenario::Independent => u,
                Scenario::Toeplitz if j == 1 => u,
                Scenario::Toeplitz => TOEPLITZ_RHO * prev + innovation * u,
            };
            row[j] = v;
            prev = v;
        }
        let e: f64 = rng.sample(StandardNormal);
        row[0] = loadings.iter().map(|&(j, a)| a * row[j]).sum::<f64>() + X1_NOISE * e;
    }

    let noise = Array1::from_shape_fn(n, |_| config.sigma * rng.sample::<f64, _>(StandardNormal));
    let y = x.dot(&beta) + noise;
    let truth = TruthInfo::new(beta, config.sigma)?;
    Dataset::new(x, y)?.with_truth(truth)
}

/// Covariance of predictors 2..p (0-based indices 1..p-1) before `x1` is added.
fn base_covariance(scenario: Scenario, j: usize, k: usize) -> f64 {
    match scenario {
        Scenario::Independent => f64::from(u8::from(j == k)),
        Scenario::Toeplitz => TOEPLITZ_RHO.powi((j as i32 - k as i32).abs()),
    }
}

/// Exact population covariance of `(x1, ..., xp)` implied by the generator.
pub fn population_covariance(config: &ScenarioConfig) -> Result<Array2<f64>> {
    config.validate()?;
    let p = config.p;
    let mut cov = Array2::zeros((p, p));
    for j in 1..p {
        for k in 1..p {
            cov[[j, k]] = base_covariance(config.scenario, j, k);
        }
    }
    let loadings = x1_loadings(p);
    for k in 1..p {
        let c: f64 = loadings.iter().map(|&(j, a)| a * cov[[j, k]]).sum();
        cov[[0, k]] = c;
        cov[[k, 0]] = c;
    }
    let mut var = X1_NOISE * X1_NOISE;
    for &(j, a) in &loadings {
        for &(k, b) in &loadings {
            var += a * b * cov[[j, k]];
        }
    }
    cov[[0, 0]] = var;
    Ok(cov)
}

/// `|| C[S^c, S] C[S, S]^{-1} signs ||_inf`; a value above 1 certifies that the
/// irrepresentable condition fails for this sign pattern.
pub fn irrepresentable_norm(cov: ArrayView2<'_, f64>, support: &[usize], signs: &[f64]) -> Result<f64> {
    let p = cov.nrows();
    if cov.ncols() != p || support.len() != signs.len() || support.iter().any(|&j| j >= p) {
        return Err(Error::dims("irrepresentable_norm inputs are inconsistent"));
    }
    let k = support.len();
    let c_ss = Array2::from_shape_fn((k, k), |(a, b)| cov[[support[a], support[b]]]);
    let v = linalg::solve(c_ss.view(), Array1::from(signs.to_vec()).view())?;
    let mut in_support = vec![false; p];
    support.iter().for_each(|&j| in_support[j] = true);
    Ok((0..p)
        .filter(|&j| !in_support[j])
        .map(|j| support.iter().zip(v.iter()).map(|(&s, &vs)| cov[[j, s]] * vs).sum::<f64>().abs())
        .fold(0.0, f64::max))
}

/// Synthetic daily price panel for index-tracking experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceConfig {
    pub days: usize,
    pub stocks: usize,
    /// Number of stocks whose fixed-share combination forms the index.
    pub planted: usize,
    /// Standard deviation of multiplicative noise on the index level.
    pub index_noise: f64,
    pub seed: u64,
}

impl Default for PriceConfig {
    fn default() -> Self {
        Self {
            days: 480,
            stocks: 100,
            planted: 5,
            index_noise: 0.0,
            seed: 0,
        }
    }
}

/// Stocks follow a one-factor geometric random walk. The index is
/// `sum_j s_j P_j(t) * (1 + noise_t)` over `planted` randomly chosen stocks
/// with positive share counts `s_j`, each holding a comparable slice of the
/// starting index value. Returns the panel and the share vector.
pub fn gen_prices(config: &PriceConfig) -> Result<(PriceTable, Array1<f64>)> {
    if config.days < 2 || config.stocks == 0 || config.planted == 0 || config.planted > config.stocks {
        return Err(Error::invalid("price config needs days >= 2 and 1 <= planted <= stocks"));
    }
    if !(config.index_noise >= 0.0 && config.index_noise < 0.5) {
        return Err(Error::invalid("index noise must lie in [0, 0.5)"));
    }
    let (days, p) = (config.days, config.stocks);
    let mut rng = scenario_rng(config.seed, 0);
    let normal = |rng: &mut ChaCha20Rng| -> f64 { rng.sample(StandardNormal) };

    let start: Vec<f64> = (0..p).map(|_| rng.random_range(20.0..200.0)).collect();
    let loading: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut prices = Array2::zeros((days, p));
    for j in 0..p {
        prices[[0, j]] = start[j];
    }
    for t in 1..days {
        let market = 0.0003 + 0.008 * normal(&mut rng);
        for j in 0..p {
            let r = loading[j] * market + 0.012 * normal(&mut rng);
            prices[[t, j]] = prices[[t - 1, j]] * (1.0 + r);
        }
    }

    let mut chosen: Vec<usize> = (0..p).collect();
    for i in 0..config.planted {
        let k = rng.random_range(i..p);
        chosen.swap(i, k);
    }
    let mut shares = Array1::zeros(p);
    // value weights near 1/planted on the first day, expressed as share counts
    for &j in &chosen[..config.planted] {
        shares[j] = rng.random_range(0.5..1.5) * 1000.0 / (config.planted as f64 * start[j]);
    }
    let index = Array1::from_shape_fn(days, |t| {
        let level: f64 = prices.row(t).dot(&shares);
        level * (1.0 + config.index_noise * normal(&mut rng))
    });

    let dates = business_days(NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date"), days);
    let tickers = (1..=p).map(|j| format!("S{j:03}")).collect();
    Ok((PriceTable::new(dates, index, prices, tickers)?, shares))
}

fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(count)
        .collect()
}
