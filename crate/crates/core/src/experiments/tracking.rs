//! Rolling-window sparse index replication.
//!
//! Each window regresses the index price on stock prices over the training
//! days, with the number of selected stocks capped at `k`, and scores the
//! replicated index by the annualized tracking error of daily simple returns,
//! both in-sample and on the following test days.

use chrono::NaiveDate;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::metrics::MeanSd;
use crate::model::{destandardize, standardize_with, Centering, Dataset};

use super::sparsity::{select_lambda_for_sparsity, SparsityOptions};

pub const TRADING_DAYS: f64 = 252.0;

/// Index level and stock prices on a strictly increasing sequence of dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    dates: Vec<NaiveDate>,
    index: Array1<f64>,
    prices: Array2<f64>,
    tickers: Vec<String>,
}

impl PriceTable {
    pub fn new(dates: Vec<NaiveDate>, index: Array1<f64>, prices: Array2<f64>, tickers: Vec<String>) -> Result<Self> {
        let days = dates.len();
        if index.len() != days || prices.nrows() != days {
            return Err(Error::dims(format!(
                "{days} dates, {} index values, {} price rows",
                index.len(),
                prices.nrows()
            )));
        }
        if tickers.len() != prices.ncols() {
            return Err(Error::dims(format!(
                "{} tickers for {} price columns",
                tickers.len(),
                prices.ncols()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "dates must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(t) = index.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("non-positive index level on {}", dates[t])));
        }
        if let Some(((t, j), _)) = prices.indexed_iter().find(|(_, &v)| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("non-positive price for {} on {}", tickers[j], dates[t])));
        }
        Ok(Self {
            dates,
            index,
            prices,
            tickers,
        })
    }

    pub fn days(&self) -> usize {
        self.dates.len()
    }

    pub fn stocks(&self) -> usize {
        self.prices.ncols()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn index(&self) -> ArrayView1<'_, f64> {
        self.index.view()
    }

    /// `days x stocks`.
    pub fn prices(&self) -> ArrayView2<'_, f64> {
        self.prices.view()
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub train: usize,
    pub test: usize,
    /// Days between consecutive window starts.
    pub stride: usize,
    /// Number of windows; `None` fits as many as the table allows.
    pub windows: Option<usize>,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            train: 100,
            test: 20,
            stride: 20,
            windows: None,
        }
    }
}

impl WindowSpec {
    fn validate(&self) -> Result<()> {
        if self.train < 3 || self.test == 0 || self.stride == 0 {
            return Err(Error::invalid("window spec needs train >= 3, test >= 1 and stride >= 1"));
        }
        Ok(())
    }

    /// Windows that fit in `days`.
    pub fn available(&self, days: usize) -> usize {
        let span = self.train + self.test;
        if days < span {
            0
        } else {
            (days - span) / self.stride + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingWindow {
    /// First training day (row of the price table).
    pub start: usize,
    pub lambda: f64,
    /// Shares of each stock on the original price scale.
    pub weights: Array1<f64>,
    pub nz: usize,
    pub fitted_te: f64,
    pub predicted_te: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingResult {
    pub windows: Vec<TrackingWindow>,
    pub fitted: MeanSd,
    pub predicted: MeanSd,
}

/// `sqrt(252)` times the sample standard deviation of `actual - predicted`.
pub fn tracking_error(actual: ArrayView1<'_, f64>, predicted: ArrayView1<'_, f64>) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::dims(format!(
            "{} actual vs {} predicted returns",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.len() < 2 {
        return Err(Error::invalid("tracking error needs at least two returns"));
    }
    let err = &actual - &predicted;
    let sd = MeanSd::of(err.iter().copied()).expect("nonempty").sd;
    Ok(TRADING_DAYS.sqrt() * sd)
}

/// `(P_t - P_{t-1}) / P_{t-1}`; every level must be positive.
pub fn simple_returns(levels: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if levels.len() < 2 {
        return Err(Error::invalid("returns need at least two price levels"));
    }
    if levels.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("returns need positive finite price levels"));
    }
    Ok(Array1::from_iter(levels.windows(2).into_iter().map(|w| (w[1] - w[0]) / w[0])))
}

/// Runs the rolling replication. Train and test are adjacent; test returns
/// start from the last training day. Stock prices and the index are both
/// centered inside each training window.
pub fn track_index(table: &PriceTable, spec: &WindowSpec, method: Method, k: usize, opts: &SparsityOptions) -> Result<TrackingResult> {
    spec.validate()?;
    let available = spec.available(table.days());
    let count = spec.windows.unwrap_or(available);
    if count == 0 || count > available {
        return Err(Error::invalid(format!(
            "{count} windows of {}+{} days with stride {} do not fit in {} days",
            spec.train,
            spec.test,
            spec.stride,
            table.days()
        )));
    }
    let windows = (0..count)
        .map(|w| fit_window(table, spec, w * spec.stride, method, k, opts).map_err(|e| e.context(format!("window {w}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackingResult {
        fitted: MeanSd::of(windows.iter().map(|w| w.fitted_te)).expect("nonempty"),
        predicted: MeanSd::of(windows.iter().map(|w| w.predicted_te)).expect("nonempty"),
        windows,
    })
}

fn fit_window(
    table: &PriceTable,
    spec: &WindowSpec,
    start: usize,
    method: Method,
    k: usize,
    opts: &SparsityOptions,
) -> Result<TrackingWindow> {
    let train = start..start + spec.train;
    // test returns are measured from the last training day
    let test = start + spec.train - 1..start + spec.train + spec.test;
    let x_train = table.prices.slice(s![train.clone(), ..]).to_owned();
    let y_train = table.index.slice(s![train.clone()]).to_owned();

    let (lambda, weights, offset) = if y_train.iter().all(|&v| v == y_train[0]) {
        // nothing to explain: hold the index level, no stocks
        (f64::INFINITY, Array1::zeros(table.stocks()), y_train[0])
    } else {
        let design = standardize_with(
            &Dataset::new(x_train, y_train.clone())?,
            Centering {
                response: true,
                predictors: true,
            },
        )?;
        let (lambda, trace) = select_lambda_for_sparsity(&design, design.response(), method, k, opts)?;
        let weights = destandardize(trace.coefs(), &design)?.into_values();
        let means = design.x_means().expect("predictors are centered");
        (lambda, weights.clone(), design.y_offset() - weights.dot(&means))
    };

    let replicate = |rows: std::ops::Range<usize>| table.prices.slice(s![rows, ..]).dot(&weights) + offset;
    let fitted_te = tracking_error(
        simple_returns(y_train.view())?.view(),
        simple_returns(replicate(train).view())?.view(),
    )?;
    let predicted_te = tracking_error(
        simple_returns(table.index.slice(s![test.clone()]))?.view(),
        simple_returns(replicate(test).view())?.view(),
    )?;
    Ok(TrackingWindow {
        start,
        lambda,
        nz: weights.iter().filter(|&&w| w != 0.0).count(),
        weights,
        fitted_te,
        predicted_te,
    })
}
