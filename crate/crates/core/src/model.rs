//! Numeric data model: datasets, ground truth, standardized designs and sparse
//! coefficient vectors.
//!
//! The regression model has no intercept. Columns are scaled so that
//! `(1/n) * x_j' x_j = 1`, i.e. by the root empirical second moment rather
//! than the standard deviation.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};

use crate::error::{Error, Result};

/// Ground-truth coefficients for simulated data.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthInfo {
    beta: Array1<f64>,
    support: Vec<usize>,
    sigma: f64,
}

impl TruthInfo {
    pub fn new(beta: Array1<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("noise sd must be positive, got {sigma}")));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("true coefficients"));
        }
        let support = nonzero_indices(beta.view());
        Ok(Self { beta, support, sigma })
    }

    pub fn beta(&self) -> ArrayView1<'_, f64> {
        self.beta.view()
    }

    /// Indices `j` with `beta_j != 0`, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn q(&self) -> usize {
        self.support.len()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }
}

/// Design matrix, response and optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    names: Vec<String>,
    truth: Option<TruthInfo>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(x, y, names)
    }

    pub fn with_names(x: Array2<f64>, y: Array1<f64>, names: Vec<String>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::invalid("dataset needs at least one row and one column"));
        }
        if y.len() != n {
            return Err(Error::dims(format!("response has length {} but design has {n} rows", y.len())));
        }
        if names.len() != p {
            return Err(Error::dims(format!("{} column names for {p} columns", names.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(Self { x, y, names, truth: None })
    }

    pub fn with_truth(mut self, truth: TruthInfo) -> Result<Self> {
        if truth.p() != self.p() {
            return Err(Error::dims(format!(
                "truth has {} coefficients, design has {} columns",
                truth.p(),
                self.p()
            )));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn truth(&self) -> Option<&TruthInfo> {
        self.truth.as_ref()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Sub-dataset made of the given rows, in the given order. Truth is kept.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.iter().any(|&i| i >= self.n()) {
            return Err(Error::invalid("row index out of range"));
        }
        let x = self.x.select(Axis(0), rows);
        let y = self.y.select(Axis(0), rows);
        let mut out = Self::with_names(x, y, self.names.clone())?;
        out.truth = self.truth.clone();
        Ok(out)
    }
}

/// Which means are removed before scaling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Centering {
    pub response: bool,
    /// Removing predictor means is equivalent to fitting an intercept.
    pub predictors: bool,
}

/// Column-scaled design, stored column-major so each column is contiguous.
#[derive(Debug, Clone)]
pub struct StandardizedDesign {
    x: Array2<f64>,
    scales: Array1<f64>,
    x_means: Option<Array1<f64>>,
    col_sq_norms: Array1<f64>,
    response: Array1<f64>,
    y_mean: Option<f64>,
}

impl StandardizedDesign {
    /// Standardized matrix, `n x p`, column-major.
    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    /// Contiguous storage of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.x.nrows();
        let data = self.x.as_slice_memory_order().expect("design is contiguous");
        &data[j * n..(j + 1) * n]
    }

    pub fn scales(&self) -> ArrayView1<'_, f64> {
        self.scales.view()
    }

    /// `x_j' x_j` for every standardized column (equal to `n` up to rounding).
    pub fn col_sq_norms(&self) -> ArrayView1<'_, f64> {
        self.col_sq_norms.view()
    }

    /// Response after optional centering.
    pub fn response(&self) -> ArrayView1<'_, f64> {
        self.response.view()
    }

    pub fn y_centered(&self) -> bool {
        self.y_mean.is_some()
    }

    /// Mean removed from the response, 0 when not centered.
    pub fn y_offset(&self) -> f64 {
        self.y_mean.unwrap_or(0.0)
    }

    pub fn x_means(&self) -> Option<ArrayView1<'_, f64>> {
        self.x_means.as_ref().map(|m| m.view())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// `X beta` on the standardized scale.
    pub fn fitted(&self, beta: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.n());
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (o, &v) in out.iter_mut().zip(self.column(j)) {
                    *o += b * v;
                }
            }
        }
        out
    }

    /// Predicts the original-scale response for raw predictor rows, given
    /// coefficients estimated on this standardized design. Undoes every
    /// centering and scaling step.
    pub fn predict(&self, x_raw: ArrayView2<'_, f64>, coefs: &SparseCoefficients) -> Result<Array1<f64>> {
        if x_raw.ncols() != self.p() || coefs.len() != self.p() {
            return Err(Error::dims("prediction inputs do not match design width"));
        }
        let mut out = Array1::from_elem(x_raw.nrows(), self.y_offset());
        for &j in coefs.support() {
            let b = coefs.values()[j] / self.scales[j];
            let shift = self.x_means.as_ref().map_or(0.0, |m| m[j]);
            for (o, &v) in out.iter_mut().zip(x_raw.column(j)) {
                *o += b * (v - shift);
            }
        }
        Ok(out)
    }
}

/// Coefficient vector with its exact nonzero index set.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients {
    values: Array1<f64>,
    support: Vec<usize>,
}

impl SparseCoefficients {
    pub fn from_values(values: Array1<f64>) -> Self {
        let support = nonzero_indices(values.view());
        Self { values, support }
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            values: Array1::zeros(p),
            support: Vec::new(),
        }
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.values.view()
    }

    pub fn into_values(self) -> Array1<f64> {
        self.values
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn nz(&self) -> usize {
        self.support.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn nonzero_indices(v: ArrayView1<'_, f64>) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, &b)| b != 0.0).map(|(j, _)| j).collect()
}

/// Scales every column to unit empirical second moment, optionally removing
/// the response mean. Predictors are not centered.
pub fn standardize(data: &Dataset, center_response: bool) -> Result<StandardizedDesign> {
    standardize_with(
        data,
        Centering {
            response: center_response,
            predictors: false,
        },
    )
}

pub fn standardize_with(data: &Dataset, centering: Centering) -> Result<StandardizedDesign> {
    let (n, p) = (data.n(), data.p());
    let nf = n as f64;
    let mut x = Array2::<f64>::zeros((n, p).f());
    let mut scales = Array1::zeros(p);
    let mut means = centering.predictors.then(|| Array1::zeros(p));
    let mut col_sq_norms = Array1::zeros(p);

    for (j, col) in data.x.columns().into_iter().enumerate() {
        let mean = if centering.predictors { col.sum() / nf } else { 0.0 };
        let second: f64 = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        if !(second > 0.0) {
            return Err(Error::ZeroColumn { index: j });
        }
        let scale = second.sqrt();
        let mut out = x.column_mut(j);
        for (o, &v) in out.iter_mut().zip(col.iter()) {
            *o = (v - mean) / scale;
        }
        col_sq_norms[j] = out.dot(&out);
        scales[j] = scale;
        if let Some(m) = means.as_mut() {
            m[j] = mean;
        }
    }

    let (response, y_mean) = if centering.response {
        let mean = data.y.sum() / nf;
        (data.y.mapv(|v| v - mean), Some(mean))
    } else {
        (data.y.clone(), None)
    };

    Ok(StandardizedDesign {
        x,
        scales,
        x_means: means,
        col_sq_norms,
        response,
        y_mean,
    })
}

/// Maps standardized-scale coefficients back to the original predictor scale.
pub fn destandardize(coefs: &SparseCoefficients, design: &StandardizedDesign) -> Result<SparseCoefficients> {
    if coefs.len() != design.p() {
        return Err(Error::dims(format!(
            "{} coefficients for a design with {} columns",
            coefs.len(),
            design.p()
        )));
    }
    let values = &coefs.values / &design.scales;
    Ok(SparseCoefficients {
        values,
        support: coefs.support.clone(),
    })
}
