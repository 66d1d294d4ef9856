//! Small dense solves backed by nalgebra.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

pub(crate) fn to_dmatrix(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Solves the symmetric positive-definite system `a x = b`.
pub fn solve_spd(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::dims("solve_spd needs a square matrix matching the right-hand side"));
    }
    let chol = to_dmatrix(a)
        .cholesky()
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
    let x = chol.solve(&DVector::from_iterator(b.len(), b.iter().copied()));
    Ok(Array1::from_iter(x.iter().copied()))
}

/// Solves the general square system `a x = b` by partial-pivot LU.
pub fn solve(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::dims("solve needs a square matrix matching the right-hand side"));
    }
    let x = to_dmatrix(a)
        .lu()
        .solve(&DVector::from_iterator(b.len(), b.iter().copied()))
        .ok_or_else(|| Error::Singular("LU factorization failed".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("solution is not finite".into()));
    }
    Ok(Array1::from_iter(x.iter().copied()))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_lower(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let chol = to_dmatrix(a)
        .cholesky()
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
    let l = chol.l();
    Ok(Array2::from_shape_fn((l.nrows(), l.ncols()), |(i, j)| l[(i, j)]))
}
