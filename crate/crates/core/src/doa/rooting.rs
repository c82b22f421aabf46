//! Frequencies of a Hermitian Toeplitz matrix by linear prediction.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, monic_roots};
use crate::model::C64;

/// Relative singular-value floor below which the prediction system is rank
/// deficient.
const RANK_TOL: f64 = 1e-12;

/// Recovers `k` frequencies from the first column `u` of `t`.
///
/// The prediction matrix has rows `[u_{i+K-1}, …, u_i]` for
/// `i = 0..L-K`, the coefficients solve `H b = u_{K..L}` in the
/// least-squares sense, and the roots of `z^K - b_1 z^{K-1} - … - b_K` are
/// projected to the unit circle and mapped to `f = -∠v / (2π d)`, clamped to
/// `[-1, 1]`. Returned frequencies are sorted ascending.
pub fn toeplitz_to_freqs(t: &DMatrix<C64>, k: usize, spacing: f64) -> Result<Vec<f64>> {
    let l = t.nrows();
    if t.ncols() != l {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", l, t.ncols())));
    }
    if k == 0 || k >= l {
        return Err(Error::Domain(format!("model order {k} must lie in 1..{l}")));
    }
    if !(spacing > 0.0) {
        return Err(Error::Domain(format!("spacing {spacing} must be positive")));
    }
    let u: Vec<C64> = (0..l).map(|i| t[(i, 0)]).collect();
    let rows = l - k;
    let h = DMatrix::from_fn(rows, k, |i, j| u[i + k - 1 - j]);
    let rhs = DVector::from_iterator(rows, u[k..].iter().copied());
    let b = least_squares(&h, &rhs)?;

    let coeffs: Vec<C64> = b.iter().map(|c| -c).collect();
    let mut freqs: Vec<f64> = monic_roots(&coeffs)?
        .into_iter()
        .map(|v| (-v.arg() / (2.0 * PI * spacing)).clamp(-1.0, 1.0))
        .collect();
    freqs.sort_by(f64::total_cmp);
    Ok(freqs)
}

/// Minimum-norm least squares through the SVD, rejecting rank-deficient
/// systems.
pub(crate) fn least_squares(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    let cols = a.ncols();
    if a.nrows() < cols {
        return Err(Error::Degenerate(format!("{}x{} system is underdetermined", a.nrows(), cols)));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= RANK_TOL * smax {
        return Err(Error::Degenerate(format!("rank-deficient system (σ_min/σ_max = {:.3e})", smin / smax)));
    }
    svd.solve(b, 0.0).map_err(|e| Error::Numerical(e.to_string()))
}

/// Number of eigenvalues of `t` above `ratio` times the largest one.
pub fn estimate_order(t: &DMatrix<C64>, ratio: f64) -> Result<usize> {
    let (values, _) = hermitian_eigen(t)?;
    let top = values.max();
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(values.iter().filter(|&&v| v > ratio * top).count())
}
