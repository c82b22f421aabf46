//! Vandermonde decomposition `T = Σ c_q a(f_q) a(f_q)ᴴ` of a PSD Toeplitz
//! matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::doa::toeplitz_to_freqs;
use crate::error::{Error, Result};
use crate::model::{axis_vector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicDecomposition {
    /// Sorted ascending.
    pub frequencies: Vec<f64>,
    pub weights: Vec<f64>,
    pub spacing: f64,
}

impl AtomicDecomposition {
    /// `Σ c_q a(f_q) a(f_q)ᴴ` at dimension `len`.
    pub fn rebuild(&self, len: usize) -> DMatrix<C64> {
        let mut t = DMatrix::zeros(len, len);
        for (&f, &c) in self.frequencies.iter().zip(&self.weights) {
            let a = axis_vector(len, self.spacing, f);
            t += &a * a.adjoint() * C64::new(c, 0.0);
        }
        t
    }

    /// `‖T - rebuild‖_F / ‖T‖_F`.
    pub fn relative_residual(&self, t: &DMatrix<C64>) -> f64 {
        let norm = t.norm();
        let diff = (t - self.rebuild(t.nrows())).norm();
        if norm > 0.0 {
            diff / norm
        } else {
            diff
        }
    }
}

/// Frequencies by linear-prediction rooting, weights by least squares on the
/// first column. Fails when a weight is not positive.
pub fn vandermonde_decompose(t: &DMatrix<C64>, k: usize, spacing: f64) -> Result<AtomicDecomposition> {
    let frequencies = toeplitz_to_freqs(t, k, spacing)?;
    let l = t.nrows();
    let v = DMatrix::from_fn(l, k, |i, q| axis_vector(l, spacing, frequencies[q])[i]);
    let u = DVector::from_fn(l, |i, _| t[(i, 0)]);
    let c = crate::doa::least_squares(&v, &u)?;
    let weights: Vec<f64> = c.iter().map(|z| z.re).collect();
    if let Some(w) = weights.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::Degenerate(format!("non-positive atom weight {w:.3e}; rank below {k}")));
    }
    Ok(AtomicDecomposition { frequencies, weights, spacing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_is_one_dc_atom() {
        let t = DMatrix::from_element(5, 5, C64::new(1.0, 0.0));
        let d = vandermonde_decompose(&t, 1, 0.4).unwrap();
        assert!(d.frequencies[0].abs() < 1e-12);
        assert!((d.weights[0] - 1.0).abs() < 1e-12);
        assert!((5.0 * d.weights[0] - t.trace().re).abs() < 1e-10);
    }

    #[test]
    fn two_atom_round_trip() {
        let truth = AtomicDecomposition { frequencies: vec![-0.5, 0.2], weights: vec![2.0, 1.0], spacing: 0.4 };
        let t = truth.rebuild(8);
        let d = vandermonde_decompose(&t, 2, 0.4).unwrap();
        for q in 0..2 {
            assert!((d.frequencies[q] - truth.frequencies[q]).abs() < 1e-6);
            assert!((d.weights[q] - truth.weights[q]).abs() < 1e-6);
        }
        assert!(d.relative_residual(&t) < 1e-6);
    }

    #[test]
    fn overstated_order_is_rejected() {
        let truth = AtomicDecomposition { frequencies: vec![0.1], weights: vec![1.0], spacing: 0.4 };
        assert!(vandermonde_decompose(&truth.rebuild(6), 2, 0.4).is_err());
    }
}
