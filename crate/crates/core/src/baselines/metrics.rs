//! Angle RMSE with per-trial optimal matching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::max_weight_assignment;
use nalgebra::DMatrix;

/// Summed squared angle error (deg²) of the best matching between truth and
/// estimate pairs.
pub fn matched_squared_error(truth: &[(f64, f64)], estimate: &[(f64, f64)]) -> Result<f64> {
    if truth.len() != estimate.len() || truth.is_empty() {
        return Err(Error::Dimension(format!("{} truths vs {} estimates", truth.len(), estimate.len())));
    }
    let k = truth.len();
    let cost = DMatrix::from_fn(k, k, |i, j| (truth[i].0 - estimate[j].0).powi(2) + (truth[i].1 - estimate[j].1).powi(2));
    let perm = max_weight_assignment(&(-&cost));
    Ok(perm.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum())
}

/// `√(Σ matched squared errors / (2 N_mc K))` over all trials.
pub fn rmse(trials: &[(Vec<(f64, f64)>, Vec<(f64, f64)>)]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::Dimension("no trials".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (truth, est) in trials {
        total += matched_squared_error(truth, est)?;
        count += truth.len();
    }
    Ok((total / (2 * count) as f64).sqrt())
}

/// One method applied to one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub method: String,
    pub snr_db: f64,
    pub trial: usize,
    pub truth: Vec<(f64, f64)>,
    /// Empty when the method failed on this trial.
    pub estimate: Vec<(f64, f64)>,
    pub squared_error: f64,
    pub seconds: f64,
    pub error: Option<String>,
}

impl TrialResult {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }

    /// Per-trial RMSE, NaN on failure.
    pub fn rmse_deg(&self) -> f64 {
        if self.succeeded() {
            (self.squared_error / (2 * self.truth.len()) as f64).sqrt()
        } else {
            f64::NAN
        }
    }
}
