//! Bias-corrected Adam.

use serde::{Deserialize, Serialize};

use super::mlp::MlpParams;
use crate::error::{dimension, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl AdamState {
    pub fn new(params: &MlpParams, learning_rate: f64) -> Self {
        let n = params.parameter_count();
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, first: vec![0.0; n], second: vec![0.0; n] }
    }

    /// One update of `params` from `grads`.
    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpParams) -> Result<()> {
        let n = params.parameter_count();
        if grads.parameter_count() != n || self.first.len() != n || grads.widths() != params.widths() {
            return Err(dimension("parameter, gradient and moment shapes differ"));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let g = grads.flat();
        for (i, p) in params.flat_mut().enumerate() {
            let m = &mut self.first[i];
            let v = &mut self.second[i];
            *m = self.beta1 * *m + (1.0 - self.beta1) * g[i];
            *v = self.beta2 * *v + (1.0 - self.beta2) * g[i] * g[i];
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}
