//! Mini-batch Adam training of a [`Reconstructor`].

use nalgebra::DVector;
use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::data::{stack, to_matrices, unstack, TrainingExample};
use super::mlp::{backward_with_output, forward_batch, MlpParams};
use crate::error::{dimension, Error, Result};
use crate::model::C64;
use crate::seed::{self, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub snr_range_db: [f64; 2],
    pub dataset_size: usize,
    pub seed: u64,
    /// Hidden widths; `None` means twice the input width (`4P`) for all
    /// four.
    pub hidden: Option<Vec<usize>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size: 64,
            epochs: 1000,
            snr_range_db: [20.0, 50.0],
            dataset_size: 2000,
            seed: 1,
            hidden: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be non-negative");
        }
        if self.batch_size == 0 || self.epochs == 0 || self.dataset_size == 0 {
            return bad("batch size, epochs and dataset size must be positive");
        }
        if !(self.snr_range_db[0] <= self.snr_range_db[1]) {
            return bad("SNR range is empty");
        }
        if let Some(h) = &self.hidden {
            if h.len() != super::mlp::LAYERS - 1 || h.contains(&0) {
                return bad("hidden widths must list four positive sizes");
            }
        }
        Ok(())
    }

    pub fn widths(&self, width: usize) -> Vec<usize> {
        let hidden = self.hidden.clone().unwrap_or_else(|| vec![2 * width; super::mlp::LAYERS - 1]);
        std::iter::once(width).chain(hidden).chain(std::iter::once(width)).collect()
    }
}

/// A network together with the dataset-wide amplitude scale applied to its
/// inputs and targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstructor {
    pub params: MlpParams,
    pub scale: f64,
    pub optimizer: Option<AdamState>,
    pub epochs_trained: usize,
}

impl Reconstructor {
    /// Identity-like wrapper used in tests and as a pass-through.
    pub fn new(params: MlpParams, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("scale {scale} must be positive")));
        }
        Ok(Self { params, scale, optimizer: None, epochs_trained: 0 })
    }

    /// Stacks, runs the network in scaled units, and unstacks.
    pub fn reconstruct(&self, z: &DVector<C64>) -> Result<DVector<C64>> {
        if 2 * z.len() != self.params.input_width() {
            return Err(dimension(format!("{} samples, network expects {}", z.len(), self.params.input_width() / 2)));
        }
        let x = stack(z) / self.scale;
        let out = forward_batch(&self.params, x.view().insert_axis(Axis(0)))?;
        unstack(&(out.index_axis_move(Axis(0), 0) * self.scale))
    }

    /// Mean stacked loss over `data` in scaled units.
    pub fn evaluate(&self, data: &[TrainingExample]) -> Result<f64> {
        let (x, y) = to_matrices(data)?;
        let out = forward_batch(&self.params, (x / self.scale).view())?;
        super::mlp::batch_loss(out.view(), (y / self.scale).view())
    }
}

/// RMS of every input entry.
pub fn dataset_scale(data: &[TrainingExample]) -> f64 {
    let (sum, n) = data.iter().fold((0.0, 0usize), |(s, n), e| (s + e.input.iter().map(|v| v * v).sum::<f64>(), n + e.input.len()));
    if n == 0 || sum == 0.0 {
        1.0
    } else {
        (sum / n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: Reconstructor,
    /// Mean training loss per epoch, in scaled units.
    pub history: Vec<f64>,
}

/// Fresh initialisation followed by [`resume`].
pub fn train(config: &TrainConfig, data: &[TrainingExample]) -> Result<TrainOutcome> {
    config.validate()?;
    let width = data.first().ok_or_else(|| Error::Config("empty dataset".into()))?.input.len();
    let params = MlpParams::init(&config.widths(width), &mut seed::child_rng(config.seed, stream::INIT, 0))?;
    let model = Reconstructor::new(params, dataset_scale(data))?;
    resume(model, config, data)
}

/// Runs `config.epochs` further epochs. Epoch `e` (counted over the model's
/// whole life) shuffles with its own child seed, so a resumed run matches an
/// uninterrupted one.
pub fn resume(mut model: Reconstructor, config: &TrainConfig, data: &[TrainingExample]) -> Result<TrainOutcome> {
    config.validate()?;
    let (x, y) = to_matrices(data)?;
    if x.ncols() != model.params.input_width() || y.ncols() != model.params.output_width() {
        return Err(dimension("dataset width does not match the network"));
    }
    let x = x / model.scale;
    let y = y / model.scale;
    let n = x.nrows();
    let width = x.ncols();
    let mut adam = model.optimizer.take().unwrap_or_else(|| AdamState::new(&model.params, config.learning_rate));
    adam.learning_rate = config.learning_rate;

    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    let mut per_example = vec![0.0; n];
    for local in 0..config.epochs {
        let epoch = model.epochs_trained + local;
        order.sort_unstable();
        order.shuffle(&mut seed::child_rng(config.seed, stream::SHUFFLE, epoch as u64));
        for chunk in order.chunks(config.batch_size) {
            let xb = x.select(Axis(0), chunk);
            let yb = y.select(Axis(0), chunk);
            let (grads, out) = backward_with_output(&model.params, xb.view(), yb.view())?;
            record_losses(&out, &yb, chunk, width, &mut per_example);
            adam.step(&mut model.params, &grads)?;
        }
        let mean = per_example.iter().sum::<f64>() / n as f64;
        if !mean.is_finite() || !model.params.is_finite() {
            return Err(Error::Diverged { epoch: epoch + 1, loss: mean });
        }
        history.push(mean);
    }
    model.epochs_trained += config.epochs;
    model.optimizer = Some(adam);
    Ok(TrainOutcome { model, history })
}

fn record_losses(out: &Array2<f64>, target: &Array2<f64>, rows: &[usize], width: usize, dest: &mut [f64]) {
    for (r, &idx) in rows.iter().enumerate() {
        let d: Array1<f64> = &out.row(r) - &target.row(r);
        dest[idx] = d.dot(&d) / width as f64;
    }
}

/// Writes `epoch,mean_loss` rows starting at `first_epoch`.
pub fn write_loss_csv<W: std::io::Write>(out: W, history: &[f64], first_epoch: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "mean_loss"])?;
    for (i, l) in history.iter().enumerate() {
        w.write_record([(first_epoch + i).to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
