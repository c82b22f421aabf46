//! `simulate` and `train` operations.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{
    sample_impairments, synthesize_ideal, synthesize_impaired, write_snapshot, Noise, ScenarioConfig, SnapshotMeta,
};
use crate::nn::{
    generate_dataset, generate_dataset_from, load_model, resume, save_model, train, unstack, write_loss_csv, ModelMeta,
    Reconstructor, TrainConfig,
};
use crate::seed::{self, stream};

/// Index offset of the held-out examples used for residual statistics.
const HELD_OUT_START: u64 = 1 << 40;
const HELD_OUT_SIZE: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub files: Vec<PathBuf>,
    pub noise_power: f64,
}

/// Writes `ideal.{csv,json}` and, when impairments are enabled,
/// `impaired.{csv,json}` for the scenario's own sources and seed.
pub fn run_simulate(config: &ScenarioConfig, out_dir: &Path) -> Result<SimulateOutput> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let geom = config.geometry()?;
    let schedule = config.schedule()?;
    let sources = config.draw_sources(&mut seed::child_rng(config.seed, stream::SOURCES, 0))?;
    let noise_seed = seed::derive(config.seed, stream::NOISE, 0);
    let ideal = synthesize_ideal(&geom, &schedule, &sources, Noise::SnrDb(config.snr_db()), noise_seed)?;
    let meta = |impaired: bool| SnapshotMeta {
        noise_power: ideal.noise_power,
        seed: noise_seed,
        scenario_hash: config.hash(),
        samples: ideal.len(),
        sources: Some(sources.clone()),
        min_separation_deg: sources.min_separation_deg(),
        impaired,
    };
    let mut files = Vec::new();
    write_snapshot(out_dir, "ideal", &ideal, &meta(false))?;
    files.extend([out_dir.join("ideal.csv"), out_dir.join("ideal.json")]);
    if config.impairments.enabled {
        let imp = sample_impairments(&geom, &config.impairment_ranges(), seed::derive(config.seed, stream::IMPAIRMENTS, 0))?;
        let snap = synthesize_impaired(&geom, &schedule, &imp, &sources, Noise::Variance(ideal.noise_power), noise_seed)?;
        write_snapshot(out_dir, "impaired", &snap, &meta(true))?;
        files.extend([out_dir.join("impaired.csv"), out_dir.join("impaired.json")]);
    }
    Ok(SimulateOutput { files, noise_power: ideal.noise_power })
}

/// Mean per-sample `|ŷ - y|²` of the network on held-out examples.
pub fn held_out_residual_variance(model: &Reconstructor, scenario: &ScenarioConfig, config: &TrainConfig) -> Result<f64> {
    let held = generate_dataset_from(scenario, HELD_OUT_START, HELD_OUT_SIZE, config.snr_range_db, config.seed)?;
    let mut total = 0.0;
    let mut samples = 0usize;
    for e in &held {
        let y = unstack(&e.target)?;
        let r = model.reconstruct(&unstack(&e.input)?)?;
        total += (r - &y).norm_squared();
        samples += y.len();
    }
    Ok(total / samples as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model_path: PathBuf,
    pub loss_path: PathBuf,
    pub history: Vec<f64>,
    pub residual_variance: f64,
    pub first_epoch: usize,
}

/// Trains (or continues training from `resume_from`) and writes
/// `model.bin`, `model.bin.json` and `loss.csv` into `out_dir`.
pub fn run_train(scenario: &ScenarioConfig, config: &TrainConfig, out_dir: &Path, resume_from: Option<&Path>) -> Result<TrainReport> {
    scenario.validate()?;
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let data = generate_dataset(scenario, config.dataset_size, config.snr_range_db, config.seed)?;
    let outcome = match resume_from {
        Some(path) => resume(load_model(path)?.0, config, &data)?,
        None => train(config, &data)?,
    };
    let first_epoch = outcome.model.epochs_trained - config.epochs + 1;
    let residual_variance = held_out_residual_variance(&outcome.model, scenario, config)?;
    let model_path = out_dir.join("model.bin");
    let meta = ModelMeta {
        scenario_hash: Some(scenario.hash()),
        train_seed: Some(config.seed),
        final_loss: outcome.history.last().copied(),
        residual_variance: Some(residual_variance),
        ..ModelMeta::default()
    };
    save_model(&model_path, &outcome.model, &meta)?;
    let loss_path = out_dir.join("loss.csv");
    write_loss_csv(BufWriter::new(File::create(&loss_path)?), &outcome.history, first_epoch)?;
    Ok(TrainReport { model_path, loss_path, history: outcome.history, residual_variance, first_epoch })
}
