//! Experiment plans and presets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::anm::Mode;
use crate::error::{Error, Result};
use crate::model::ScenarioConfig;
use crate::nn::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fft,
    Omp,
    FftDenoise,
    OmpDenoise,
    AnmDenoise,
    DnnDanm,
    Crb,
}

impl Method {
    pub const ALL: [Method; 7] =
        [Method::Fft, Method::Omp, Method::FftDenoise, Method::OmpDenoise, Method::AnmDenoise, Method::DnnDanm, Method::Crb];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fft => "fft",
            Method::Omp => "omp",
            Method::FftDenoise => "fft-denoise",
            Method::OmpDenoise => "omp-denoise",
            Method::AnmDenoise => "anm-denoise",
            Method::DnnDanm => "dnn-danm",
            Method::Crb => "crb",
        }
    }

    /// Methods that consume the network output.
    pub fn needs_model(self) -> bool {
        matches!(self, Method::FftDenoise | Method::OmpDenoise | Method::AnmDenoise | Method::DnnDanm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// How the atomic-norm stages treat the network output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenoiseMode {
    Regularized,
    NoiseBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mode: DenoiseMode,
    /// Largest `M·N` for `anm-denoise`.
    pub full_size_cap: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tolerance: 1e-4, max_iterations: 20_000, mode: DenoiseMode::NoiseBall, full_size_cap: 64 }
    }
}

impl SolverSettings {
    /// Solver configuration for observations whose per-sample error variance
    /// is `variance` over `samples` samples of an `elements`-element array.
    pub fn solver_config(&self, variance: f64, samples: usize, elements: usize) -> crate::anm::SolverConfig {
        let mode = match self.mode {
            DenoiseMode::Regularized => Mode::Regularized { alpha: crate::anm::alpha_for_noise(variance, elements) },
            DenoiseMode::NoiseBall => Mode::NoiseBall { noise_power: variance * samples as f64 },
        };
        crate::anm::SolverConfig {
            max_iterations: self.max_iterations,
            full_size_cap: self.full_size_cap,
            accept_unconverged: true,
            ..crate::anm::SolverConfig::default().with_tolerance(self.tolerance).with_mode(mode)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentPlan {
    pub scenario: ScenarioConfig,
    pub snr_db: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
    pub grid_step_deg: f64,
    /// Minimum distance between reported spectrum peaks.
    pub peak_separation_deg: f64,
    pub solver: SolverSettings,
    pub train: TrainConfig,
    /// Record wall-clock seconds; when off the column is zero so reruns are
    /// byte-identical.
    pub timing: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentPlan {
    /// 8x8 surface, 64 samples, 100 trials. The network for the benchmark is
    /// trained on 10 000 examples for 300 epochs; 2 000 examples generalise
    /// too poorly for the denoised baselines to gain anything.
    pub fn desk() -> Self {
        Self {
            scenario: ScenarioConfig::desk(),
            snr_db: vec![20.0],
            methods: vec![Method::Fft, Method::Omp, Method::FftDenoise, Method::OmpDenoise, Method::DnnDanm, Method::Crb],
            trials: 100,
            seed: 1,
            workers: 1,
            grid_step_deg: 1.0,
            peak_separation_deg: 4.0,
            solver: SolverSettings::default(),
            train: TrainConfig { dataset_size: 10_000, epochs: 300, ..TrainConfig::default() },
            timing: true,
        }
    }

    /// 16x16 surface, 128 samples, 1000 trials over 0..30 dB.
    pub fn paper() -> Self {
        Self {
            scenario: ScenarioConfig::paper(),
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 1000,
            solver: SolverSettings { full_size_cap: 256, ..SolverSettings::default() },
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "paper" => Ok(Self::paper()),
            other => Err(Error::Config(format!("unknown preset '{other}' (expected desk or paper)"))),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let plan: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    /// JSON by extension, TOML otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.train.validate()?;
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.snr_db.is_empty() || self.methods.is_empty() {
            return bad("SNR sweep and method list must be non-empty");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.grid_step_deg > 0.0) || !(self.peak_separation_deg >= 0.0) {
            return bad("grid step must be positive and peak separation non-negative");
        }
        if !(self.solver.tolerance > 0.0) || self.solver.max_iterations == 0 {
            return bad("solver tolerance and iteration budget must be positive");
        }
        Ok(())
    }

    pub fn needs_model(&self) -> bool {
        self.methods.iter().any(|m| m.needs_model())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("music".parse::<Method>().is_err());
    }

    #[test]
    fn plan_toml_round_trip() {
        let p = ExperimentPlan::desk();
        let back = ExperimentPlan::from_toml_str(&p.to_toml_string().unwrap()).unwrap();
        assert_eq!(p, back);
        let partial = ExperimentPlan::from_toml_str("trials = 3\nmethods = [\"fft\"]\n").unwrap();
        assert_eq!(partial.trials, 3);
        assert_eq!(partial.scenario, ScenarioConfig::desk());
    }

    #[test]
    fn empty_lists_rejected() {
        let p = ExperimentPlan { methods: vec![], ..ExperimentPlan::desk() };
        assert!(p.validate().is_err());
        assert!(ExperimentPlan::preset("huge").is_err());
    }
}
