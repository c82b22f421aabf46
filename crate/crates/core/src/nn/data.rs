//! Paired impaired/ideal training data and the real-stacking rule.

use nalgebra::DVector;
use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sample_impairments, synthesize_ideal, synthesize_impaired, Noise, ScenarioConfig, C64};
use crate::seed::{self, stream};

/// `[Re z; Im z]`.
pub fn stack(z: &DVector<C64>) -> Array1<f64> {
    z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect()
}

/// Inverse of [`stack`].
pub fn unstack(v: &Array1<f64>) -> Result<DVector<C64>> {
    if v.len() % 2 != 0 {
        return Err(Error::Dimension(format!("odd stacked length {}", v.len())));
    }
    let p = v.len() / 2;
    Ok(DVector::from_fn(p, |i, _| C64::new(v[i], v[p + i])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub input: Array1<f64>,
    pub target: Array1<f64>,
}

/// Example `i` draws fresh sources, impairments and an SNR uniform in
/// `snr_range`; the impaired input and the ideal target share one noise
/// realisation whose variance is calibrated on the ideal signal.
pub fn generate_example(config: &ScenarioConfig, snr_range: [f64; 2], seed: u64, index: u64) -> Result<TrainingExample> {
    let geom = config.geometry()?;
    let schedule = config.schedule()?;
    let mut rng = seed::child_rng(seed, stream::DATASET, index);
    let sources = config.draw_sources(&mut rng)?;
    let snr = if snr_range[0] < snr_range[1] { rng.random_range(snr_range[0]..snr_range[1]) } else { snr_range[0] };
    let imp_seed: u64 = rng.random();
    let noise_seed: u64 = rng.random();
    let impairments = sample_impairments(&geom, &config.impairment_ranges(), imp_seed)?;
    let ideal = synthesize_ideal(&geom, &schedule, &sources, Noise::SnrDb(snr), noise_seed)?;
    let impaired = synthesize_impaired(&geom, &schedule, &impairments, &sources, Noise::Variance(ideal.noise_power), noise_seed)?;
    Ok(TrainingExample { input: stack(&impaired.samples), target: stack(&ideal.samples) })
}

pub fn generate_dataset(config: &ScenarioConfig, size: usize, snr_range: [f64; 2], seed: u64) -> Result<Vec<TrainingExample>> {
    generate_dataset_from(config, 0, size, snr_range, seed)
}

/// Examples `start..start + size`; disjoint ranges give disjoint held-out
/// sets under the same seed.
pub fn generate_dataset_from(
    config: &ScenarioConfig,
    start: u64,
    size: usize,
    snr_range: [f64; 2],
    seed: u64,
) -> Result<Vec<TrainingExample>> {
    config.validate()?;
    if size == 0 {
        return Err(Error::Config("dataset size must be positive".into()));
    }
    if !(snr_range[0] <= snr_range[1]) {
        return Err(Error::Config(format!("empty SNR range {snr_range:?}")));
    }
    (0..size as u64).map(|i| generate_example(config, snr_range, seed, start + i)).collect()
}

/// Rows of inputs and of targets.
pub fn to_matrices(data: &[TrainingExample]) -> Result<(Array2<f64>, Array2<f64>)> {
    let width = data.first().map(|e| e.input.len()).ok_or_else(|| Error::Config("empty dataset".into()))?;
    let mut x = Array2::zeros((data.len(), width));
    let mut y = Array2::zeros((data.len(), width));
    for (i, e) in data.iter().enumerate() {
        if e.input.len() != width || e.target.len() != width {
            return Err(Error::Dimension(format!("example {i} has inconsistent width")));
        }
        x.row_mut(i).assign(&e.input);
        y.row_mut(i).assign(&e.target);
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut c = ScenarioConfig::desk();
        c.geometry.rows = 4;
        c.geometry.cols = 4;
        c.signal.samples = 16;
        c
    }

    #[test]
    fn stacking_round_trip() {
        let z = DVector::from_vec(vec![C64::new(1.0, -2.0), C64::new(0.5, 3.0)]);
        let s = stack(&z);
        assert_eq!(s.to_vec(), vec![1.0, 0.5, -2.0, 3.0]);
        assert_eq!(unstack(&s).unwrap(), z);
    }

    #[test]
    fn ideal_hardware_gives_identical_pairs() {
        let mut c = small();
        c.impairments.enabled = false;
        let d = generate_dataset(&c, 1, [20.0, 50.0], 9).unwrap();
        assert_eq!(d[0].input, d[0].target);
    }

    #[test]
    fn widths_and_determinism() {
        let c = small();
        let a = generate_dataset(&c, 3, [20.0, 50.0], 4).unwrap();
        assert_eq!(a[0].input.len(), 32);
        assert_eq!(a, generate_dataset(&c, 3, [20.0, 50.0], 4).unwrap());
        assert_ne!(a[0].input, a[0].target);
    }
}
