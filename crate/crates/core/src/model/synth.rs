use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::{steering_matrix, CodeSchedule, ImpairmentModel, RisGeometry, SourceSet, C64};
use crate::error::{dimension, domain, Result};
use crate::seed;

/// How much receiver noise to add.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// Relative to the mean power of the noiseless received vector.
    /// `f64::INFINITY` disables noise.
    SnrDb(f64),
    /// Absolute per-sample variance.
    Variance(f64),
}

/// Samples seen by the single receive channel over one code schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub samples: DVector<C64>,
    /// Per-sample noise variance.
    pub noise_power: f64,
    pub seed: u64,
}

impl Snapshot {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub(crate) fn mean_power(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len().max(1) as f64
}

fn check_dims(geom: &RisGeometry, schedule: &CodeSchedule) -> Result<()> {
    if schedule.elements() != geom.elements() {
        return Err(dimension(format!(
            "code schedule has {} elements, geometry {}",
            schedule.elements(),
            geom.elements()
        )));
    }
    Ok(())
}

fn finish(clean: DVector<C64>, noise: Noise, seed: u64) -> Result<Snapshot> {
    let noise_power = match noise {
        Noise::SnrDb(db) if db == f64::INFINITY => 0.0,
        Noise::SnrDb(db) if db.is_finite() => mean_power(&clean) / 10f64.powf(db / 10.0),
        Noise::SnrDb(db) => return Err(domain(format!("invalid SNR {db} dB"))),
        Noise::Variance(v) if v >= 0.0 && v.is_finite() => v,
        Noise::Variance(v) => return Err(domain(format!("invalid noise variance {v}"))),
    };
    let mut rng = seed::child_rng(seed, seed::stream::NOISE, 0);
    let sigma = (noise_power / 2.0).sqrt();
    let samples = clean.map(|y| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        y + C64::new(re, im) * sigma
    });
    Ok(Snapshot { samples, noise_power, seed })
}

/// `y = G A s + w` for ideal hardware.
pub fn synthesize_ideal(
    geom: &RisGeometry,
    schedule: &CodeSchedule,
    sources: &SourceSet,
    noise: Noise,
    seed: u64,
) -> Result<Snapshot> {
    check_dims(geom, schedule)?;
    let a = steering_matrix(geom, sources)?;
    let s = DVector::from_column_slice(&sources.amplitudes);
    let clean = schedule.codes_complex() * (a * s);
    finish(clean, noise, seed)
}

/// `ỹ = (B ⊙ G) C A s + w` under the given impairments.
pub fn synthesize_impaired(
    geom: &RisGeometry,
    schedule: &CodeSchedule,
    impairments: &ImpairmentModel,
    sources: &SourceSet,
    noise: Noise,
    seed: u64,
) -> Result<Snapshot> {
    check_dims(geom, schedule)?;
    if impairments.coupling.shape() != (geom.elements(), geom.elements()) {
        return Err(dimension("coupling matrix does not match geometry"));
    }
    let a = steering_matrix(geom, sources)?;
    let s = DVector::from_column_slice(&sources.amplitudes);
    let r: DMatrix<C64> = impairments.effective_reflection(schedule)?;
    let clean = r * (&impairments.coupling * (a * s));
    finish(clean, noise, seed)
}
