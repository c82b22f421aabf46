//! Shared fixtures for the criterion benches.

use risdoa::anm::Measurement;
use risdoa::model::{synthesize_ideal, Noise, ScenarioConfig};
use risdoa::seed::{self, stream};
use risdoa::{Result, RisGeometry, C64};
use nalgebra::DVector;

/// A noisy ideal snapshot of the scenario's first source draw, with its
/// prepared operator and per-sample noise power.
pub struct Fixture {
    pub geometry: RisGeometry,
    pub operator: Measurement,
    pub samples: DVector<C64>,
    pub noise_power: f64,
}

pub fn fixture(size: usize, samples: usize, snr_db: f64) -> Result<Fixture> {
    let mut scenario = ScenarioConfig::desk();
    scenario.geometry.rows = size;
    scenario.geometry.cols = size;
    scenario.signal.samples = samples;
    let geometry = scenario.geometry()?;
    let schedule = scenario.schedule()?;
    let sources = scenario.draw_sources(&mut seed::child_rng(1, stream::SOURCES, 0))?;
    let snap = synthesize_ideal(&geometry, &schedule, &sources, Noise::SnrDb(snr_db), 1)?;
    Ok(Fixture { geometry, operator: Measurement::from_codes(schedule.codes())?, samples: snap.samples, noise_power: snap.noise_power })
}
