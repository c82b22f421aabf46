//! Scenario description: geometry, sources, impairment ranges, noise, seed.
//!
//! Read from TOML (flat key/value text with sections) or JSON:
//!
//! ```toml
//! seed = 1
//!
//! [geometry]
//! rows = 8
//! cols = 8
//! row_spacing = 0.4
//! col_spacing = 0.4
//!
//! [signal]
//! samples = 64
//! snr_db = 20.0
//!
//! [sources]
//! count = 2
//! elevation_range_deg = [20.0, 80.0]
//! azimuth_range_deg = [-30.0, 30.0]
//! min_separation_deg = 15.0
//!
//! [impairments]
//! enabled = true
//! coupling_amplitude = [0.1, 0.4]
//! mismatch_amplitude = [0.5, 1.5]
//! mismatch_phase_deg = [-30.0, 30.0]
//! ```

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{build_code_schedule, CodeSchedule, ImpairmentRanges, RisGeometry, SourceSet, C64, DEFAULT_NEIGHBORS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_spacing")]
    pub row_spacing: f64,
    #[serde(default = "default_spacing")]
    pub col_spacing: f64,
}

fn default_spacing() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub samples: usize,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    /// Overrides `snr_db` and disables receiver noise.
    #[serde(default)]
    pub noiseless: bool,
}

fn default_snr() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub count: usize,
    /// Fixed directions; when absent, directions are drawn per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevations_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuths_deg: Option<Vec<f64>>,
    #[serde(default = "default_elevation_range")]
    pub elevation_range_deg: [f64; 2],
    #[serde(default = "default_azimuth_range")]
    pub azimuth_range_deg: [f64; 2],
    #[serde(default)]
    pub min_separation_deg: f64,
}

fn default_elevation_range() -> [f64; 2] {
    [20.0, 80.0]
}

fn default_azimuth_range() -> [f64; 2] {
    [-30.0, 30.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpairmentConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_coupling")]
    pub coupling_amplitude: [f64; 2],
    #[serde(default = "default_neighbors")]
    pub coupling_neighbors: Vec<(isize, isize)>,
    #[serde(default = "default_mismatch_amp")]
    pub mismatch_amplitude: [f64; 2],
    #[serde(default = "default_mismatch_phase")]
    pub mismatch_phase_deg: [f64; 2],
}

fn yes() -> bool {
    true
}
fn default_coupling() -> [f64; 2] {
    [0.1, 0.4]
}
fn default_neighbors() -> Vec<(isize, isize)> {
    DEFAULT_NEIGHBORS.to_vec()
}
fn default_mismatch_amp() -> [f64; 2] {
    [0.5, 1.5]
}
fn default_mismatch_phase() -> [f64; 2] {
    [-30.0, 30.0]
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            coupling_amplitude: default_coupling(),
            coupling_neighbors: default_neighbors(),
            mismatch_amplitude: default_mismatch_amp(),
            mismatch_phase_deg: default_mismatch_phase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub signal: SignalConfig,
    pub sources: SourceConfig,
    #[serde(default)]
    pub impairments: ImpairmentConfig,
}

impl ScenarioConfig {
    /// Laptop-sized default: 8x8 RIS, 64 samples.
    pub fn desk() -> Self {
        Self::sized(8, 64)
    }

    /// The full-size setup: 16x16 RIS, 128 samples.
    pub fn paper() -> Self {
        Self::sized(16, 128)
    }

    fn sized(size: usize, samples: usize) -> Self {
        Self {
            seed: 1,
            geometry: GeometryConfig { rows: size, cols: size, row_spacing: 0.4, col_spacing: 0.4 },
            signal: SignalConfig { samples, snr_db: 20.0, noiseless: false },
            sources: SourceConfig {
                count: 2,
                elevations_deg: None,
                azimuths_deg: None,
                elevation_range_deg: default_elevation_range(),
                azimuth_range_deg: default_azimuth_range(),
                min_separation_deg: 15.0,
            },
            impairments: ImpairmentConfig::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `.json` files as JSON and everything else as TOML.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        self.impairment_ranges().validate()?;
        if self.signal.samples == 0 {
            return Err(Error::Config("signal.samples must be positive".into()));
        }
        if self.signal.snr_db.is_nan() {
            return Err(Error::Config("signal.snr_db is NaN".into()));
        }
        let src = &self.sources;
        if src.count == 0 {
            return Err(Error::Config("sources.count must be positive".into()));
        }
        match (&src.elevations_deg, &src.azimuths_deg) {
            (Some(el), Some(az)) => {
                if el.len() != src.count || az.len() != src.count {
                    return Err(Error::Config("fixed source lists must have `count` entries".into()));
                }
                SourceSet::unit(el.clone(), az.clone())?;
            }
            (None, None) => {
                let [elo, ehi] = src.elevation_range_deg;
                let [alo, ahi] = src.azimuth_range_deg;
                if !(0.0 <= elo && elo <= ehi && ehi <= 180.0 && -90.0 <= alo && alo <= ahi && ahi <= 90.0) {
                    return Err(Error::Config("source angle ranges out of bounds".into()));
                }
            }
            _ => return Err(Error::Config("give both elevations_deg and azimuths_deg or neither".into())),
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<RisGeometry> {
        let g = &self.geometry;
        RisGeometry::new(g.rows, g.cols, g.row_spacing, g.col_spacing)
    }

    /// The RIS code schedule, fixed by the scenario seed.
    pub fn schedule(&self) -> Result<CodeSchedule> {
        build_code_schedule(self.signal.samples, self.geometry()?.elements(), self.seed)
    }

    /// Ranges to sample impairments from; ideal ranges when disabled.
    pub fn impairment_ranges(&self) -> ImpairmentRanges {
        let imp = &self.impairments;
        if !imp.enabled {
            return ImpairmentRanges::ideal();
        }
        ImpairmentRanges {
            coupling_amplitude: imp.coupling_amplitude,
            coupling_neighbors: imp.coupling_neighbors.clone(),
            mismatch_amplitude: imp.mismatch_amplitude,
            mismatch_phase_deg: imp.mismatch_phase_deg,
        }
    }

    pub fn snr_db(&self) -> f64 {
        if self.signal.noiseless {
            f64::INFINITY
        } else {
            self.signal.snr_db
        }
    }

    /// Fixed sources from the config, or a fresh draw from the configured
    /// ranges. Amplitudes have unit modulus and uniform phase.
    pub fn draw_sources<R: Rng>(&self, rng: &mut R) -> Result<SourceSet> {
        let src = &self.sources;
        let k = src.count;
        let phases: Vec<C64> = (0..k).map(|_| C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).collect();
        if let (Some(el), Some(az)) = (&src.elevations_deg, &src.azimuths_deg) {
            return SourceSet::new(el.clone(), az.clone(), phases);
        }
        let draw = |rng: &mut R, [lo, hi]: [f64; 2]| if lo < hi { rng.random_range(lo..hi) } else { lo };
        for _ in 0..10_000 {
            let el: Vec<f64> = (0..k).map(|_| draw(rng, src.elevation_range_deg)).collect();
            let az: Vec<f64> = (0..k).map(|_| draw(rng, src.azimuth_range_deg)).collect();
            let set = SourceSet::new(el, az, phases.clone())?;
            if set.min_separation_deg().is_none_or(|d| d >= src.min_separation_deg) {
                return Ok(set);
            }
        }
        Err(Error::Config(format!(
            "cannot place {k} sources {}° apart inside the configured ranges",
            src.min_separation_deg
        )))
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn toml_round_trip_and_defaults() {
        let text = r#"
            seed = 9
            [geometry]
            rows = 16
            cols = 16
            [signal]
            samples = 128
            [sources]
            count = 2
        "#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.geometry.row_spacing, 0.4);
        assert_eq!(cfg.signal.snr_db, 20.0);
        assert_eq!(cfg.impairments, ImpairmentConfig::default());
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn json_accepted() {
        let cfg = ScenarioConfig::paper();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_json_str(&json).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let mut cfg = ScenarioConfig::desk();
        cfg.geometry.row_spacing = 0.7;
        assert!(cfg.validate().is_err());
        let text = "[geometry]\nrows=4\ncols=4\nbogus=1\n[signal]\nsamples=8\n[sources]\ncount=1\n";
        assert!(ScenarioConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ScenarioConfig::desk();
        let mut b = a.clone();
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn drawn_sources_respect_ranges_and_separation() {
        let cfg = ScenarioConfig::desk();
        let mut rng = seed::rng(4);
        for _ in 0..50 {
            let s = cfg.draw_sources(&mut rng).unwrap();
            assert_eq!(s.count(), 2);
            assert!(s.min_separation_deg().unwrap() >= 15.0);
            for (el, az) in s.directions() {
                assert!((20.0..=80.0).contains(&el));
                assert!((-30.0..=30.0).contains(&az));
            }
        }
    }
}
