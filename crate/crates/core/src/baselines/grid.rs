//! Angle grid, matched-filter dictionary and the beamforming spectrum.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dimension, Error, Result};
use crate::model::{steering_vector, RisGeometry, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    pub elevations_deg: Vec<f64>,
    pub azimuths_deg: Vec<f64>,
    pub elevation_step_deg: f64,
    pub azimuth_step_deg: f64,
}

impl AngleGrid {
    /// Inclusive uniform grid over both ranges.
    pub fn uniform(elevation: [f64; 2], azimuth: [f64; 2], step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) || elevation[0] > elevation[1] || azimuth[0] > azimuth[1] {
            return Err(Error::Domain(format!("invalid grid {elevation:?} x {azimuth:?} step {step_deg}")));
        }
        let axis = |[lo, hi]: [f64; 2]| -> Vec<f64> {
            let n = ((hi - lo) / step_deg + 1e-9).floor() as usize;
            (0..=n).map(|i| lo + i as f64 * step_deg).collect()
        };
        Ok(Self {
            elevations_deg: axis(elevation),
            azimuths_deg: axis(azimuth),
            elevation_step_deg: step_deg,
            azimuth_step_deg: step_deg,
        })
    }

    /// 1° grid over elevation `[20, 80]` and azimuth `[-30, 30]`.
    pub fn default_search() -> Self {
        Self::uniform([20.0, 80.0], [-30.0, 30.0], 1.0).expect("valid default grid")
    }

    pub fn len(&self) -> usize {
        self.elevations_deg.len() * self.azimuths_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index, elevation major.
    pub fn index(&self, el: usize, az: usize) -> usize {
        el * self.azimuths_deg.len() + az
    }

    pub fn point(&self, flat: usize) -> (f64, f64) {
        let na = self.azimuths_deg.len();
        (self.elevations_deg[flat / na], self.azimuths_deg[flat % na])
    }
}

/// Columns `G a(θ, φ)` over a grid with their norms.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub grid: AngleGrid,
    pub atoms: DMatrix<C64>,
    pub norms: DVector<f64>,
}

impl Dictionary {
    pub fn new(g: &DMatrix<C64>, geom: &RisGeometry, grid: &AngleGrid) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Domain("empty angle grid".into()));
        }
        if g.ncols() != geom.elements() {
            return Err(dimension(format!("G has {} columns, geometry {} elements", g.ncols(), geom.elements())));
        }
        let mut steer = DMatrix::zeros(geom.elements(), grid.len());
        for i in 0..grid.len() {
            let (el, az) = grid.point(i);
            steer.set_column(i, &steering_vector(geom, el, az)?);
        }
        let atoms = g * steer;
        let norms = DVector::from_iterator(grid.len(), atoms.column_iter().map(|c| c.norm()));
        Ok(Self { grid: grid.clone(), atoms, norms })
    }

    pub fn samples(&self) -> usize {
        self.atoms.nrows()
    }

    /// `|dᴴ r|² / ‖d‖²` for every column.
    pub fn correlate(&self, r: &DVector<C64>) -> Result<DVector<f64>> {
        if r.len() != self.samples() {
            return Err(dimension(format!("{} samples, dictionary has {}", r.len(), self.samples())));
        }
        let c = self.atoms.ad_mul(r);
        Ok(DVector::from_iterator(
            c.len(),
            c.iter().zip(self.norms.iter()).map(|(v, &n)| if n > 0.0 { v.norm_sqr() / (n * n) } else { 0.0 }),
        ))
    }
}

/// Matched-filter scores over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: AngleGrid,
    /// Elevation-major.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub score: f64,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
}

pub fn grid_spectrum(z: &DVector<C64>, dict: &Dictionary) -> Result<Spectrum> {
    Ok(Spectrum { grid: dict.grid.clone(), scores: dict.correlate(z)?.iter().copied().collect() })
}

impl Spectrum {
    pub fn score(&self, el: usize, az: usize) -> f64 {
        self.scores[self.grid.index(el, az)]
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }

    fn is_local_max(&self, el: usize, az: usize) -> bool {
        let (ne, na) = (self.grid.elevations_deg.len() as isize, self.grid.azimuths_deg.len() as isize);
        let s = self.score(el, az);
        for de in -1..=1isize {
            for da in -1..=1isize {
                let (e, a) = (el as isize + de, az as isize + da);
                if (de, da) == (0, 0) || e < 0 || a < 0 || e >= ne || a >= na {
                    continue;
                }
                let n = self.score(e as usize, a as usize);
                // ties resolve towards the lower flat index
                let earlier = (e, a) < (el as isize, az as isize);
                if n > s || (n == s && earlier) {
                    return false;
                }
            }
        }
        true
    }

    /// The `k` strongest local maxima at least `min_separation_deg` apart
    /// (Euclidean in the angle plane), each refined by a per-axis parabola
    /// through its neighbours. Falls back to the strongest remaining points
    /// when fewer maxima exist.
    pub fn peaks(&self, k: usize, min_separation_deg: f64) -> Vec<Peak> {
        let (ne, na) = (self.grid.elevations_deg.len(), self.grid.azimuths_deg.len());
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        let maxima: Vec<usize> = order.iter().copied().filter(|&i| self.is_local_max(i / na, i % na)).collect();

        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for candidates in [&maxima, &order] {
            for &i in candidates.iter() {
                if chosen.len() == k {
                    break;
                }
                let (e, a) = self.grid.point(i);
                let far = chosen.iter().all(|&j| {
                    let (e2, a2) = self.grid.point(j);
                    ((e - e2).powi(2) + (a - a2).powi(2)).sqrt() >= min_separation_deg
                });
                if far && !chosen.contains(&i) {
                    chosen.push(i);
                }
            }
        }
        chosen
            .into_iter()
            .map(|i| {
                let (el, az) = (i / na, i % na);
                let refine = |lo: Option<f64>, mid: f64, hi: Option<f64>| match (lo, hi) {
                    (Some(l), Some(h)) => {
                        let den = l - 2.0 * mid + h;
                        if den < 0.0 {
                            (0.5 * (l - h) / den).clamp(-0.5, 0.5)
                        } else {
                            0.0
                        }
                    }
                    _ => 0.0,
                };
                let s = self.score(el, az);
                let de = refine(
                    el.checked_sub(1).map(|e| self.score(e, az)),
                    s,
                    (el + 1 < ne).then(|| self.score(el + 1, az)),
                );
                let da = refine(
                    az.checked_sub(1).map(|a| self.score(el, a)),
                    s,
                    (az + 1 < na).then(|| self.score(el, az + 1)),
                );
                Peak {
                    index: i,
                    score: s,
                    elevation_deg: self.grid.elevations_deg[el] + de * self.grid.elevation_step_deg,
                    azimuth_deg: self.grid.azimuths_deg[az] + da * self.grid.azimuth_step_deg,
                }
            })
            .collect()
    }
}
