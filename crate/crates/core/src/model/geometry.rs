use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{dimension, domain, Result};

/// Planar RIS layout. Spacings are in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisGeometry {
    pub rows: usize,
    pub cols: usize,
    pub row_spacing: f64,
    pub col_spacing: f64,
}

impl RisGeometry {
    pub fn new(rows: usize, cols: usize, row_spacing: f64, col_spacing: f64) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(domain(format!("RIS must be at least 2x2, got {rows}x{cols}")));
        }
        for (name, d) in [("row", row_spacing), ("column", col_spacing)] {
            if !(d > 0.0 && d <= 0.5) {
                return Err(domain(format!("{name} spacing {d} outside (0, 0.5]")));
            }
        }
        Ok(Self { rows, cols, row_spacing, col_spacing })
    }

    /// Square array with equal spacing on both axes.
    pub fn square(size: usize, spacing: f64) -> Result<Self> {
        Self::new(size, size, spacing, spacing)
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn flat_index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }
}

fn check_direction(elevation_deg: f64, azimuth_deg: f64) -> Result<()> {
    if !(0.0..=180.0).contains(&elevation_deg) {
        return Err(domain(format!("elevation {elevation_deg} outside [0, 180]")));
    }
    if !(-90.0..=90.0).contains(&azimuth_deg) {
        return Err(domain(format!("azimuth {azimuth_deg} outside [-90, 90]")));
    }
    Ok(())
}

/// Row and column spatial frequencies `(cosθ, sinθ sinφ)` of a direction.
pub fn frequencies(elevation_deg: f64, azimuth_deg: f64) -> (f64, f64) {
    let (theta, phi) = (elevation_deg.to_radians(), azimuth_deg.to_radians());
    (theta.cos(), theta.sin() * phi.sin())
}

/// Inverse of [`frequencies`] on the open domain; no clamping.
pub fn direction_from_frequencies(row_freq: f64, col_freq: f64) -> (f64, f64) {
    let theta = row_freq.acos();
    let phi = (col_freq / theta.sin()).asin();
    (theta.to_degrees(), phi.to_degrees())
}

/// Single-axis steering vector `[1, e^{-j2π d f}, …, e^{-j2π (len-1) d f}]`.
pub fn axis_vector(len: usize, spacing: f64, freq: f64) -> DVector<C64> {
    DVector::from_fn(len, |k, _| C64::from_polar(1.0, -2.0 * PI * k as f64 * spacing * freq))
}

/// Steering vector of length `M * N` in row-major element order.
pub fn steering_vector(geom: &RisGeometry, elevation_deg: f64, azimuth_deg: f64) -> Result<DVector<C64>> {
    check_direction(elevation_deg, azimuth_deg)?;
    let (fr, fc) = frequencies(elevation_deg, azimuth_deg);
    let (dr, dc) = (geom.row_spacing, geom.col_spacing);
    Ok(DVector::from_fn(geom.elements(), |i, _| {
        let (m, n) = ((i / geom.cols) as f64, (i % geom.cols) as f64);
        C64::from_polar(1.0, -2.0 * PI * (n * dc * fc + m * dr * fr))
    }))
}

/// The steering vector reshaped to `M x N`: the outer product of the row
/// axis vector with the column axis vector (`a_r a_c^T`).
pub fn steering_outer(geom: &RisGeometry, elevation_deg: f64, azimuth_deg: f64) -> Result<DMatrix<C64>> {
    check_direction(elevation_deg, azimuth_deg)?;
    let (fr, fc) = frequencies(elevation_deg, azimuth_deg);
    let ar = axis_vector(geom.rows, geom.row_spacing, fr);
    let ac = axis_vector(geom.cols, geom.col_spacing, fc);
    Ok(&ar * ac.transpose())
}

/// Far-field sources with complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSet {
    pub elevations_deg: Vec<f64>,
    pub azimuths_deg: Vec<f64>,
    pub amplitudes: Vec<C64>,
}

impl SourceSet {
    pub fn new(elevations_deg: Vec<f64>, azimuths_deg: Vec<f64>, amplitudes: Vec<C64>) -> Result<Self> {
        let k = elevations_deg.len();
        if k == 0 {
            return Err(domain("at least one source is required"));
        }
        if azimuths_deg.len() != k || amplitudes.len() != k {
            return Err(dimension(format!(
                "source lists disagree: {} elevations, {} azimuths, {} amplitudes",
                k,
                azimuths_deg.len(),
                amplitudes.len()
            )));
        }
        for (&el, &az) in elevations_deg.iter().zip(&azimuths_deg) {
            check_direction(el, az)?;
        }
        Ok(Self { elevations_deg, azimuths_deg, amplitudes })
    }

    /// Unit-amplitude sources.
    pub fn unit(elevations_deg: Vec<f64>, azimuths_deg: Vec<f64>) -> Result<Self> {
        let amps = vec![C64::new(1.0, 0.0); elevations_deg.len()];
        Self::new(elevations_deg, azimuths_deg, amps)
    }

    pub fn count(&self) -> usize {
        self.elevations_deg.len()
    }

    pub fn directions(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.elevations_deg.iter().copied().zip(self.azimuths_deg.iter().copied())
    }

    /// Smallest pairwise distance in the (elevation, azimuth) plane, in
    /// degrees. `None` for a single source.
    pub fn min_separation_deg(&self) -> Option<f64> {
        let dirs: Vec<_> = self.directions().collect();
        let mut best: Option<f64> = None;
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                let d = (dirs[i].0 - dirs[j].0).hypot(dirs[i].1 - dirs[j].1);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

/// Steering matrix `A` (`MN x K`), one column per source.
pub fn steering_matrix(geom: &RisGeometry, sources: &SourceSet) -> Result<DMatrix<C64>> {
    let cols = sources
        .directions()
        .map(|(el, az)| steering_vector(geom, el, az))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom(d: f64) -> RisGeometry {
        RisGeometry::square(2, d).unwrap()
    }

    #[test]
    fn broadside_is_all_ones() {
        let a = steering_vector(&geom(0.4), 90.0, 0.0).unwrap();
        for z in a.iter() {
            assert_relative_eq!(z.re, 1.0, epsilon = 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn corner_phase_matches_scalar_evaluation() {
        // phase = -2π (0.4 sin60 sin30 + 0.4 cos60) = -2π * 0.373205...
        let a = steering_vector(&geom(0.4), 60.0, 30.0).unwrap();
        let expected = -2.0 * PI * 0.373_205_080_756_887_7;
        let got = a[3];
        assert_relative_eq!(got.re, expected.cos(), epsilon = 1e-12);
        assert_relative_eq!(got.im, expected.sin(), epsilon = 1e-12);
        assert_relative_eq!(expected, -2.344_916_7, epsilon = 1e-6);
    }

    #[test]
    fn rejects_out_of_range_angles() {
        let g = geom(0.4);
        assert!(steering_vector(&g, -1.0, 0.0).is_err());
        assert!(steering_vector(&g, 181.0, 0.0).is_err());
        assert!(steering_vector(&g, 90.0, 90.5).is_err());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(RisGeometry::new(1, 4, 0.4, 0.4).is_err());
        assert!(RisGeometry::new(4, 4, 0.6, 0.4).is_err());
        assert!(RisGeometry::new(4, 4, 0.4, 0.0).is_err());
    }

    #[test]
    fn source_lists_must_agree() {
        assert!(SourceSet::unit(vec![10.0, 20.0], vec![0.0]).is_err());
        assert!(SourceSet::unit(vec![], vec![]).is_err());
        let s = SourceSet::unit(vec![40.0, 70.0], vec![-20.0, 25.0]).unwrap();
        assert_relative_eq!(s.min_separation_deg().unwrap(), 30f64.hypot(45.0));
    }

    #[test]
    fn frequency_round_trip() {
        let (fr, fc) = frequencies(60.0, 30.0);
        assert_relative_eq!(fr, 0.5, epsilon = 1e-15);
        assert_relative_eq!(fc, 0.433_012_701_892_219_3, epsilon = 1e-15);
        let (el, az) = direction_from_frequencies(fr, fc);
        assert_relative_eq!(el, 60.0, epsilon = 1e-12);
        assert_relative_eq!(az, 30.0, epsilon = 1e-12);
    }
}
