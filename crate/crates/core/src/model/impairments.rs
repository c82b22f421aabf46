use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CodeSchedule, RisGeometry, C64};
use crate::error::{dimension, domain, Result};
use crate::seed;

/// Right, down and down-right neighbours.
pub const DEFAULT_NEIGHBORS: [(isize, isize); 3] = [(0, 1), (1, 0), (1, 1)];

/// Sampling ranges for the hardware impairments. Phases are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentRanges {
    pub coupling_amplitude: [f64; 2],
    pub coupling_neighbors: Vec<(isize, isize)>,
    pub mismatch_amplitude: [f64; 2],
    pub mismatch_phase_deg: [f64; 2],
}

impl Default for ImpairmentRanges {
    fn default() -> Self {
        Self {
            coupling_amplitude: [0.1, 0.4],
            coupling_neighbors: DEFAULT_NEIGHBORS.to_vec(),
            mismatch_amplitude: [0.5, 1.5],
            mismatch_phase_deg: [-30.0, 30.0],
        }
    }
}

impl ImpairmentRanges {
    /// Ranges that sample ideal hardware.
    pub fn ideal() -> Self {
        Self {
            coupling_amplitude: [0.0, 0.0],
            coupling_neighbors: DEFAULT_NEIGHBORS.to_vec(),
            mismatch_amplitude: [1.0, 1.0],
            mismatch_phase_deg: [0.0, 0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, [lo, hi]: [f64; 2], nonneg: bool| {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || (nonneg && lo < 0.0) {
                return Err(domain(format!("invalid {name} range [{lo}, {hi}]")));
            }
            Ok(())
        };
        check("coupling amplitude", self.coupling_amplitude, true)?;
        check("mismatch amplitude", self.mismatch_amplitude, true)?;
        check("mismatch phase", self.mismatch_phase_deg, false)?;
        if self.coupling_neighbors.iter().any(|&o| o == (0, 0)) {
            return Err(domain("an element cannot be its own coupling neighbour"));
        }
        Ok(())
    }
}

/// Reflection mismatch and mutual coupling of one RIS realisation.
///
/// A `-1` code is realised as `-B e^{jβ}` for the element; `+1` codes are
/// exact. `coupling` has a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpairmentModel {
    pub mismatch_amplitude: DVector<f64>,
    pub mismatch_phase: DVector<f64>,
    pub coupling: DMatrix<C64>,
}

impl ImpairmentModel {
    /// Ideal hardware for `elements` elements.
    pub fn identity(elements: usize) -> Self {
        Self {
            mismatch_amplitude: DVector::from_element(elements, 1.0),
            mismatch_phase: DVector::zeros(elements),
            coupling: DMatrix::identity(elements, elements),
        }
    }

    pub fn elements(&self) -> usize {
        self.mismatch_amplitude.len()
    }

    /// Realised coefficient of element `i` when its code is `-1`.
    pub fn mismatch_factor(&self, i: usize) -> C64 {
        -C64::from_polar(self.mismatch_amplitude[i], self.mismatch_phase[i])
    }

    /// The impaired reflection matrix `B ⊙ G`: 1 where the code is `+1`,
    /// `-B e^{jβ}` where it is `-1`.
    pub fn effective_reflection(&self, schedule: &CodeSchedule) -> Result<DMatrix<C64>> {
        if schedule.elements() != self.elements() {
            return Err(dimension(format!(
                "schedule has {} elements, impairments {}",
                schedule.elements(),
                self.elements()
            )));
        }
        let factors: Vec<C64> = (0..self.elements()).map(|i| self.mismatch_factor(i)).collect();
        let g = schedule.codes();
        Ok(DMatrix::from_fn(g.nrows(), g.ncols(), |p, i| {
            if g[(p, i)] > 0.0 {
                C64::new(1.0, 0.0)
            } else {
                factors[i]
            }
        }))
    }
}

fn uniform<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        // still consume a draw so streams line up across configurations
        let _: f64 = rng.random();
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Draws one impairment realisation.
///
/// Each element receives one coupling coefficient per configured neighbour
/// that exists on the grid, with amplitude uniform in the configured range
/// and phase uniform in `[0, 2π)`.
pub fn sample_impairments(geom: &RisGeometry, ranges: &ImpairmentRanges, seed: u64) -> Result<ImpairmentModel> {
    ranges.validate()?;
    let mn = geom.elements();
    let mut rng = seed::child_rng(seed, seed::stream::IMPAIRMENTS, 0);

    let mut amplitude = DVector::zeros(mn);
    let mut phase = DVector::zeros(mn);
    for i in 0..mn {
        amplitude[i] = uniform(&mut rng, ranges.mismatch_amplitude);
        phase[i] = uniform(&mut rng, ranges.mismatch_phase_deg).to_radians();
    }

    let mut coupling = DMatrix::<C64>::identity(mn, mn);
    for m in 0..geom.rows {
        for n in 0..geom.cols {
            for &(dm, dn) in &ranges.coupling_neighbors {
                let amp = uniform(&mut rng, ranges.coupling_amplitude);
                let ang = rng.random_range(0.0..2.0 * PI);
                let (mm, nn) = (m as isize + dm, n as isize + dn);
                if mm < 0 || nn < 0 || mm >= geom.rows as isize || nn >= geom.cols as isize {
                    continue;
                }
                let j = geom.flat_index(mm as usize, nn as usize);
                coupling[(geom.flat_index(m, n), j)] = C64::from_polar(amp, ang);
            }
        }
    }
    Ok(ImpairmentModel { mismatch_amplitude: amplitude, mismatch_phase: phase, coupling })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_ranges_give_identity_hardware() {
        let g = RisGeometry::square(4, 0.4).unwrap();
        let imp = sample_impairments(&g, &ImpairmentRanges::ideal(), 3).unwrap();
        let eye = DMatrix::<C64>::identity(16, 16);
        assert_eq!(imp.coupling.map(|z| z.norm()), eye.map(|z| z.norm()));
        for i in 0..16 {
            assert_eq!(imp.mismatch_factor(i), C64::new(-1.0, 0.0));
        }
    }

    #[test]
    fn default_ranges_respected() {
        let g = RisGeometry::square(16, 0.4).unwrap();
        let r = ImpairmentRanges::default();
        let imp = sample_impairments(&g, &r, 5).unwrap();
        for i in 0..256 {
            assert_eq!(imp.coupling[(i, i)], C64::new(1.0, 0.0));
            let b = imp.mismatch_amplitude[i];
            let beta = imp.mismatch_phase[i];
            assert!((0.5..=1.5).contains(&b));
            assert!(beta.abs() <= PI / 6.0 + 1e-12);
            for j in 0..256 {
                if i != j && imp.coupling[(i, j)].norm() > 0.0 {
                    let a = imp.coupling[(i, j)].norm();
                    assert!((0.1..=0.4 + 1e-12).contains(&a));
                }
            }
        }
    }

    #[test]
    fn interior_element_has_three_neighbours() {
        let g = RisGeometry::square(16, 0.4).unwrap();
        let imp = sample_impairments(&g, &ImpairmentRanges::default(), 9).unwrap();
        let row = g.flat_index(7, 7);
        let off: Vec<usize> = (0..256).filter(|&j| j != row && imp.coupling[(row, j)].norm() > 0.0).collect();
        assert_eq!(off, vec![g.flat_index(7, 8), g.flat_index(8, 7), g.flat_index(8, 8)]);
        // bottom-right corner has no right/down neighbours
        let corner = g.flat_index(15, 15);
        assert_eq!((0..256).filter(|&j| j != corner && imp.coupling[(corner, j)].norm() > 0.0).count(), 0);
        // last column keeps only the down neighbour
        let edge = g.flat_index(3, 15);
        assert_eq!((0..256).filter(|&j| j != edge && imp.coupling[(edge, j)].norm() > 0.0).count(), 1);
    }

    #[test]
    fn coupling_is_not_symmetric() {
        let g = RisGeometry::square(4, 0.4).unwrap();
        let imp = sample_impairments(&g, &ImpairmentRanges::default(), 1).unwrap();
        assert_ne!(imp.coupling, imp.coupling.transpose());
    }

    #[test]
    fn invalid_ranges_rejected() {
        let g = RisGeometry::square(4, 0.4).unwrap();
        let mut r = ImpairmentRanges::default();
        r.coupling_amplitude = [0.4, 0.1];
        assert!(sample_impairments(&g, &r, 1).is_err());
        let mut r = ImpairmentRanges::default();
        r.mismatch_amplitude = [-0.1, 1.0];
        assert!(sample_impairments(&g, &r, 1).is_err());
    }
}
