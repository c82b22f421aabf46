//! Orthogonal matching pursuit over a grid dictionary.

use nalgebra::{DMatrix, DVector};

use super::grid::Dictionary;
use crate::doa::least_squares;
use crate::error::{Error, Result};
use crate::model::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct OmpResult {
    /// Grid indices in selection order.
    pub support: Vec<usize>,
    pub angles_deg: Vec<(f64, f64)>,
    pub coefficients: Vec<C64>,
    pub residual_norm: f64,
}

/// `k` greedy selections of the column maximising `|dᴴ r| / ‖d‖`, each
/// followed by a least-squares refit on the selected set.
pub fn omp_estimate(z: &DVector<C64>, dict: &Dictionary, k: usize) -> Result<OmpResult> {
    if k == 0 {
        return Err(Error::Domain("OMP needs at least one atom".into()));
    }
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut residual = z.clone();
    let mut coefficients = DVector::zeros(0);
    for _ in 0..k {
        let scores = dict.correlate(&residual)?;
        let mut best: Option<usize> = None;
        for (i, &s) in scores.iter().enumerate() {
            if support.contains(&i) {
                continue;
            }
            if best.is_none_or(|b| s > scores[b]) {
                best = Some(i);
            }
        }
        let pick = best.ok_or_else(|| Error::Degenerate("dictionary exhausted".into()))?;
        support.push(pick);
        let cols: Vec<DVector<C64>> = support.iter().map(|&i| dict.atoms.column(i).into_owned()).collect();
        let sub = DMatrix::from_columns(&cols);
        coefficients = least_squares(&sub, z)?;
        residual = z - sub * &coefficients;
    }
    Ok(OmpResult {
        angles_deg: support.iter().map(|&i| dict.grid.point(i)).collect(),
        support,
        coefficients: coefficients.iter().copied().collect(),
        residual_norm: residual.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::grid::{grid_spectrum, AngleGrid};
    use crate::model::RisGeometry;

    #[test]
    fn single_column_is_found_first() {
        let geom = RisGeometry::square(4, 0.4).unwrap();
        let g = crate::model::build_code_schedule(24, 16, 8).unwrap().codes_complex();
        let dict = Dictionary::new(&g, &geom, &AngleGrid::uniform([20.0, 80.0], [-30.0, 30.0], 3.0).unwrap()).unwrap();
        let z = dict.atoms.column(40).into_owned() * C64::new(0.3, -1.2);
        let r = omp_estimate(&z, &dict, 1).unwrap();
        assert_eq!(r.support, vec![40]);
        assert!(r.residual_norm < 1e-10);
        assert_eq!(grid_spectrum(&z, &dict).unwrap().argmax(), 40);
    }

    #[test]
    fn orthogonal_dictionary_exact_support() {
        let grid = AngleGrid::uniform([40.0, 43.0], [0.0, 0.0], 1.0).unwrap();
        let atoms = DMatrix::<C64>::identity(4, 4);
        let dict = Dictionary { grid, norms: DVector::from_element(4, 1.0), atoms };
        let z = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -1.0)]);
        let mut s = omp_estimate(&z, &dict, 2).unwrap().support;
        s.sort();
        assert_eq!(s, vec![1, 3]);
    }
}
