//! Paired elevation/azimuth estimates from the solved Toeplitz blocks.

mod rooting;

pub(crate) use rooting::least_squares;

pub use rooting::{estimate_order, toeplitz_to_freqs};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::anm::DecoupledSdpVars;
use crate::error::{Error, Result};
use crate::linalg::max_weight_assignment;
use crate::model::{axis_vector, RisGeometry, C64};

/// Below this `sinθ` the azimuth is undefined.
const POLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimates {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoaEstimate {
    pub elevations_deg: Vec<f64>,
    pub azimuths_deg: Vec<f64>,
    /// `score[(i, j)]` for row frequency `i` against column frequency `j`.
    pub pairing_scores: Vec<Vec<f64>>,
    pub frequencies: FrequencyEstimates,
    /// Least-squares amplitude of each pair in the rebuild of `X`.
    pub amplitudes: Vec<C64>,
    /// `‖X - Σ c_k a_r a_cᵀ‖_F`.
    pub residual: f64,
}

impl DoaEstimate {
    pub fn count(&self) -> usize {
        self.elevations_deg.len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.elevations_deg.iter().copied().zip(self.azimuths_deg.iter().copied())
    }
}

/// Matches row and column frequencies by maximising
/// `Σ |a_r(f_r[i])ᴴ X conj(a_c(f_c[j]))|`. Returns `(i, j)` index pairs sorted
/// by `i`, and the score matrix.
///
/// `X` holds `Σ s_k a_r a_cᵀ`, so the conjugated column vector is the matched
/// filter for the column axis.
pub fn pair_frequencies(
    row: &[f64],
    col: &[f64],
    x: &DMatrix<C64>,
    geom: &RisGeometry,
) -> Result<(Vec<(usize, usize)>, DMatrix<f64>)> {
    if row.len() != col.len() {
        return Err(Error::Dimension(format!("{} row vs {} column frequencies", row.len(), col.len())));
    }
    if x.shape() != (geom.rows, geom.cols) {
        return Err(Error::Dimension(format!("X is {:?}, geometry {}x{}", x.shape(), geom.rows, geom.cols)));
    }
    let k = row.len();
    let ar: Vec<DVector<C64>> = row.iter().map(|&f| axis_vector(geom.rows, geom.row_spacing, f)).collect();
    let ac: Vec<DVector<C64>> = col.iter().map(|&f| axis_vector(geom.cols, geom.col_spacing, f).conjugate()).collect();
    let score = DMatrix::from_fn(k, k, |i, j| (ar[i].adjoint() * x * &ac[j])[(0, 0)].norm());
    let perm = max_weight_assignment(&score);
    Ok((perm.into_iter().enumerate().collect(), score))
}

/// `(θ, φ)` in degrees from a paired `(cosθ, sinθ sinφ)`.
pub fn freqs_to_angles(row_freq: f64, col_freq: f64) -> Result<(f64, f64)> {
    if !(-1.0..=1.0).contains(&row_freq) || !col_freq.is_finite() {
        return Err(Error::Domain(format!("row frequency {row_freq} outside [-1, 1]")));
    }
    let theta = row_freq.acos();
    let s = theta.sin();
    if s < POLE_TOL {
        return Err(Error::Degenerate(format!("elevation {:.4}° is at the pole", theta.to_degrees())));
    }
    let phi = (col_freq / s).clamp(-1.0, 1.0).asin();
    Ok((theta.to_degrees(), phi.to_degrees()))
}

/// Least-squares fit of `vec{X}` on the atoms of the given frequency pairs;
/// returns the amplitudes and the residual norm.
fn fit_pairs(pairs: &[(f64, f64)], target: &DVector<C64>, geom: &RisGeometry) -> Option<(Vec<C64>, f64)> {
    let atoms: Vec<DVector<C64>> = pairs
        .iter()
        .map(|&(fr, fc)| {
            let outer = axis_vector(geom.rows, geom.row_spacing, fr) * axis_vector(geom.cols, geom.col_spacing, fc).transpose();
            crate::anm::row_major_vec(&outer)
        })
        .collect();
    let basis = DMatrix::from_columns(&atoms);
    let c = least_squares(&basis, target).ok()?;
    let r = (target - &basis * &c).norm();
    Some((c.iter().copied().collect(), r))
}

/// Index sets of `k` distinct cells of a `k x k` grid, in lexicographic order.
fn cell_subsets(k: usize) -> Vec<Vec<(usize, usize)>> {
    use itertools::Itertools;
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    cells.into_iter().combinations(k).collect()
}

/// Rooting of both Toeplitz blocks, pairing through `X`, angle mapping, and
/// the rebuild residual. Pairs are sorted by elevation.
///
/// Two sources closer than the axis resolution share one frequency on that
/// axis, and rooting then returns a spurious second root. The one-to-one
/// assignment is therefore checked against every set of `k` frequency
/// combinations that may reuse a row or column frequency; a set replaces the
/// assignment only when it rebuilds `X` with a strictly smaller residual and
/// maps to valid angles.
pub fn estimate_doa(vars: &DecoupledSdpVars, geom: &RisGeometry, k: usize) -> Result<DoaEstimate> {
    let row = toeplitz_to_freqs(&vars.tx, k, geom.row_spacing)?;
    // T_y is built from conjugated column atoms, so its roots carry -f_c.
    let col: Vec<f64> = toeplitz_to_freqs(&vars.ty, k, geom.col_spacing)?.into_iter().map(|f| -f).collect();
    let (assigned, score) = pair_frequencies(&row, &col, &vars.x, geom)?;
    let target = vars.signal();

    let freq_pairs = |cells: &[(usize, usize)]| -> Vec<(f64, f64)> { cells.iter().map(|&(i, j)| (row[i], col[j])).collect() };
    let valid = |cells: &[(usize, usize)]| cells.iter().all(|&(i, j)| freqs_to_angles(row[i], col[j]).is_ok());

    let mut best: Option<(Vec<(usize, usize)>, Vec<C64>, f64)> = None;
    if valid(&assigned) {
        if let Some((c, r)) = fit_pairs(&freq_pairs(&assigned), &target, geom) {
            best = Some((assigned.clone(), c, r));
        }
    }
    for cells in cell_subsets(k) {
        if cells == assigned || !valid(&cells) {
            continue;
        }
        if let Some((c, r)) = fit_pairs(&freq_pairs(&cells), &target, geom) {
            if best.as_ref().is_none_or(|b| r < b.2) {
                best = Some((cells, c, r));
            }
        }
    }
    let (cells, amplitudes, residual) = match best {
        Some(b) => b,
        None => {
            // nothing fits: report the assignment, which fails in the angle map
            for &(i, j) in &assigned {
                freqs_to_angles(row[i], col[j])?;
            }
            (assigned.clone(), vec![C64::new(0.0, 0.0); k], target.norm())
        }
    };

    let mut found: Vec<(f64, f64, C64)> = Vec::with_capacity(k);
    for (&(i, j), &amp) in cells.iter().zip(&amplitudes) {
        let (theta, phi) = freqs_to_angles(row[i], col[j])?;
        found.push((theta, phi, amp));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    Ok(DoaEstimate {
        elevations_deg: found.iter().map(|f| f.0).collect(),
        azimuths_deg: found.iter().map(|f| f.1).collect(),
        pairing_scores: score.row_iter().map(|r| r.iter().copied().collect()).collect(),
        frequencies: FrequencyEstimates { row, col },
        amplitudes: found.iter().map(|f| f.2).collect(),
        residual,
    })
}

/// Writes `trial,k,theta_deg,phi_deg,residual` rows.
pub fn write_estimates_csv<W: std::io::Write>(out: W, rows: &[(usize, DoaEstimate)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "k", "theta_deg", "phi_deg", "residual"])?;
    for (trial, est) in rows {
        for (k, (theta, phi)) in est.pairs().enumerate() {
            w.write_record([trial.to_string(), k.to_string(), theta.to_string(), phi.to_string(), est.residual.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{frequencies, steering_outer};

    #[test]
    fn broadside_and_known_direction() {
        assert_eq!(freqs_to_angles(0.0, 0.0).unwrap(), (90.0, 0.0));
        let (t, p) = freqs_to_angles(0.5, 0.4330127018922193).unwrap();
        assert!((t - 60.0).abs() < 1e-9 && (p - 30.0).abs() < 1e-9);
        let s = 60f64.to_radians().sin();
        assert!((freqs_to_angles(0.5, s).unwrap().1 - 90.0).abs() < 1e-6);
        assert!(matches!(freqs_to_angles(1.0, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pairing_recovers_construction() {
        let geom = RisGeometry::square(6, 0.4).unwrap();
        let dirs = [(40.0, -20.0), (70.0, 25.0)];
        let mut x = DMatrix::zeros(6, 6);
        for &(t, p) in &dirs {
            x += steering_outer(&geom, t, p).unwrap();
        }
        let fr: Vec<f64> = dirs.iter().map(|&(t, p)| frequencies(t, p).0).collect();
        let mut fc: Vec<f64> = dirs.iter().map(|&(t, p)| frequencies(t, p).1).collect();
        let (pairs, _) = pair_frequencies(&fr, &fc, &x, &geom).unwrap();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        fc.swap(0, 1);
        let (pairs, _) = pair_frequencies(&fr, &fc, &x, &geom).unwrap();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }
}
