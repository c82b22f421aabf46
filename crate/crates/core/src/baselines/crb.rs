//! Numerical Cramér–Rao bound from the Gaussian Fisher information.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{steering_vector, CodeSchedule, RisGeometry, SourceSet, C64};

/// Derivatives of the steering vector with respect to elevation and azimuth
/// (radians).
pub fn steering_derivatives(geom: &RisGeometry, elevation_deg: f64, azimuth_deg: f64) -> Result<(DVector<C64>, DVector<C64>)> {
    let a = steering_vector(geom, elevation_deg, azimuth_deg)?;
    let (t, p) = (elevation_deg.to_radians(), azimuth_deg.to_radians());
    let mut dt = a.clone();
    let mut dp = a;
    for m in 0..geom.rows {
        for n in 0..geom.cols {
            let i = geom.flat_index(m, n);
            let (m, n) = (m as f64, n as f64);
            let gt = -2.0 * PI * (n * geom.col_spacing * t.cos() * p.sin() - m * geom.row_spacing * t.sin());
            let gp = -2.0 * PI * n * geom.col_spacing * t.sin() * p.cos();
            dt[i] *= C64::new(0.0, gt);
            dp[i] *= C64::new(0.0, gp);
        }
    }
    Ok((dt, dp))
}

/// Columns `∂μ/∂p` for `p = (θ_k, φ_k, Re s_k, Im s_k)` per source, with
/// `μ = G A s`.
pub fn mean_jacobian(geom: &RisGeometry, schedule: &CodeSchedule, sources: &SourceSet) -> Result<DMatrix<C64>> {
    let g = schedule.codes_complex();
    let mut cols = Vec::with_capacity(4 * sources.count());
    for (k, (el, az)) in sources.directions().enumerate() {
        let s = sources.amplitudes[k];
        let a = steering_vector(geom, el, az)?;
        let (dt, dp) = steering_derivatives(geom, el, az)?;
        let ga = &g * a;
        cols.push(&g * dt * s);
        cols.push(&g * dp * s);
        cols.push(ga.clone());
        cols.push(ga * C64::new(0.0, 1.0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// `√((1/2K) Σ_k (CRB(θ_k) + CRB(φ_k)))` in degrees for per-sample noise
/// variance `noise_power`.
pub fn crb_numeric(geom: &RisGeometry, schedule: &CodeSchedule, sources: &SourceSet, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::Domain(format!("noise power {noise_power} must be positive")));
    }
    let j = mean_jacobian(geom, schedule, sources)?;
    let fim = (j.ad_mul(&j)).map(|v| 2.0 * v.re / noise_power);
    let scale = fim.diagonal().map(|d| 1.0 / d.sqrt());
    if scale.iter().any(|s| !s.is_finite()) {
        return Err(Error::Degenerate("parameter without information".into()));
    }
    // equilibrate before inverting
    let eq = DMatrix::from_fn(fim.nrows(), fim.ncols(), |r, c| fim[(r, c)] * scale[r] * scale[c]);
    let chol = eq.cholesky().ok_or_else(|| Error::Degenerate("singular Fisher information".into()))?;
    let inv = chol.inverse();
    if inv.diagonal().iter().any(|d| !(d.is_finite() && *d > 0.0)) || inv.diagonal().max() > 1e12 {
        return Err(Error::Degenerate("ill-conditioned Fisher information".into()));
    }
    let k = sources.count();
    let total: f64 = (0..k).map(|q| inv[(4 * q, 4 * q)] * scale[4 * q].powi(2) + inv[(4 * q + 1, 4 * q + 1)] * scale[4 * q + 1].powi(2)).sum();
    Ok((total / (2 * k) as f64).sqrt().to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_code_schedule;

    #[test]
    fn derivatives_match_finite_differences() {
        let geom = RisGeometry::square(4, 0.4).unwrap();
        let (el, az) = (55.0, -12.0);
        let (dt, dp) = steering_derivatives(&geom, el, az).unwrap();
        let h = 1e-6f64;
        let hd = h.to_degrees();
        let fd_t = (steering_vector(&geom, el + hd, az).unwrap() - steering_vector(&geom, el - hd, az).unwrap()) / C64::new(2.0 * h, 0.0);
        let fd_p = (steering_vector(&geom, el, az + hd).unwrap() - steering_vector(&geom, el, az - hd).unwrap()) / C64::new(2.0 * h, 0.0);
        assert!((&fd_t - &dt).norm() / dt.norm() < 1e-6);
        assert!((&fd_p - &dp).norm() / dp.norm() < 1e-6);
    }

    #[test]
    fn doubling_noise_scales_by_sqrt2() {
        let geom = RisGeometry::square(4, 0.4).unwrap();
        let sched = build_code_schedule(32, 16, 2).unwrap();
        let src = SourceSet::unit(vec![40.0, 70.0], vec![-20.0, 15.0]).unwrap();
        let a = crb_numeric(&geom, &sched, &src, 0.1).unwrap();
        let b = crb_numeric(&geom, &sched, &src, 0.2).unwrap();
        assert!((b / a - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn coincident_sources_are_singular() {
        let geom = RisGeometry::square(4, 0.4).unwrap();
        let sched = build_code_schedule(32, 16, 2).unwrap();
        let src = SourceSet::unit(vec![40.0, 40.0], vec![10.0, 10.0]).unwrap();
        assert!(matches!(crb_numeric(&geom, &sched, &src, 0.1), Err(Error::Degenerate(_))));
    }
}
