//! Alternating-direction splitting for the two atomic-norm SDPs.
//!
//! Both programs share one shape: a Hermitian matrix
//! `W = [[T_a, x], [xᴴ, T_b]]` whose diagonal blocks carry Toeplitz structure
//! must be PSD, and the trace of the diagonal blocks is minimised. The
//! splitting keeps `W` structured and a copy `Z` in the PSD cone, with the
//! consensus `W = Z` enforced through a scaled dual `Λ`:
//!
//! * structure step: exact projections of `Z - Λ/ρ` onto the Toeplitz sets,
//!   shifted by the trace weight, and a closed-form least-squares step for `x`;
//! * cone step: `Z = Π_psd(W + Λ/ρ)`;
//! * dual step: `Λ += ρ (W - Z)`.
//!
//! In noise-ball mode a residual variable `r` with `‖r‖ ≤ √P_n` is split off
//! and coupled through `G x + r = z`, with its own dual `μ`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::projections::{project_block_toeplitz, project_psd, project_toeplitz_hermitian};
use crate::error::{dimension, Error, Result};
use crate::linalg::hermitian_eigen;
use crate::model::{RisGeometry, C64};

/// Data-fit treatment for observed measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    /// `½‖z − G x‖² + (α/2)·(trace terms)`.
    Regularized { alpha: f64 },
    /// trace terms subject to `‖z − G x‖₂ ≤ √noise_power`, where
    /// `noise_power` is the total noise energy over all samples.
    NoiseBall { noise_power: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rho: f64,
    pub max_iterations: usize,
    pub primal_tolerance: f64,
    pub dual_tolerance: f64,
    pub mode: Mode,
    /// Residual balancing of `ρ`.
    pub adaptive_rho: bool,
    /// Largest `M·N` accepted by the full (non-decoupled) program.
    pub full_size_cap: usize,
    /// Return the last iterate instead of an error when out of iterations.
    pub accept_unconverged: bool,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iterations: 50_000,
            primal_tolerance: 1e-6,
            dual_tolerance: 1e-6,
            mode: Mode::NoiseBall { noise_power: 0.0 },
            adaptive_rho: true,
            full_size_cap: 64,
            accept_unconverged: false,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.primal_tolerance = tol;
        self.dual_tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be positive");
        }
        if !(self.primal_tolerance > 0.0 && self.dual_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        match self.mode {
            Mode::Regularized { alpha } if !(alpha >= 0.0 && alpha.is_finite()) => bad("alpha must be non-negative"),
            Mode::NoiseBall { noise_power } if !(noise_power >= 0.0 && noise_power.is_finite()) => {
                bad("noise power must be non-negative")
            }
            _ => Ok(()),
        }
    }
}

/// Regularisation weight `σ·√(MN·ln MN)` for a per-sample noise variance
/// `σ²`.
pub fn alpha_for_noise(noise_variance: f64, elements: usize) -> f64 {
    let n = elements as f64;
    noise_variance.max(0.0).sqrt() * (n * n.ln()).sqrt()
}

/// Solver diagnostics for one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub rho: f64,
    pub converged: bool,
    pub seconds: f64,
    /// `(iteration, primal, dual, rho)` per iteration when recorded.
    pub trace: Vec<(usize, f64, f64, f64)>,
}

impl Diagnostics {
    /// Writes the residual trace as `iteration,primal,dual,rho`.
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "primal", "dual", "rho"])?;
        for (it, p, d, r) in &self.trace {
            w.write_record([it.to_string(), p.to_string(), d.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution<V> {
    pub vars: V,
    pub diagnostics: Diagnostics,
}

/// Measurement matrix `G` with a cached eigen-decomposition of `GᴴG`, so the
/// least-squares step `(GᴴG + c I)⁻¹ b` costs two matrix-vector products for
/// any shift `c`.
#[derive(Debug, Clone)]
pub struct Measurement {
    g: DMatrix<C64>,
    gram_values: DVector<f64>,
    gram_vectors: DMatrix<C64>,
}

impl Measurement {
    pub fn new(g: DMatrix<C64>) -> Result<Self> {
        let gram = g.adjoint() * &g;
        let (gram_values, gram_vectors) = hermitian_eigen(&gram)?;
        Ok(Self { g, gram_values, gram_vectors })
    }

    pub fn from_codes(codes: &DMatrix<f64>) -> Result<Self> {
        Self::new(codes.map(|v| C64::new(v, 0.0)))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.g
    }

    pub fn samples(&self) -> usize {
        self.g.nrows()
    }

    pub fn elements(&self) -> usize {
        self.g.ncols()
    }

    /// The exact constraint `G x = z` rewritten with orthonormal rows:
    /// `Vᴴ x = Σ⁻¹ Uᴴ z` for `G = U Σ Vᴴ`. Same feasible set, but the
    /// least-squares step no longer sees the spread of `G`'s singular values.
    /// With `GᴴG = V Λ Vᴴ`, `Σ⁻¹ Uᴴ z = Λ⁻¹ Vᴴ Gᴴ z`.
    fn whitened(&self, z: &DVector<C64>) -> (Measurement, DVector<C64>) {
        let top = self.gram_values.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..self.gram_values.len()).filter(|&i| self.gram_values[i] > 1e-10 * top).collect();
        let vr = self.gram_vectors.select_columns(&keep);
        let coeff = vr.adjoint() * (self.g.adjoint() * z);
        let z_white = DVector::from_iterator(keep.len(), keep.iter().zip(coeff.iter()).map(|(&i, &c)| c / self.gram_values[i]));
        let gram_values = DVector::from_iterator(self.gram_values.len(), (0..self.gram_values.len()).map(|i| if keep.contains(&i) { 1.0 } else { 0.0 }));
        (Measurement { g: vr.adjoint(), gram_values, gram_vectors: self.gram_vectors.clone() }, z_white)
    }

    fn solve_shifted(&self, rhs: &DVector<C64>, shift: f64) -> DVector<C64> {
        let mut coeff = self.gram_vectors.adjoint() * rhs;
        for (c, &s) in coeff.iter_mut().zip(self.gram_values.iter()) {
            *c /= s.max(0.0) + shift;
        }
        &self.gram_vectors * coeff
    }
}

/// Variables of the decoupled program: `[[T_x, X], [Xᴴ, T_y]] ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledSdpVars {
    /// `M x M` Hermitian Toeplitz (row axis).
    pub tx: DMatrix<C64>,
    /// `N x N` Hermitian Toeplitz (column axis, conjugated frequencies).
    pub ty: DMatrix<C64>,
    /// `M x N` signal matrix; its row-major vectorisation is the
    /// element-domain signal.
    pub x: DMatrix<C64>,
}

impl DecoupledSdpVars {
    pub fn objective(&self) -> f64 {
        0.5 * (self.tx.trace().re + self.ty.trace().re)
    }

    pub fn bordered(&self) -> DMatrix<C64> {
        let (m, n) = (self.tx.nrows(), self.ty.nrows());
        let mut w = DMatrix::zeros(m + n, m + n);
        w.view_mut((0, 0), (m, m)).copy_from(&self.tx);
        w.view_mut((m, m), (n, n)).copy_from(&self.ty);
        w.view_mut((0, m), (m, n)).copy_from(&self.x);
        w.view_mut((m, 0), (n, m)).copy_from(&self.x.adjoint());
        w
    }

    /// `vec{X}` in row-major order.
    pub fn signal(&self) -> DVector<C64> {
        row_major_vec(&self.x)
    }
}

/// Variables of the full program: `[[T, x], [xᴴ, t]] ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSdpVars {
    /// `MN x MN` two-level Hermitian Toeplitz.
    pub t: DMatrix<C64>,
    pub t_scalar: f64,
    pub x: DVector<C64>,
}

impl FullSdpVars {
    pub fn objective(&self) -> f64 {
        0.5 * (self.t.trace().re + self.t_scalar)
    }

    pub fn bordered(&self) -> DMatrix<C64> {
        let n = self.t.nrows();
        let mut w = DMatrix::zeros(n + 1, n + 1);
        w.view_mut((0, 0), (n, n)).copy_from(&self.t);
        w.view_mut((0, n), (n, 1)).copy_from(&self.x);
        w.view_mut((n, 0), (1, n)).copy_from(&self.x.adjoint());
        w[(n, n)] = C64::new(self.t_scalar, 0.0);
        w
    }
}

pub(crate) fn row_major_vec(x: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_iterator(x.len(), x.transpose().iter().copied())
}

pub(crate) fn row_major_unvec(v: &DVector<C64>, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, v.as_slice())
}

#[derive(Debug, Clone, Copy)]
enum Layout {
    Decoupled { rows: usize, cols: usize },
    Full { rows: usize, cols: usize },
}

impl Layout {
    fn dim(self) -> usize {
        match self {
            Layout::Decoupled { rows, cols } => rows + cols,
            Layout::Full { rows, cols } => rows * cols + 1,
        }
    }

    /// Row-major `x` from the off-diagonal block of a bordered matrix.
    fn offdiag(self, v: &DMatrix<C64>) -> DVector<C64> {
        match self {
            Layout::Decoupled { rows, cols } => row_major_vec(&v.view((0, rows), (rows, cols)).into_owned()),
            Layout::Full { rows, cols } => v.view((0, rows * cols), (rows * cols, 1)).column(0).into_owned(),
        }
    }
}

/// Structured iterate on the `W` side.
struct Structured {
    a: DMatrix<C64>,
    b: DMatrix<C64>,
    x: DVector<C64>,
}

impl Structured {
    fn assemble(&self, layout: Layout) -> DMatrix<C64> {
        let n = layout.dim();
        let ma = self.a.nrows();
        let mut w = DMatrix::zeros(n, n);
        w.view_mut((0, 0), (ma, ma)).copy_from(&self.a);
        w.view_mut((ma, ma), (n - ma, n - ma)).copy_from(&self.b);
        let xm = match layout {
            Layout::Decoupled { rows, cols } => row_major_unvec(&self.x, rows, cols),
            Layout::Full { .. } => DMatrix::from_column_slice(self.x.len(), 1, self.x.as_slice()),
        };
        w.view_mut((0, ma), (xm.nrows(), xm.ncols())).copy_from(&xm);
        w.view_mut((ma, 0), (xm.ncols(), xm.nrows())).copy_from(&xm.adjoint());
        w
    }
}

enum Data<'a> {
    Target(&'a DVector<C64>),
    Observed { op: &'a Measurement, z: &'a DVector<C64>, mode: Mode },
}

fn structure_step(layout: Layout, v: &DMatrix<C64>, shift: f64) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = layout.dim();
    match layout {
        Layout::Decoupled { rows, cols } => {
            let mut tx = project_toeplitz_hermitian(&v.view((0, 0), (rows, rows)).into_owned());
            let mut ty = project_toeplitz_hermitian(&v.view((rows, rows), (cols, cols)).into_owned());
            for i in 0..rows {
                tx[(i, i)] -= shift;
            }
            for i in 0..cols {
                ty[(i, i)] -= shift;
            }
            Ok((tx, ty))
        }
        Layout::Full { rows, cols } => {
            let mn = rows * cols;
            let mut t = project_block_toeplitz(&v.view((0, 0), (mn, mn)).into_owned(), rows, cols)?;
            for i in 0..mn {
                t[(i, i)] -= shift;
            }
            let s = DMatrix::from_element(1, 1, C64::new(v[(n - 1, n - 1)].re - shift, 0.0));
            Ok((t, s))
        }
    }
}

fn project_ball(v: DVector<C64>, radius: f64) -> DVector<C64> {
    let norm = v.norm();
    if norm <= radius {
        v
    } else if radius == 0.0 {
        DVector::zeros(v.len())
    } else {
        v * C64::new(radius / norm, 0.0)
    }
}

fn run(layout: Layout, data: Data<'_>, config: &SolverConfig) -> Result<(Structured, Diagnostics)> {
    config.validate()?;
    let started = Instant::now();
    let n = layout.dim();

    let trace_weight = match &data {
        Data::Observed { mode: Mode::Regularized { alpha }, .. } => 0.5 * alpha,
        _ => 0.5,
    };
    // cached right-hand side pieces
    let (ghz, radius) = match &data {
        Data::Observed { op, z, mode } => {
            let ghz = op.g.adjoint() * *z;
            let radius = match mode {
                Mode::NoiseBall { noise_power } => Some(noise_power.sqrt()),
                Mode::Regularized { .. } => None,
            };
            (Some(ghz), radius)
        }
        Data::Target(_) => (None, None),
    };

    let mut rho = config.rho;
    let mut zmat = DMatrix::<C64>::zeros(n, n);
    let mut lam = DMatrix::<C64>::zeros(n, n);
    // residual split and its dual (noise-ball mode only)
    let p = match &data {
        Data::Observed { op, .. } => op.samples(),
        Data::Target(_) => 0,
    };
    let mut r = DVector::<C64>::zeros(p);
    let mut mu = DVector::<C64>::zeros(p);

    let mut diag = Diagnostics { rho, ..Default::default() };
    let mut current: Option<Structured> = None;

    for it in 1..=config.max_iterations {
        let inv_rho = C64::new(1.0 / rho, 0.0);
        let v = &zmat - &lam * inv_rho;
        let (a, b) = structure_step(layout, &v, trace_weight / rho)?;
        let v12 = layout.offdiag(&v);
        let x = match &data {
            Data::Target(x0) => (*x0).clone(),
            Data::Observed { op, z, .. } => match radius {
                None => {
                    let rhs = ghz.as_ref().expect("observed data") + &v12 * C64::new(2.0 * rho, 0.0);
                    op.solve_shifted(&rhs, 2.0 * rho)
                }
                Some(_) => {
                    let target = *z - &r - &mu * inv_rho;
                    let rhs = op.g.adjoint() * target + &v12 * C64::new(2.0, 0.0);
                    op.solve_shifted(&rhs, 2.0)
                }
            },
        };
        let s = Structured { a, b, x };
        let w = s.assemble(layout);

        let z_prev = std::mem::replace(&mut zmat, project_psd(&(&w + &lam * inv_rho))?);
        lam += (&w - &zmat) * C64::new(rho, 0.0);

        let mut primal_sq = (&w - &zmat).norm_squared();
        let mut dual_sq = (&zmat - &z_prev).norm_squared();
        let mut data_scale = 0.0;
        if let (Some(rad), Data::Observed { op, z, .. }) = (radius, &data) {
            let gx = &op.g * &s.x;
            let r_prev = std::mem::replace(&mut r, project_ball(*z - &gx - &mu * inv_rho, rad));
            let coupling = &gx + &r - *z;
            mu += &coupling * C64::new(rho, 0.0);
            primal_sq += coupling.norm_squared();
            dual_sq += (op.g.adjoint() * (&r - &r_prev)).norm_squared();
            data_scale = z.norm();
        }
        let primal = primal_sq.sqrt();
        let dual = rho * dual_sq.sqrt();
        let eps_primal = config.primal_tolerance * w.norm().max(zmat.norm()).max(data_scale).max(1e-12);
        let eps_dual = config.dual_tolerance * (lam.norm() + mu.norm()).max(1e-12);

        diag.iterations = it;
        diag.primal_residual = primal;
        diag.dual_residual = dual;
        if config.record_trace {
            diag.trace.push((it, primal, dual, rho));
        }
        current = Some(s);
        if primal <= eps_primal && dual <= eps_dual {
            diag.converged = true;
            break;
        }
        if config.adaptive_rho && it % 10 == 0 {
            let (np, nd) = (primal / eps_primal, dual / eps_dual);
            if np > 10.0 * nd {
                rho *= 2.0;
            } else if nd > 10.0 * np {
                rho /= 2.0;
            }
        }
        diag.rho = rho;
    }
    diag.seconds = started.elapsed().as_secs_f64();
    if !diag.converged && !config.accept_unconverged {
        return Err(Error::NoConvergence {
            iterations: diag.iterations,
            primal: diag.primal_residual,
            dual: diag.dual_residual,
        });
    }
    Ok((current.expect("at least one iteration"), diag))
}

fn check_observation(op: &Measurement, z: &DVector<C64>, geom: &RisGeometry) -> Result<()> {
    if op.elements() != geom.elements() {
        return Err(dimension(format!("G has {} columns, geometry {} elements", op.elements(), geom.elements())));
    }
    if z.len() != op.samples() {
        return Err(dimension(format!("z has {} samples, G {} rows", z.len(), op.samples())));
    }
    Ok(())
}

/// Zero-radius noise ball: swap in the orthonormal form of the constraint.
fn exact_form(op: &Measurement, z: &DVector<C64>, mode: Mode) -> Option<(Measurement, DVector<C64>)> {
    matches!(mode, Mode::NoiseBall { noise_power } if noise_power == 0.0).then(|| op.whitened(z))
}

/// Decoupled atomic-norm denoising of `z ≈ G vec{X}`.
pub fn solve_danm(
    z: &DVector<C64>,
    g: &DMatrix<C64>,
    geom: &RisGeometry,
    config: &SolverConfig,
) -> Result<Solution<DecoupledSdpVars>> {
    solve_danm_with(&Measurement::new(g.clone())?, z, geom, config)
}

/// [`solve_danm`] with a prepared measurement operator.
pub fn solve_danm_with(
    op: &Measurement,
    z: &DVector<C64>,
    geom: &RisGeometry,
    config: &SolverConfig,
) -> Result<Solution<DecoupledSdpVars>> {
    check_observation(op, z, geom)?;
    let layout = Layout::Decoupled { rows: geom.rows, cols: geom.cols };
    let exact = exact_form(op, z, config.mode);
    let (op, z) = exact.as_ref().map_or((op, z), |(o, w)| (o, w));
    let (s, diagnostics) = run(layout, Data::Observed { op, z, mode: config.mode }, config)?;
    let vars = DecoupledSdpVars { tx: s.a, ty: s.b, x: row_major_unvec(&s.x, geom.rows, geom.cols) };
    Ok(Solution { vars, diagnostics })
}

/// The decoupled program with `X` fixed: `½(tr T_x + tr T_y)` at the optimum
/// is the decoupled atomic norm of `X`.
pub fn decoupled_atomic_norm(x: &DMatrix<C64>, config: &SolverConfig) -> Result<Solution<DecoupledSdpVars>> {
    let (rows, cols) = x.shape();
    let target = row_major_vec(x);
    let (s, diagnostics) = run(Layout::Decoupled { rows, cols }, Data::Target(&target), config)?;
    let vars = DecoupledSdpVars { tx: s.a, ty: s.b, x: x.clone() };
    Ok(Solution { vars, diagnostics })
}

/// What the full program is asked to explain.
#[derive(Debug, Clone, Copy)]
pub enum FullAnmInput<'a> {
    /// Atomic norm of a known element-domain vector.
    Target(&'a DVector<C64>),
    /// Denoising of observations `z ≈ G x`.
    Observed { z: &'a DVector<C64>, op: &'a Measurement },
}

/// The full `(MN+1)`-sized atomic-norm program.
pub fn solve_full_anm(input: FullAnmInput<'_>, geom: &RisGeometry, config: &SolverConfig) -> Result<Solution<FullSdpVars>> {
    let mn = geom.elements();
    if mn > config.full_size_cap {
        return Err(Error::Config(format!(
            "full ANM limited to {} elements, geometry has {mn}",
            config.full_size_cap
        )));
    }
    let layout = Layout::Full { rows: geom.rows, cols: geom.cols };
    let exact;
    let data = match input {
        FullAnmInput::Target(x) => {
            if x.len() != mn {
                return Err(dimension(format!("target has {} entries, geometry {mn}", x.len())));
            }
            Data::Target(x)
        }
        FullAnmInput::Observed { z, op } => {
            check_observation(op, z, geom)?;
            exact = exact_form(op, z, config.mode);
            let (op, z) = exact.as_ref().map_or((op, z), |(o, w)| (o, w));
            Data::Observed { op, z, mode: config.mode }
        }
    };
    let (s, diagnostics) = run(layout, data, config)?;
    let vars = FullSdpVars { t: s.a, t_scalar: s.b[(0, 0)].re, x: s.x };
    Ok(Solution { vars, diagnostics })
}

/// `½(tr T + t)` at the optimum of the full program for a fixed `x`.
pub fn atomic_norm(x: &DVector<C64>, geom: &RisGeometry, config: &SolverConfig) -> Result<f64> {
    Ok(solve_full_anm(FullAnmInput::Target(x), geom, config)?.vars.objective())
}
