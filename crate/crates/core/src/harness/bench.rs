//! Monte-Carlo benchmark over methods and SNRs.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{ExperimentPlan, Method};
use crate::anm::{solve_danm_with, solve_full_anm, DecoupledSdpVars, FullAnmInput, FullSdpVars, Measurement};
use crate::baselines::{crb_numeric, grid_spectrum, matched_squared_error, omp_estimate, AngleGrid, Dictionary, TrialResult};
use crate::doa::estimate_doa;
use crate::error::{Error, Result};
use crate::model::{
    sample_impairments, synthesize_ideal, synthesize_impaired, CodeSchedule, Noise, RisGeometry, SourceSet, C64,
};
use crate::nn::Reconstructor;
use crate::seed::{self, stream};

/// A trained network and its held-out per-sample residual variance.
#[derive(Debug, Clone)]
pub struct DenoiseModel {
    pub reconstructor: Reconstructor,
    pub residual_variance: f64,
}

/// Everything shared by the trials of one plan.
pub struct BenchContext {
    pub geometry: RisGeometry,
    pub schedule: CodeSchedule,
    pub operator: Measurement,
    pub dictionary: Dictionary,
    pub model: Option<DenoiseModel>,
}

impl BenchContext {
    pub fn new(plan: &ExperimentPlan, model: Option<DenoiseModel>) -> Result<Self> {
        plan.validate()?;
        let geometry = plan.scenario.geometry()?;
        let schedule = plan.scenario.schedule()?;
        if plan.needs_model() {
            let m = model.as_ref().ok_or_else(|| Error::Config("plan has denoise methods but no trained model".into()))?;
            if m.reconstructor.params.input_width() != 2 * schedule.samples() {
                return Err(Error::Config(format!(
                    "model expects {} samples, scenario has {}",
                    m.reconstructor.params.input_width() / 2,
                    schedule.samples()
                )));
            }
        }
        let operator = Measurement::from_codes(schedule.codes())?;
        let src = &plan.scenario.sources;
        let grid = AngleGrid::uniform(src.elevation_range_deg, src.azimuth_range_deg, plan.grid_step_deg)?;
        let dictionary = Dictionary::new(operator.matrix(), &geometry, &grid)?;
        Ok(Self { geometry, schedule, operator, dictionary, model })
    }
}

/// One synthesized trial input.
#[derive(Debug, Clone)]
pub struct TrialInput {
    pub sources: SourceSet,
    pub samples: DVector<C64>,
    pub noise_power: f64,
}

/// Sources, impairments and noise for trial `trial`; the SNR only scales the
/// noise, so every SNR and every impairment range sees the same draws.
pub fn trial_input(plan: &ExperimentPlan, ctx: &BenchContext, snr_db: f64, trial: usize) -> Result<TrialInput> {
    let mut rng = seed::child_rng(plan.seed, stream::TRIAL, trial as u64);
    let sources = plan.scenario.draw_sources(&mut rng)?;
    let imp_seed: u64 = rng.random();
    let noise_seed: u64 = rng.random();
    let imp = sample_impairments(&ctx.geometry, &plan.scenario.impairment_ranges(), imp_seed)?;
    let noise = if plan.scenario.signal.noiseless { Noise::SnrDb(f64::INFINITY) } else { Noise::SnrDb(snr_db) };
    let ideal = synthesize_ideal(&ctx.geometry, &ctx.schedule, &sources, noise, noise_seed)?;
    let impaired = synthesize_impaired(&ctx.geometry, &ctx.schedule, &imp, &sources, Noise::Variance(ideal.noise_power), noise_seed)?;
    Ok(TrialInput { sources, samples: impaired.samples, noise_power: ideal.noise_power })
}

/// Row-axis and column-axis Toeplitz matrices of a full solution: block
/// traces and the sum of diagonal blocks, the latter conjugated to match the
/// decoupled convention.
pub fn marginal_toeplitz(vars: &FullSdpVars, geom: &RisGeometry) -> DecoupledSdpVars {
    let (m, n) = (geom.rows, geom.cols);
    let tx = DMatrix::from_fn(m, m, |a, b| vars.t.view((a * n, b * n), (n, n)).trace() / n as f64);
    let mut ty = DMatrix::<C64>::zeros(n, n);
    for a in 0..m {
        ty += vars.t.view((a * n, a * n), (n, n));
    }
    let ty = ty.conjugate() / C64::new(m as f64, 0.0);
    DecoupledSdpVars { tx, ty, x: DMatrix::from_row_slice(m, n, vars.x.as_slice()) }
}

fn estimate(
    method: Method,
    plan: &ExperimentPlan,
    ctx: &BenchContext,
    input: &TrialInput,
    denoised: Option<&DVector<C64>>,
) -> Result<Vec<(f64, f64)>> {
    let k = input.sources.count();
    let need = || denoised.ok_or_else(|| Error::Config("denoised signal unavailable".into()));
    let variance = || {
        let m = ctx.model.as_ref().map_or(0.0, |m| m.residual_variance);
        m.max(input.noise_power)
    };
    let pairs = match method {
        Method::Fft | Method::FftDenoise => {
            let z = if method == Method::Fft { &input.samples } else { need()? };
            let spec = grid_spectrum(z, &ctx.dictionary)?;
            spec.peaks(k, plan.peak_separation_deg).iter().map(|p| (p.elevation_deg, p.azimuth_deg)).collect()
        }
        Method::Omp | Method::OmpDenoise => {
            let z = if method == Method::Omp { &input.samples } else { need()? };
            omp_estimate(z, &ctx.dictionary, k)?.angles_deg
        }
        Method::DnnDanm => {
            let cfg = plan.solver.solver_config(variance(), ctx.schedule.samples(), ctx.geometry.elements());
            let sol = solve_danm_with(&ctx.operator, need()?, &ctx.geometry, &cfg)?;
            estimate_doa(&sol.vars, &ctx.geometry, k)?.pairs().collect()
        }
        Method::AnmDenoise => {
            let cfg = plan.solver.solver_config(variance(), ctx.schedule.samples(), ctx.geometry.elements());
            let sol = solve_full_anm(FullAnmInput::Observed { z: need()?, op: &ctx.operator }, &ctx.geometry, &cfg)?;
            estimate_doa(&marginal_toeplitz(&sol.vars, &ctx.geometry), &ctx.geometry, k)?.pairs().collect()
        }
        Method::Crb => unreachable!("handled by the caller"),
    };
    Ok(pairs)
}

/// All methods of the plan on one `(snr, trial)` cell.
pub fn run_trial(plan: &ExperimentPlan, ctx: &BenchContext, snr_db: f64, trial: usize) -> Vec<TrialResult> {
    let base = |method: Method| TrialResult {
        method: method.name().to_string(),
        snr_db,
        trial,
        truth: Vec::new(),
        estimate: Vec::new(),
        squared_error: f64::NAN,
        seconds: 0.0,
        error: None,
    };
    let input = match trial_input(plan, ctx, snr_db, trial) {
        Ok(i) => i,
        Err(e) => {
            return plan.methods.iter().map(|&m| TrialResult { error: Some(e.to_string()), ..base(m) }).collect();
        }
    };
    let truth: Vec<(f64, f64)> = input.sources.directions().collect();

    let started = Instant::now();
    let denoised = match (&ctx.model, plan.needs_model()) {
        (Some(m), true) => Some(m.reconstructor.reconstruct(&input.samples)),
        _ => None,
    };
    let denoise_seconds = started.elapsed().as_secs_f64();

    plan.methods
        .iter()
        .map(|&method| {
            let mut row = TrialResult { truth: truth.clone(), ..base(method) };
            let started = Instant::now();
            let outcome = if method == Method::Crb {
                crb_numeric(&ctx.geometry, &ctx.schedule, &input.sources, input.noise_power)
                    .map(|b| (Vec::new(), b * b * 2.0 * truth.len() as f64))
            } else {
                let den = match &denoised {
                    Some(Ok(d)) => Ok(Some(d)),
                    Some(Err(e)) if method.needs_model() => Err(Error::Numerical(e.to_string())),
                    _ => Ok(None),
                };
                den.and_then(|d| estimate(method, plan, ctx, &input, d))
                    .and_then(|est| matched_squared_error(&truth, &est).map(|se| (est, se)))
            };
            let mut seconds = started.elapsed().as_secs_f64();
            if method.needs_model() {
                seconds += denoise_seconds;
            }
            match outcome {
                Ok((est, se)) => {
                    row.estimate = est;
                    row.squared_error = se;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row.seconds = if plan.timing { seconds } else { 0.0 };
            row
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub snr_db: f64,
    pub rmse_deg: f64,
    pub mean_seconds: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario_hash: String,
    pub rows: Vec<TrialResult>,
    pub summary: Vec<SummaryRow>,
}

impl BenchReport {
    pub fn rmse(&self, method: Method, snr_db: f64) -> Option<f64> {
        self.summary.iter().find(|r| r.method == method.name() && r.snr_db == snr_db).map(|r| r.rmse_deg)
    }

    pub fn mean_seconds(&self, method: Method) -> Option<f64> {
        let rows: Vec<&SummaryRow> = self.summary.iter().filter(|r| r.method == method.name()).collect();
        (!rows.is_empty()).then(|| rows.iter().map(|r| r.mean_seconds).sum::<f64>() / rows.len() as f64)
    }

    /// `method,snr_db,trial,rmse_deg,seconds`.
    pub fn write_results_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "snr_db", "trial", "rmse_deg", "seconds"])?;
        for r in &self.rows {
            w.write_record([r.method.clone(), r.snr_db.to_string(), r.trial.to_string(), r.rmse_deg().to_string(), r.seconds.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn results_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_results_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }

    /// Fixed-width summary table.
    pub fn table(&self) -> String {
        let mut s = format!("{:<12} {:>8} {:>12} {:>12} {:>8}\n", "method", "snr_db", "rmse_deg", "seconds", "failed");
        for r in &self.summary {
            s += &format!("{:<12} {:>8.1} {:>12.4} {:>12.6} {:>8}\n", r.method, r.snr_db, r.rmse_deg, r.mean_seconds, r.failures);
        }
        s
    }
}

fn summarise(plan: &ExperimentPlan, rows: &[TrialResult]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for &snr in &plan.snr_db {
        for m in &plan.methods {
            let cell: Vec<&TrialResult> = rows.iter().filter(|r| r.method == m.name() && r.snr_db == snr).collect();
            let ok: Vec<&&TrialResult> = cell.iter().filter(|r| r.succeeded()).collect();
            let pairs: usize = ok.iter().map(|r| r.truth.len()).sum();
            let se: f64 = ok.iter().map(|r| r.squared_error).sum();
            out.push(SummaryRow {
                method: m.name().to_string(),
                snr_db: snr,
                rmse_deg: if pairs > 0 { (se / (2 * pairs) as f64).sqrt() } else { f64::NAN },
                mean_seconds: if ok.is_empty() { f64::NAN } else { ok.iter().map(|r| r.seconds).sum::<f64>() / ok.len() as f64 },
                trials: cell.len(),
                failures: cell.len() - ok.len(),
            });
        }
    }
    out
}

/// Runs every `(snr, trial)` cell on `plan.workers` threads. Rows are sorted
/// by SNR, method (plan order) and trial before aggregation.
pub fn run_bench(plan: &ExperimentPlan, model: Option<DenoiseModel>) -> Result<BenchReport> {
    let ctx = BenchContext::new(plan, model)?;
    let cells: Vec<(usize, usize)> =
        (0..plan.snr_db.len()).flat_map(|s| (0..plan.trials).map(move |t| (s, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut rows: Vec<TrialResult> = pool.install(|| {
        cells.par_iter().flat_map_iter(|&(s, t)| run_trial(plan, &ctx, plan.snr_db[s], t)).collect()
    });
    let method_rank = |name: &str| plan.methods.iter().position(|m| m.name() == name).unwrap_or(usize::MAX);
    let snr_rank = |v: f64| plan.snr_db.iter().position(|&s| s == v).unwrap_or(usize::MAX);
    rows.sort_by(|a, b| {
        (snr_rank(a.snr_db), method_rank(&a.method), a.trial).cmp(&(snr_rank(b.snr_db), method_rank(&b.method), b.trial))
    });
    let summary = summarise(plan, &rows);
    Ok(BenchReport { scenario_hash: plan.scenario.hash(), rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::steering_outer;

    #[test]
    fn marginals_of_a_kronecker_atom() {
        let geom = RisGeometry::new(3, 4, 0.4, 0.4).unwrap();
        let outer = steering_outer(&geom, 50.0, 20.0).unwrap();
        let x = DVector::from_row_slice(outer.transpose().as_slice());
        let vars = FullSdpVars { t: &x * x.adjoint(), t_scalar: 12.0, x };
        let d = marginal_toeplitz(&vars, &geom);
        let est = estimate_doa(&d, &geom, 1).unwrap();
        assert!((est.elevations_deg[0] - 50.0).abs() < 1e-6);
        assert!((est.azimuths_deg[0] - 20.0).abs() < 1e-6);
    }
}
