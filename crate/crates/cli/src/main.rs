use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use risdoa::harness::{run_bench, run_compare, run_simulate, run_train, BenchReport, DenoiseModel, ExperimentPlan, SummaryRow};
use risdoa::nn::load_model;

#[derive(Parser)]
#[command(name = "risdoa", version, about = "2-D DOA estimation on an impaired 1-bit RIS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize ideal and impaired snapshots for the scenario.
    Simulate(Common),
    /// Train the reconstruction network.
    Train {
        #[command(flatten)]
        common: Common,
        /// Continue from a saved model.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Monte-Carlo benchmark of the configured methods.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Trained model; defaults to `<out>/model.bin` when present.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Rank methods per SNR from a results CSV.
    Compare {
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Plan file (TOML, or JSON by extension). Keys absent from the file
    /// take the preset's values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// desk (8x8, 100 trials) or paper (16x16, 1000 trials).
    #[arg(long, default_value = "desk")]
    preset: String,
    /// Overrides the plan, scenario and training seeds.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn plan(&self) -> Result<ExperimentPlan> {
        let mut plan = match &self.config {
            Some(path) => load_over_preset(path, &self.preset)?,
            None => ExperimentPlan::preset(&self.preset)?,
        };
        if let Some(s) = self.seed {
            plan.seed = s;
            plan.scenario.seed = s;
            plan.train.seed = s;
        }
        if let Some(w) = self.workers {
            plan.workers = w;
        }
        plan.validate()?;
        Ok(plan)
    }
}

/// Merges the file's keys into the preset so partial configs work for either
/// scale.
fn load_over_preset(path: &Path, preset: &str) -> Result<ExperimentPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut base = toml::Table::try_from(ExperimentPlan::preset(preset)?)?;
    let overlay: toml::Table = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text)?
    };
    merge(&mut base, overlay);
    Ok(ExperimentPlan::from_toml_str(&toml::to_string(&base)?)?)
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[derive(Serialize)]
struct BenchSummary<'a> {
    scenario_hash: &'a str,
    plan: &'a ExperimentPlan,
    summary: &'a [SummaryRow],
}

fn bench(common: &Common, model: Option<PathBuf>) -> Result<()> {
    let plan = common.plan()?;
    let model_path = model.or_else(|| Some(common.out.join("model.bin")).filter(|p| p.exists()));
    let model = match (&model_path, plan.needs_model()) {
        (Some(p), true) => {
            let (reconstructor, meta) = load_model(p).with_context(|| format!("loading {}", p.display()))?;
            let residual_variance = meta.residual_variance.unwrap_or(0.0);
            if meta.scenario_hash.as_deref().is_some_and(|h| h != plan.scenario.hash()) {
                eprintln!("warning: model was trained on a different scenario");
            }
            Some(DenoiseModel { reconstructor, residual_variance })
        }
        (None, true) => bail!("plan has denoise methods; train a model first or pass --model"),
        _ => None,
    };
    let report: BenchReport = run_bench(&plan, model)?;
    fs::create_dir_all(&common.out)?;
    report.write_results_csv(BufWriter::new(File::create(common.out.join("results.csv"))?))?;
    let summary = BenchSummary { scenario_hash: &report.scenario_hash, plan: &plan, summary: &report.summary };
    fs::write(common.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    print!("{}", report.table());
    println!("scenario {}", report.scenario_hash);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(common) => {
            let plan = common.plan()?;
            let out = run_simulate(&plan.scenario, &common.out)?;
            for f in &out.files {
                println!("{}", f.display());
            }
        }
        Command::Train { common, resume } => {
            let plan = common.plan()?;
            let report = run_train(&plan.scenario, &plan.train, &common.out, resume.as_deref())?;
            let first = report.history.first().copied().unwrap_or(f64::NAN);
            let last = report.history.last().copied().unwrap_or(f64::NAN);
            println!("epochs {}..{}", report.first_epoch, report.first_epoch + report.history.len() - 1);
            println!("loss {first:.6e} -> {last:.6e}");
            println!("held-out residual variance {:.6e}", report.residual_variance);
            println!("{}", report.model_path.display());
        }
        Command::Bench { common, model } => bench(&common, model)?,
        Command::Compare { results, out } => {
            let report = run_compare(File::open(&results).with_context(|| format!("reading {}", results.display()))?)?;
            for s in &report.snrs {
                println!("SNR {} dB", s.snr_db);
                for r in &s.ranking {
                    println!("  {:>2} {:<12} {:>10.4} {:>10.6} {:>4}", r.rank, r.method, r.rmse_deg, r.mean_seconds, r.failures);
                }
                if let Some(c) = s.crb_deg {
                    println!("     crb          {c:>10.4}");
                }
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                report.write_csv(BufWriter::new(File::create(dir.join("ranking.csv"))?))?;
                fs::write(dir.join("ranking.json"), serde_json::to_string_pretty(&report)?)?;
            }
        }
    }
    Ok(())
}
