//! Per-SNR method ranking from a results CSV.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMethod {
    pub rank: usize,
    pub method: String,
    pub rmse_deg: f64,
    pub mean_seconds: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrRanking {
    pub snr_db: f64,
    pub ranking: Vec<RankedMethod>,
    /// Bound overlay when the CSV carries `crb` rows.
    pub crb_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub snrs: Vec<SnrRanking>,
}

#[derive(Debug, Deserialize)]
struct Row {
    method: String,
    snr_db: f64,
    #[allow(dead_code)]
    trial: usize,
    rmse_deg: f64,
    seconds: f64,
}

#[derive(Default)]
struct Acc {
    sq: f64,
    n: usize,
    secs: f64,
    failures: usize,
}

/// Aggregates `√(mean rmse²)` per method and SNR, skipping failed (NaN)
/// trials, and ranks methods by ascending error.
pub fn run_compare<R: Read>(input: R) -> Result<CompareReport> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let expected = ["method", "snr_db", "trial", "rmse_deg", "seconds"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Format(format!("unexpected header {headers:?}")));
    }
    let mut cells: BTreeMap<(u64, String), Acc> = BTreeMap::new();
    let mut snrs: Vec<f64> = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        if !row.snr_db.is_finite() {
            return Err(Error::Format("non-finite SNR".into()));
        }
        if !snrs.contains(&row.snr_db) {
            snrs.push(row.snr_db);
        }
        let acc = cells.entry((row.snr_db.to_bits(), row.method)).or_default();
        if row.rmse_deg.is_finite() {
            acc.sq += row.rmse_deg * row.rmse_deg;
            acc.n += 1;
            acc.secs += row.seconds;
        } else {
            acc.failures += 1;
        }
    }
    snrs.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(snrs.len());
    for snr in snrs {
        let mut ranking: Vec<RankedMethod> = Vec::new();
        let mut crb_deg = None;
        for ((bits, method), acc) in &cells {
            if *bits != snr.to_bits() {
                continue;
            }
            let rmse = if acc.n > 0 { (acc.sq / acc.n as f64).sqrt() } else { f64::NAN };
            if method == "crb" {
                crb_deg = Some(rmse);
                continue;
            }
            let mean_seconds = if acc.n > 0 { acc.secs / acc.n as f64 } else { f64::NAN };
            ranking.push(RankedMethod { rank: 0, method: method.clone(), rmse_deg: rmse, mean_seconds, failures: acc.failures });
        }
        ranking.sort_by(|a, b| a.rmse_deg.total_cmp(&b.rmse_deg).then(a.method.cmp(&b.method)));
        for (i, r) in ranking.iter_mut().enumerate() {
            r.rank = i + 1;
        }
        out.push(SnrRanking { snr_db: snr, ranking, crb_deg });
    }
    if out.iter().all(|s| s.ranking.is_empty()) {
        return Err(Error::Format("no methods to rank".into()));
    }
    Ok(CompareReport { snrs: out })
}

impl CompareReport {
    /// `snr_db,rank,method,rmse_deg,mean_seconds,crb_deg` rows for plotting.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["snr_db", "rank", "method", "rmse_deg", "mean_seconds", "crb_deg"])?;
        for s in &self.snrs {
            let crb = s.crb_deg.map(|c| c.to_string()).unwrap_or_default();
            for r in &s.ranking {
                w.write_record([s.snr_db.to_string(), r.rank.to_string(), r.method.clone(), r.rmse_deg.to_string(), r.mean_seconds.to_string(), crb.clone()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
