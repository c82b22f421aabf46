//! Snapshot export: `sample_index,real,imag` CSV plus a JSON sidecar.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{Snapshot, SourceSet, C64};
use crate::error::{Error, Result};

/// Contents of the JSON sidecar written next to a snapshot CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub noise_power: f64,
    pub seed: u64,
    pub scenario_hash: String,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<SourceSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_separation_deg: Option<f64>,
    #[serde(default)]
    pub impaired: bool,
}

pub fn write_snapshot_csv<W: Write>(snapshot: &Snapshot, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_index", "real", "imag"])?;
    for (i, z) in snapshot.samples.iter().enumerate() {
        w.write_record([i.to_string(), z.re.to_string(), z.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot_csv<R: Read>(input: R) -> Result<DVector<C64>> {
    let mut r = csv::Reader::from_reader(input);
    let mut values = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Format(format!("row {row}: missing column {i}")))?
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {row}: {e}")))
        };
        let idx = field(0)? as usize;
        if idx != row {
            return Err(Error::Format(format!("row {row}: sample_index {idx} out of order")));
        }
        values.push(C64::new(field(1)?, field(2)?));
    }
    Ok(DVector::from_vec(values))
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_snapshot(dir: &Path, stem: &str, snapshot: &Snapshot, meta: &SnapshotMeta) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_snapshot_csv(snapshot, std::fs::File::create(dir.join(format!("{stem}.csv")))?)?;
    let json = serde_json::to_string_pretty(meta)?;
    std::fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let snap = Snapshot {
            samples: DVector::from_vec(vec![C64::new(0.1, -2.5e-17), C64::new(1.0 / 3.0, 7.0)]),
            noise_power: 0.5,
            seed: 3,
        };
        let mut buf = Vec::new();
        write_snapshot_csv(&snap, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sample_index,real,imag\n0,"));
        assert_eq!(read_snapshot_csv(&buf[..]).unwrap(), snap.samples);
    }

    #[test]
    fn malformed_csv_rejected() {
        let bad = "sample_index,real,imag\n0,1.0,x\n";
        assert!(read_snapshot_csv(bad.as_bytes()).is_err());
        let skipped = "sample_index,real,imag\n1,1.0,0.0\n";
        assert!(read_snapshot_csv(skipped.as_bytes()).is_err());
    }
}
