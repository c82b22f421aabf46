//! Versioned binary model files with a JSON metadata sidecar.
//!
//! Layout (little endian): magic `RISMLP\0\0`, `u32` version, `u32` layer
//! count, `u32` widths (count + 1), `f64` scale, `u64` epochs trained, then
//! per layer the row-major weight blob and the bias blob, then a `u8`
//! optimizer flag followed, when set, by the Adam step, hyperparameters and
//! both moment blobs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::mlp::{Layer, MlpParams};
use super::train::Reconstructor;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"RISMLP\0\0";
const VERSION: u32 = 1;

/// Free-form provenance stored next to the weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub format_version: u32,
    pub widths: Vec<usize>,
    pub scale: f64,
    pub epochs_trained: usize,
    pub scenario_hash: Option<String>,
    pub train_seed: Option<u64>,
    pub final_loss: Option<f64>,
    /// Mean per-sample `|ŷ - y|²` on held-out data.
    pub residual_variance: Option<f64>,
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn write_blob<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> Result<()> {
    for v in values {
        w.write_f64::<LE>(v)?;
    }
    Ok(())
}

fn read_blob<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n];
    r.read_f64_into::<LE>(&mut out)?;
    Ok(out)
}

pub fn write_model<W: Write>(model: &Reconstructor, mut w: W) -> Result<()> {
    let widths = model.params.widths();
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u32::<LE>(model.params.layers.len() as u32)?;
    for &n in &widths {
        w.write_u32::<LE>(n as u32)?;
    }
    w.write_f64::<LE>(model.scale)?;
    w.write_u64::<LE>(model.epochs_trained as u64)?;
    for l in &model.params.layers {
        write_blob(&mut w, l.weight.iter().copied())?;
        write_blob(&mut w, l.bias.iter().copied())?;
    }
    match &model.optimizer {
        None => w.write_u8(0)?,
        Some(a) => {
            w.write_u8(1)?;
            w.write_u64::<LE>(a.step)?;
            for v in [a.learning_rate, a.beta1, a.beta2, a.epsilon] {
                w.write_f64::<LE>(v)?;
            }
            write_blob(&mut w, a.first.iter().copied())?;
            write_blob(&mut w, a.second.iter().copied())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_model<R: Read>(mut r: R) -> Result<Reconstructor> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a model file".into()));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let count = r.read_u32::<LE>()? as usize;
    if count == 0 || count > 64 {
        return Err(Error::Format(format!("implausible layer count {count}")));
    }
    let widths = (0..=count).map(|_| r.read_u32::<LE>().map(|v| v as usize)).collect::<std::io::Result<Vec<_>>>()?;
    let scale = r.read_f64::<LE>()?;
    let epochs_trained = r.read_u64::<LE>()? as usize;
    let mut layers = Vec::with_capacity(count);
    for win in widths.windows(2) {
        let (inp, out) = (win[0], win[1]);
        let weight = Array2::from_shape_vec((out, inp), read_blob(&mut r, out * inp)?)
            .map_err(|e| Error::Format(e.to_string()))?;
        let bias = Array1::from(read_blob(&mut r, out)?);
        layers.push(Layer { weight, bias });
    }
    let params = MlpParams::from_layers(layers)?;
    let optimizer = match r.read_u8()? {
        0 => None,
        1 => {
            let step = r.read_u64::<LE>()?;
            let h = read_blob(&mut r, 4)?;
            let n = params.parameter_count();
            let first = read_blob(&mut r, n)?;
            let second = read_blob(&mut r, n)?;
            Some(AdamState { learning_rate: h[0], beta1: h[1], beta2: h[2], epsilon: h[3], step, first, second })
        }
        f => return Err(Error::Format(format!("bad optimizer flag {f}"))),
    };
    let mut model = Reconstructor::new(params, scale)?;
    model.optimizer = optimizer;
    model.epochs_trained = epochs_trained;
    Ok(model)
}

/// Writes the binary model at `path` and its metadata at `path.json`.
pub fn save_model(path: &Path, model: &Reconstructor, meta: &ModelMeta) -> Result<()> {
    write_model(model, BufWriter::new(File::create(path)?))?;
    let meta = ModelMeta {
        format_version: VERSION,
        widths: model.params.widths(),
        scale: model.scale,
        epochs_trained: model.epochs_trained,
        ..meta.clone()
    };
    std::fs::write(meta_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(Reconstructor, ModelMeta)> {
    let model = read_model(BufReader::new(File::open(path)?))?;
    let meta_file = meta_path(path);
    let meta = if meta_file.exists() {
        serde_json::from_str(&std::fs::read_to_string(meta_file)?)?
    } else {
        ModelMeta::default()
    };
    Ok((model, meta))
}
