//! Binary checkpoint format (all integers and floats little-endian):
//!
//! ```text
//! "LSTG" | version u32 | total_len u64
//! n_channels u64 | n_samples u64 | n_outer u64 | n_inner u64 | n_latent u64
//! dropout_p f64 | rng_seed u64 | normalize u64 (0/1)
//! n_tensors u32 | per tensor: name_len u16, name utf-8, rows u64, cols u64
//! n_values u64 | values f64[n_values] (tensors concatenated in table order)
//! crc64 u64 (CRC-64/XZ of every preceding byte)
//! ```

use std::fs;
use std::path::Path;

use super::{LsteegConfig, LsteegModel, LsteegParams};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"LSTG";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(model: &LsteegModel) -> Vec<u8> {
    let cfg = model.config();
    let mut w = Writer::new(CHECKPOINT_MAGIC, CHECKPOINT_VERSION);
    for v in [cfg.n_channels, cfg.n_samples, cfg.n_outer, cfg.n_inner, cfg.n_latent] {
        w.u64(v as u64);
    }
    w.f64(cfg.dropout_p);
    w.u64(cfg.rng_seed);
    w.u64(cfg.normalize as u64);

    let tensors = model.params.tensors();
    w.u32(tensors.len() as u32);
    for t in &tensors {
        w.u16(t.name.len() as u16);
        w.bytes(t.name.as_bytes());
        w.u64(t.shape.0 as u64);
        w.u64(t.shape.1 as u64);
    }
    let n: usize = tensors.iter().map(|t| t.data.len()).sum();
    w.u64(n as u64);
    for t in &tensors {
        for &v in t.data {
            w.f64(v);
        }
    }
    w.finish()
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<LsteegModel> {
    let mut r = Reader::open(bytes, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)?;
    let config = LsteegConfig {
        n_channels: r.usize()?,
        n_samples: r.usize()?,
        n_outer: r.usize()?,
        n_inner: r.usize()?,
        n_latent: r.usize()?,
        dropout_p: r.f64()?,
        rng_seed: r.u64()?,
        normalize: match r.u64()? {
            0 => false,
            1 => true,
            other => return Err(Error::Format(format!("normalize flag {other}"))),
        },
    };
    config.validate()?;

    let mut params = LsteegParams::zeros(&config);
    let expected: Vec<(&'static str, (usize, usize))> =
        params.tensors().iter().map(|t| (t.name, t.shape)).collect();
    let n_tensors = r.u32()? as usize;
    if n_tensors != expected.len() {
        return Err(Error::Format(format!(
            "{n_tensors} tensors in table, expected {}",
            expected.len()
        )));
    }
    for (name, shape) in &expected {
        let len = r.u16()? as usize;
        let found = std::str::from_utf8(r.bytes(len)?)
            .map_err(|_| Error::Format("tensor name is not utf-8".into()))?;
        let dims = (r.usize()?, r.usize()?);
        if found != *name || dims != *shape {
            return Err(Error::Format(format!(
                "tensor table entry {found} {dims:?} does not match {name} {shape:?}"
            )));
        }
    }
    let n = r.usize()?;
    let total: usize = expected.iter().map(|(_, (a, b))| a * b).sum();
    if n != total || r.remaining() != n * 8 {
        return Err(Error::Format(format!(
            "payload holds {n} values ({} bytes left), expected {total}",
            r.remaining()
        )));
    }
    for t in params.tensors_mut() {
        for v in t.iter_mut() {
            *v = r.f64()?;
        }
    }
    LsteegModel::from_parts(config, params)
}

pub fn save(model: &LsteegModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_checkpoint(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<LsteegModel> {
    read_checkpoint(&fs::read(path)?)
}
