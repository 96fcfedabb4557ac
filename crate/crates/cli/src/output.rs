//! Output layout, config digests and CSV/JSON writers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use lipzoom::simulator::{Aggregate, RegretTrace};

use crate::Invalid;

pub const DEFAULT_ROOT: &str = "lipzoom-out";

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn digest<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn short(digest: &str) -> &str {
    &digest[..12]
}

pub fn root(out: Option<&Path>) -> PathBuf {
    out.map_or_else(|| PathBuf::from(DEFAULT_ROOT), Path::to_path_buf)
}

pub fn fresh_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())).into())
}

pub fn write_aggregate(path: &Path, agg: &Aggregate) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "regret", "reward", "stderr"])?;
    for i in 0..agg.t.len() {
        w.write_record([agg.t[i].to_string(), agg.mean[i].to_string(), agg.reward[i].to_string(), agg.stderr[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_seed_rows(path: &Path, traces: &[RegretTrace]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["seed", "t", "regret", "reward"])?;
    for tr in traces {
        for c in &tr.checkpoints {
            w.write_record([tr.seed.to_string(), c.t.to_string(), c.regret.to_string(), c.reward.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
