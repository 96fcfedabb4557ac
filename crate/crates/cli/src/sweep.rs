//! `sweep`: a base configuration and a grid of JSON overrides.
//!
//! The grid is a list of axes; each axis is a list of override maps from
//! dotted paths to values. Points are the cartesian product of the axes,
//! so an axis whose maps set several paths moves them together.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use lipzoom::simulator::{slope_fit, RunConfig};

use crate::output::{self, digest, short};
use crate::{run, Invalid, Overrides};

type Patch = BTreeMap<String, Value>;

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: Value,
    pub grid: Vec<Vec<Patch>>,
    /// Window [lo, hi] for a log-log slope per point.
    #[serde(default)]
    pub fit: Option<(f64, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestRow {
    pub index: usize,
    pub dir: String,
    pub digest: String,
    pub overrides: String,
    pub horizon: u64,
    pub runs: usize,
    pub final_regret: f64,
    pub slope: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub digest: String,
    pub points: Vec<ManifestRow>,
}

fn set_path(root: &mut Value, path: &str, v: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        let Value::Object(map) = cur else {
            return Err(Invalid(format!("override path {path}: {key} is not inside an object")).into());
        };
        if i + 1 == parts.len() {
            map.insert(key.to_string(), v);
            return Ok(());
        }
        cur = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Invalid("empty override path".into()).into())
}

/// Cartesian product of the axes, each point as the merged patch.
pub fn expand(grid: &[Vec<Patch>]) -> Result<Vec<Patch>> {
    if grid.is_empty() || grid.iter().any(|a| a.is_empty()) {
        return Err(Invalid("sweep grid is empty".into()).into());
    }
    let mut points = vec![Patch::new()];
    for axis in grid {
        points = points
            .iter()
            .flat_map(|p| {
                axis.iter().map(move |q| {
                    let mut m = p.clone();
                    m.extend(q.iter().map(|(k, v)| (k.clone(), v.clone())));
                    m
                })
            })
            .collect();
    }
    Ok(points)
}

pub fn cmd(config: &Path, o: &Overrides) -> Result<PathBuf> {
    let sweep: SweepConfig = output::read_json(config)?;
    let points = expand(&sweep.grid)?;
    let mut configs = vec![];
    for patch in &points {
        let mut v = sweep.base.clone();
        for (path, value) in patch {
            set_path(&mut v, path, value.clone())?;
        }
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| Invalid(format!("grid point {patch:?}: {e}")))?;
        let cfg = run::apply(cfg, o);
        run::validate(&cfg)?;
        configs.push(cfg);
    }
    let d = digest(&(&configs, &sweep.fit))?;
    let dir = output::root(o.out.as_deref()).join(format!("sweep-{}", short(&d)));
    output::fresh_dir(&dir)?;
    let mut rows = vec![];
    for (i, (cfg, patch)) in configs.iter().zip(&points).enumerate() {
        let name = format!("point-{i:03}");
        let (side, agg) = run::execute(cfg, &dir.join(&name))?;
        let slope = sweep.fit.and_then(|(lo, hi)| slope_fit(&agg.points(), lo, hi).ok()).map(|f| f.slope);
        println!("{name}: {} final regret {:.3}{}", serde_json::to_string(patch)?, side.final_regret, slope.map_or(String::new(), |s| format!(", slope {s:.3}")));
        rows.push(ManifestRow {
            index: i,
            dir: name,
            digest: side.digest,
            overrides: serde_json::to_string(patch)?,
            horizon: cfg.horizon,
            runs: side.runs,
            final_regret: side.final_regret,
            slope,
        });
    }
    output::write_rows(&dir.join("manifest.csv"), &rows)?;
    output::write_json(&dir.join("manifest.json"), &Manifest { digest: d, points: rows })?;
    println!("{}", dir.display());
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn product_of_axes() {
        let grid: Vec<Vec<Patch>> = serde_json::from_value(json!([
            [{"horizon": 10}, {"horizon": 20}],
            [{"algorithm.d": 1.0, "instance.space.exponent": 1.0}, {"algorithm.d": 2.0, "instance.space.exponent": 0.5}]
        ]))
        .unwrap();
        let pts = expand(&grid).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[3]["algorithm.d"], json!(2.0));
        assert_eq!(pts[3]["horizon"], json!(20));
    }

    #[test]
    fn empty_axes_are_rejected() {
        assert!(expand(&[]).is_err());
        assert!(expand(&[vec![]]).is_err());
    }

    #[test]
    fn paths_create_objects() {
        let mut v = json!({"a": {"b": 1}});
        set_path(&mut v, "a.c.d", json!(2)).unwrap();
        assert_eq!(v, json!({"a": {"b": 1, "c": {"d": 2}}}));
        assert!(set_path(&mut v, "a.b.x", json!(0)).is_err());
    }
}
