//! `dims`: covering-dimension fits of a space and, given an instance,
//! its zooming dimension.

use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::{Deserialize, Serialize};

use lipzoom::analysis::{covering_dimension_fit, default_scales, log_covering_dimension_fit, zooming_dimension_estimate, DimensionReport, ZoomingReport};
use lipzoom::instances::InstanceSpec;
use lipzoom::metric::{AnalyticDims, SpaceRef, SpaceSpec};

use crate::output::{self, digest, short};
use crate::{Invalid, Overrides};

fn sixteen() -> f64 {
    16.0
}

fn mesh() -> usize {
    (1 << 16) + 1
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DimsConfig {
    #[serde(default)]
    pub space: Option<SpaceSpec>,
    /// With an instance, its space is used and the zooming dimension added.
    #[serde(default)]
    pub instance: Option<InstanceSpec>,
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default = "sixteen")]
    pub c: f64,
    #[serde(default = "mesh")]
    pub mesh: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DimsReport {
    pub digest: String,
    pub space: String,
    pub analytic: AnalyticDims,
    pub covering: Option<DimensionReport>,
    pub log_covering: Option<DimensionReport>,
    pub zooming: Option<ZoomingReport>,
    /// Fits that could not be computed, with the reason.
    pub skipped: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Row {
    report: &'static str,
    scale: f64,
    count: usize,
}

pub fn cmd(config: &Path, o: &Overrides) -> Result<PathBuf> {
    let cfg: DimsConfig = output::read_json(config)?;
    let invalid = |e: &dyn std::fmt::Display| Invalid(e.to_string());
    let (space, env): (SpaceRef, _) = match (&cfg.instance, &cfg.space) {
        (Some(i), _) => {
            let env = i.build().map_err(|e| invalid(&e))?;
            (env.space().clone(), Some(env))
        }
        (None, Some(s)) => (s.build().map_err(|e| invalid(&e))?, None),
        (None, None) => return Err(Invalid("dims needs a \"space\" or an \"instance\"".into()).into()),
    };
    let scales = cfg.scales.clone().unwrap_or_else(default_scales);
    let mut skipped = vec![];
    let covering = covering_dimension_fit(space.as_ref(), &scales).map_err(|e| skipped.push(format!("covering: {e}"))).ok();
    let log_covering = log_covering_dimension_fit(space.as_ref(), &scales).map_err(|e| skipped.push(format!("log-covering: {e}"))).ok();
    let zooming = match &env {
        Some(env) => Some(zooming_dimension_estimate(env.as_ref(), cfg.c, &scales, cfg.mesh).map_err(|e| invalid(&e))?),
        None => None,
    };
    let d = digest(&cfg)?;
    let report = DimsReport { digest: d.clone(), space: space.name(), analytic: space.analytic_dims(), covering, log_covering, zooming, skipped };
    let dir = output::root(o.out.as_deref()).join(format!("dims-{}", short(&d)));
    output::fresh_dir(&dir)?;
    let mut rows = vec![];
    if let Some(r) = &report.covering {
        rows.extend(r.scales.iter().zip(&r.counts).map(|(&scale, &count)| Row { report: "covering", scale, count }));
    }
    if let Some(r) = &report.zooming {
        rows.extend(r.scales.iter().zip(&r.counts).map(|(&scale, &count)| Row { report: "zooming", scale, count }));
    }
    output::write_rows(&dir.join("dims.csv"), &rows)?;
    output::write_json(&dir.join("dims.json"), &report)?;
    let fmt = |r: &Option<DimensionReport>| r.as_ref().map_or("n/a".to_string(), |r| format!("{:.3}", r.dimension));
    println!(
        "{}: {} covering {} log-covering {}{}",
        dir.display(),
        report.space,
        fmt(&report.covering),
        fmt(&report.log_covering),
        report.zooming.as_ref().map_or(String::new(), |z| format!(" zooming {:.3}", z.dimension))
    );
    Ok(dir)
}
