//! `run`: one configuration, all its seeds.

use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::{Deserialize, Serialize};

use lipzoom::analysis::clean_run_audit;
use lipzoom::instances::{describe, Description, EnvRef};
use lipzoom::simulator::{aggregate, replicate_instances, run, Aggregate, RegretTrace, RunConfig, RunOptions, SimError};

use crate::output::{self, digest, short};
use crate::{Invalid, Overrides};

/// Sidecar written next to every trace set.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunSidecar {
    pub digest: String,
    pub config: RunConfig,
    pub algorithm: String,
    pub instance: Description,
    pub runs: usize,
    pub final_regret: f64,
    pub final_stderr: f64,
    /// Clean-phase counts when events were kept: (clean, total).
    #[serde(default)]
    pub clean_phases: Option<(usize, usize)>,
}

pub fn apply(mut cfg: RunConfig, o: &Overrides) -> RunConfig {
    if let Some(s) = o.seed {
        cfg.seeds = vec![s];
    }
    if let Some(h) = o.horizon {
        cfg.horizon = h;
    }
    cfg
}

pub fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.horizon == 0 {
        return Err(Invalid("horizon must be positive".into()).into());
    }
    if cfg.seeds.is_empty() {
        return Err(Invalid("at least one seed is needed".into()).into());
    }
    let env = build_env(cfg, cfg.seeds[0])?;
    let alg = cfg.algorithm.build_for(env.as_ref()).map_err(|e| Invalid(e.to_string()))?;
    if !env.supports(alg.feedback()) {
        return Err(Invalid(format!("{} needs {:?} feedback, which the instance does not offer", alg.name(), alg.feedback())).into());
    }
    Ok(())
}

fn build_env(cfg: &RunConfig, seed: u64) -> Result<EnvRef> {
    Ok(cfg.instance_for(seed).build().map_err(|e| Invalid(e.to_string()))?)
}

fn sim(e: SimError) -> anyhow::Error {
    match e {
        SimError::ModeMismatch { .. } | SimError::Instance(_) | SimError::TooFewSeeds(_) => Invalid(e.to_string()).into(),
        _ => anyhow::anyhow!(e),
    }
}

/// Runs every seed and writes trace.csv, seeds.csv, run.json and one JSON
/// trace per seed under `dir`.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<(RunSidecar, Aggregate)> {
    validate(cfg)?;
    let opts = RunOptions { horizon: cfg.horizon, seed: 0, keep_events: cfg.keep_events, keep_actions: false };
    let make = |seed: u64| -> Result<_, SimError> {
        let env = cfg.instance_for(seed).build()?;
        let alg = cfg.algorithm.build_for(env.as_ref())?;
        Ok((env, alg))
    };
    let traces: Vec<RegretTrace> = if cfg.seeds.len() >= 2 {
        replicate_instances(&cfg.seeds, &opts, make).map_err(sim)?.1
    } else {
        let seed = cfg.seeds[0];
        let (env, mut alg) = make(seed).map_err(sim)?;
        vec![run(alg.as_mut(), env.as_ref(), &RunOptions { seed, ..opts }).map_err(sim)?]
    };
    let agg = aggregate(&traces);
    let clean_phases = if cfg.keep_events {
        let mut acc = (0, 0);
        for tr in &traces {
            let a = clean_run_audit(&tr.events, build_env(cfg, tr.seed)?.as_ref());
            acc.0 += a.clean_phases();
            acc.1 += a.phases.len();
        }
        Some(acc)
    } else {
        None
    };
    output::fresh_dir(&dir.join("traces"))?;
    output::write_aggregate(&dir.join("trace.csv"), &agg)?;
    output::write_seed_rows(&dir.join("seeds.csv"), &traces)?;
    for tr in &traces {
        output::write_json(&dir.join("traces").join(format!("seed-{}.json", tr.seed)), tr)?;
    }
    let side = RunSidecar {
        digest: digest(cfg)?,
        config: cfg.clone(),
        algorithm: traces[0].algorithm.clone(),
        instance: describe(build_env(cfg, cfg.seeds[0])?.as_ref()),
        runs: traces.len(),
        final_regret: *agg.mean.last().unwrap_or(&0.0),
        final_stderr: *agg.stderr.last().unwrap_or(&0.0),
        clean_phases,
    };
    output::write_json(&dir.join("run.json"), &side)?;
    Ok((side, agg))
}

pub fn cmd(config: &Path, o: &Overrides) -> Result<PathBuf> {
    let cfg: RunConfig = output::read_json(config)?;
    let cfg = apply(cfg, o);
    let d = digest(&cfg)?;
    let dir = output::root(o.out.as_deref()).join(format!("run-{}", short(&d)));
    let (side, _) = execute(&cfg, &dir)?;
    println!("{}: {} runs of {}, final regret {:.3} (digest {})", dir.display(), side.runs, side.algorithm, side.final_regret, short(&d));
    Ok(dir)
}
