//! `audit`: clean-phase audit of a stored run.

use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use lipzoom::analysis::clean_run_audit;
use lipzoom::simulator::RegretTrace;

use crate::output::{self, short};
use crate::run::RunSidecar;
use crate::{Invalid, Overrides};

#[derive(Debug, Serialize, Deserialize)]
pub struct AuditRow {
    pub seed: u64,
    pub phase: u32,
    pub arms: usize,
    pub clean: bool,
    pub badness_violations: usize,
    pub packing_violations: usize,
    pub pull_violations: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuditSummary {
    pub run_digest: String,
    pub runs: usize,
    pub phases: usize,
    pub clean_phases: usize,
    /// [clean∧held, clean∧failed, unclean∧held, unclean∧failed].
    pub cross_tab: [usize; 4],
    /// Badness, packing and pull violations on clean phases.
    pub clean_violations: (usize, usize, usize),
}

/// A run directory, or a run id looked up under the output root.
fn locate(target: &str, o: &Overrides) -> Result<PathBuf> {
    let direct = PathBuf::from(target);
    if direct.join("run.json").is_file() {
        return Ok(direct);
    }
    let root = output::root(o.out.as_deref());
    for name in [target.to_string(), format!("run-{target}")] {
        let p = root.join(name);
        if p.join("run.json").is_file() {
            return Ok(p);
        }
    }
    Err(Invalid(format!("no run found at {target} (looked for run.json there and under {})", root.display())).into())
}

pub fn cmd(target: &str, o: &Overrides) -> Result<PathBuf> {
    let dir = locate(target, o)?;
    let side: RunSidecar = output::read_json(&dir.join("run.json"))?;
    let mut rows = vec![];
    let mut sum = AuditSummary { run_digest: side.digest.clone(), runs: 0, phases: 0, clean_phases: 0, cross_tab: [0; 4], clean_violations: (0, 0, 0) };
    for &seed in &side.config.seeds {
        let trace: RegretTrace = output::read_json(&dir.join("traces").join(format!("seed-{seed}.json")))?;
        if trace.events.is_empty() {
            return Err(Invalid(format!("trace for seed {seed} has no events; rerun with \"keep_events\": true")).into());
        }
        let env = side.config.instance_for(seed).build().map_err(|e| Invalid(e.to_string()))?;
        let a = clean_run_audit(&trace.events, env.as_ref());
        sum.runs += 1;
        sum.phases += a.phases.len();
        sum.clean_phases += a.clean_phases();
        for (k, v) in a.cross_tab().iter().enumerate() {
            sum.cross_tab[k] += v;
        }
        let v = a.clean_violations();
        sum.clean_violations = (sum.clean_violations.0 + v.0, sum.clean_violations.1 + v.1, sum.clean_violations.2 + v.2);
        rows.extend(a.phases.iter().map(|p| AuditRow {
            seed,
            phase: p.phase,
            arms: p.arms,
            clean: p.clean,
            badness_violations: p.badness_violations,
            packing_violations: p.packing_violations,
            pull_violations: p.pull_violations,
        }));
    }
    output::write_rows(&dir.join("audit.csv"), &rows)?;
    output::write_json(&dir.join("audit.json"), &sum)?;
    println!(
        "{}: {}/{} phases clean over {} runs; clean-phase violations (badness, packing, pulls) {:?} (run {})",
        dir.display(),
        sum.clean_phases,
        sum.phases,
        sum.runs,
        sum.clean_violations,
        short(&side.digest)
    );
    Ok(dir)
}
