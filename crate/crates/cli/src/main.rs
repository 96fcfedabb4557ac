mod audit;
mod dims;
mod output;
mod run;
mod sweep;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde::Serialize;

use lipzoom::instances::{describe, Description, InstanceSpec};
use lipzoom::metric::AnalyticDims;
use lipzoom::simulator::RunConfig;

/// Bad input: unreadable or inconsistent configs, missing artifacts.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// Flags that override config values.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Run a single seed instead of the config's seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    /// Output root.
    #[arg(long, global = true, env = "LIPZOOM_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Parser)]
#[command(name = "lipzoom", version, about = "Lipschitz bandit and experts experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over its seeds.
    Run { config: PathBuf },
    /// Run a base configuration over a grid of overrides.
    Sweep { config: PathBuf },
    /// Clean-phase audit of a stored run (directory or run id).
    Audit { run: String },
    /// Dimension estimates for a space or instance.
    Dims { config: PathBuf },
    /// Print a summary of an instance or run configuration.
    Describe { config: PathBuf },
}

#[derive(Serialize)]
struct DescribeOut {
    digest: String,
    instance: Description,
    analytic: AnalyticDims,
    #[serde(skip_serializing_if = "Option::is_none")]
    algorithm: Option<String>,
}

fn describe_cmd(config: &Path) -> Result<()> {
    let value: serde_json::Value = output::read_json(config)?;
    let (instance, algorithm) = if value.get("algorithm").is_some() {
        let cfg: RunConfig = serde_json::from_value(value.clone()).map_err(|e| Invalid(e.to_string()))?;
        let env = cfg.instance.build().map_err(|e| Invalid(e.to_string()))?;
        let alg = cfg.algorithm.build_for(env.as_ref()).map_err(|e| Invalid(e.to_string()))?;
        (cfg.instance, Some(alg.name()))
    } else {
        (serde_json::from_value::<InstanceSpec>(value.clone()).map_err(|e| Invalid(e.to_string()))?, None)
    };
    let env = instance.build().map_err(|e| Invalid(e.to_string()))?;
    let out = DescribeOut { digest: output::digest(&value)?, instance: describe(env.as_ref()), analytic: env.space().analytic_dims(), algorithm };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = &cli.overrides;
    let result = match &cli.command {
        Command::Run { config } => run::cmd(config, o).map(drop),
        Command::Sweep { config } => sweep::cmd(config, o).map(drop),
        Command::Audit { run } => audit::cmd(run, o).map(drop),
        Command::Dims { config } => dims::cmd(config, o).map(drop),
        Command::Describe { config } => describe_cmd(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Invalid>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
