//! Command-line entry point: single runs and experiment sweeps.

use std::fs;
use std::path::PathBuf;

use apeps_core::channel::ChannelTrace;
use apeps_core::config::{validate_config, SchedulerKind};
use apeps_core::engine::SimInputs;
use apeps_core::traffic::load_vbr_trace;
use clap::{Parser, ValueEnum};

use crate::configfile::{apply_overrides, parse_config_text, ConfigOverlay};
use crate::error::ToolError;
use crate::experiment::{run_experiment, run_single, ExperimentName, ExperimentSpec};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Apeps,
    Pbs,
}

impl From<SchedulerArg> for SchedulerKind {
    fn from(a: SchedulerArg) -> Self {
        match a {
            SchedulerArg::Apeps => SchedulerKind::Apeps,
            SchedulerArg::Pbs => SchedulerKind::Pbs,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentArg {
    #[value(name = "vary_mss")]
    VaryMss,
    #[value(name = "vary_error_rate")]
    VaryErrorRate,
}

impl From<ExperimentArg> for ExperimentName {
    fn from(a: ExperimentArg) -> Self {
        match a {
            ExperimentArg::VaryMss => ExperimentName::VaryMss,
            ExperimentArg::VaryErrorRate => ExperimentName::VaryErrorRate,
        }
    }
}

/// Single-cell 802.16e frame-scheduling simulator: adaptive power-efficient
/// scheduling against a periodic power-save baseline.
#[derive(Debug, Parser)]
#[command(name = "apeps-sim", version)]
pub struct Cli {
    /// Configuration file (flat `key = value` lines, `#` comments).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Scheduler to simulate.
    #[arg(long)]
    scheduler: Option<SchedulerArg>,

    /// Number of mobile subscriber stations.
    #[arg(long, value_name = "N")]
    mss: Option<u32>,

    /// Channel error rate in [0, 1].
    #[arg(long, value_name = "X")]
    error_rate: Option<f64>,

    /// Simulation seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Simulation duration in seconds.
    #[arg(long, value_name = "S")]
    duration: Option<f64>,

    /// Output directory. Falls back to $APEPS_SIM_OUT, then ./out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Run a standard experiment sweep instead of a single simulation.
    #[arg(long, value_name = "NAME")]
    experiment: Option<ExperimentArg>,

    /// Comma-separated seeds for sweeps (default 1..20).
    #[arg(long, value_name = "LIST")]
    seeds: Option<String>,

    /// Parallel workers for sweep runs.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,

    /// Extra config override, repeatable. Applied after --config; the
    /// dedicated flags above take final precedence.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, ToolError> {
    let mut seeds = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        seeds.push(
            part.parse::<u64>()
                .map_err(|e| ToolError::Spec(format!("bad seed `{part}`: {e}")))?,
        );
    }
    Ok(seeds)
}

fn execute(cli: Cli) -> Result<(), ToolError> {
    let mut overlay = ConfigOverlay::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
        parse_config_text(&mut overlay, &text)?;
    }
    apply_overrides(&mut overlay, &cli.set)?;
    if let Some(s) = cli.scheduler {
        overlay.cfg.scheduler = s.into();
    }
    if let Some(n) = cli.mss {
        overlay.cfg.num_mss = n;
    }
    if let Some(x) = cli.error_rate {
        overlay.cfg.error_rate = x;
    }
    if let Some(n) = cli.seed {
        overlay.cfg.seed = n;
    }
    if let Some(s) = cli.duration {
        overlay.cfg.sim_duration_s = s;
    }
    let (cfg, vbr_path, channel_path) = overlay.finalize();
    let cfg = validate_config(cfg)?;

    let mut inputs = SimInputs::default();
    if let Some(path) = vbr_path {
        let text = fs::read_to_string(&path).map_err(|e| ToolError::io(&path, e))?;
        inputs.vbr_trace = Some(load_vbr_trace(&text)?);
    }
    if let Some(path) = channel_path {
        let text = fs::read_to_string(&path).map_err(|e| ToolError::io(&path, e))?;
        inputs.channel_trace = Some(ChannelTrace::parse(&text)?);
    }

    let out_dir = cli
        .out
        .or_else(|| std::env::var_os("APEPS_SIM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    match cli.experiment {
        None => {
            let report = run_single(&cfg, inputs, &out_dir)?;
            println!(
                "run complete: scheduler={} mss={} error_rate={} seed={}",
                cfg.scheduler, cfg.num_mss, cfg.error_rate, cfg.seed
            );
            println!(
                "  utilization={:.4} throughput={} pkts dropped={} energy={:.1} mJ/node delay={}",
                report.utilization,
                report.throughput_pkts,
                report.dropped_pkts,
                report.mean_energy_mj,
                report
                    .mean_delay_ms
                    .map(|d| format!("{d:.2} ms"))
                    .unwrap_or_else(|| "n/a".to_string()),
            );
            println!("  logs in {}", out_dir.display());
            Ok(())
        }
        Some(name) => {
            let seeds = match &cli.seeds {
                Some(text) => parse_seeds(text)?,
                None => (1..=20).collect(),
            };
            let spec = ExperimentSpec {
                name: name.into(),
                base: cfg,
                seeds,
                jobs: cli.jobs.unwrap_or_else(num_cpus_fallback),
                out_dir: out_dir.clone(),
                inputs,
            };
            let outcome = run_experiment(&spec)?;
            let total = outcome.reports.len() + outcome.failures.len();
            println!(
                "experiment {} complete: {} runs, {} failures; outputs in {}",
                spec.name.dir_name(),
                total,
                outcome.failures.len(),
                out_dir.join(spec.name.dir_name()).display()
            );
            if outcome.failures.is_empty() {
                Ok(())
            } else {
                Err(ToolError::SweepFailures { failed: outcome.failures.len(), total })
            }
        }
    }
}

fn num_cpus_fallback() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            // Chained causes (file paths etc).
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_list_parses() {
        assert_eq!(parse_seeds("1,2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds(" 7 , 9 ").unwrap(), vec![7, 9]);
        assert!(parse_seeds("").unwrap().is_empty());
        assert!(parse_seeds("x").is_err());
    }
}
