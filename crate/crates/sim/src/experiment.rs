//! Single runs and the two standard experiment sweeps, with aggregation to
//! CSV tables and SVG figures.

use std::fs;
use std::path::{Path, PathBuf};

use apeps_core::config::{SchedulerKind, SimConfig};
use apeps_core::engine::{run_simulation_with, SimInputs};
use apeps_core::metrics::{aggregate_sweep, report_from_run, MetricsReport, SweepDim, SweepRow};
use rayon::prelude::*;

use crate::configfile::render_config;
use crate::error::ToolError;
use crate::logs;
use crate::svg::{line_chart, Series};

pub const MSS_POINTS: [u32; 5] = [2, 4, 6, 8, 10];
pub const ERROR_POINTS: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];
const SCHEDULERS: [SchedulerKind; 2] = [SchedulerKind::Apeps, SchedulerKind::Pbs];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    VaryMss,
    VaryErrorRate,
}

impl ExperimentName {
    pub fn dir_name(self) -> &'static str {
        match self {
            ExperimentName::VaryMss => "vary_mss",
            ExperimentName::VaryErrorRate => "vary_error_rate",
        }
    }
}

/// A full experiment: base config, seed list, parallelism, output root.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub base: SimConfig,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub inputs: SimInputs,
}

fn write(path: &Path, content: &str) -> Result<(), ToolError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| ToolError::io(parent, e))?;
    }
    fs::write(path, content).map_err(|e| ToolError::io(path, e))
}

/// Runs one simulation and writes the full log set to `out_dir`:
/// `events.csv`, `grants.csv`, `energy.csv`, `metrics.csv`, and the
/// resolved configuration.
pub fn run_single(
    cfg: &SimConfig,
    inputs: SimInputs,
    out_dir: &Path,
) -> Result<MetricsReport, ToolError> {
    let out = run_simulation_with(cfg, inputs)?;
    let report = report_from_run(&out, cfg).expect("completed runs have frames");
    write(&out_dir.join("events.csv"), &logs::events_csv(&out))?;
    write(&out_dir.join("grants.csv"), &logs::grants_csv(&out))?;
    write(&out_dir.join("energy.csv"), &logs::energy_csv(&out))?;
    write(&out_dir.join("metrics.csv"), &logs::metrics_csv(&report))?;
    write(&out_dir.join("config_resolved.txt"), &render_config(cfg))?;
    Ok(report)
}

struct RunPlan {
    label: String,
    cfg: SimConfig,
    /// Which flavor sweep this run belongs to (error-rate experiment only).
    flavor: Option<&'static str>,
}

fn vary_mss_plans(spec: &ExperimentSpec) -> Vec<RunPlan> {
    let mut plans = Vec::new();
    for &scheduler in &SCHEDULERS {
        for &mss in &MSS_POINTS {
            for &seed in &spec.seeds {
                let cfg =
                    SimConfig { scheduler, num_mss: mss, seed, ..spec.base.clone() };
                plans.push(RunPlan {
                    label: format!("{}_mss{}_seed{}", scheduler, mss, seed),
                    cfg,
                    flavor: None,
                });
            }
        }
    }
    plans
}

fn vary_error_plans(spec: &ExperimentSpec) -> Vec<RunPlan> {
    let mut plans = Vec::new();
    for (flavor, keep_cbr) in [("cbr", true), ("vbr", false)] {
        for &scheduler in &SCHEDULERS {
            for &error_rate in &ERROR_POINTS {
                for &seed in &spec.seeds {
                    let mut cfg =
                        SimConfig { scheduler, error_rate, seed, ..spec.base.clone() };
                    // Class1 carries only the flavor's source type; Class2
                    // and Class3 background stays.
                    if keep_cbr {
                        cfg.traffic.vbr_flows_per_mss = 0;
                    } else {
                        cfg.traffic.cbr_flows_per_mss = 0;
                    }
                    plans.push(RunPlan {
                        label: format!("{}_{}_err{}_seed{}", flavor, scheduler, error_rate, seed),
                        cfg,
                        flavor: Some(flavor),
                    });
                }
            }
        }
    }
    plans
}

fn series(rows: &[SweepRow], scheduler: SchedulerKind, metric: &str, name: &str) -> Series {
    Series {
        name: name.to_string(),
        points: rows
            .iter()
            .filter(|r| r.scheduler == scheduler && r.metric == metric)
            .map(|r| (r.sweep_value, r.mean))
            .collect(),
    }
}

fn mss_figures(rows: &[SweepRow]) -> Vec<(&'static str, String)> {
    let pair = |metric: &str| {
        vec![
            series(rows, SchedulerKind::Apeps, metric, "apeps"),
            series(rows, SchedulerKind::Pbs, metric, "pbs"),
        ]
    };
    vec![
        (
            "fig_utilization.svg",
            line_chart("MSS Vs Utilization", "MSS", "Utilization", &pair("utilization")),
        ),
        (
            "fig_delay_cbr.svg",
            line_chart("MSS Vs Delay (CBR)", "MSS", "Delay (ms)", &pair("delay_cbr_ms")),
        ),
        (
            "fig_delay_vbr.svg",
            line_chart("MSS Vs Delay (VBR)", "MSS", "Delay (ms)", &pair("delay_vbr_ms")),
        ),
        (
            "fig_throughput.svg",
            line_chart(
                "MSS Vs Throughput",
                "MSS",
                "Throughput (packets)",
                &pair("throughput_pkts"),
            ),
        ),
        (
            "fig_energy.svg",
            line_chart("MSS Vs Energy", "MSS", "Energy (mJ)", &pair("mean_energy_mj")),
        ),
    ]
}

fn error_figures(flavor: &str, rows: &[SweepRow]) -> Vec<(String, String)> {
    let label = flavor.to_uppercase();
    let class_series = vec![
        series(rows, SchedulerKind::Apeps, "utilization_class1", "apeps class1"),
        series(rows, SchedulerKind::Apeps, "utilization_class2", "apeps class2"),
        series(rows, SchedulerKind::Pbs, "utilization_class1", "pbs class1"),
        series(rows, SchedulerKind::Pbs, "utilization_class2", "pbs class2"),
    ];
    let delay_metric = format!("delay_{flavor}_ms");
    let delay_series = vec![
        series(rows, SchedulerKind::Apeps, &delay_metric, "apeps"),
        series(rows, SchedulerKind::Pbs, &delay_metric, "pbs"),
    ];
    vec![
        (
            format!("fig_utilization_{flavor}.svg"),
            line_chart(
                &format!("Error Rate Vs Utilization ({label})"),
                "Error Rate",
                "Utilization",
                &class_series,
            ),
        ),
        (
            format!("fig_delay_{flavor}.svg"),
            line_chart(
                &format!("Error Rate Vs Delay ({label})"),
                "Error Rate",
                "Delay (ms)",
                &delay_series,
            ),
        ),
    ]
}

/// Everything a finished experiment produced, for callers that assert on it.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub reports: Vec<(Option<&'static str>, MetricsReport)>,
    pub tables: Vec<(String, Vec<SweepRow>)>,
    pub failures: Vec<(String, String)>,
}

/// Runs the sweep described by `spec`: every run writes its metrics under
/// `runs/<label>/`, aggregates land in sweep CSV tables, and each figure
/// analogue is emitted as an SVG. Individual run failures are recorded and
/// the sweep continues.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, ToolError> {
    if spec.seeds.is_empty() {
        return Err(ToolError::Spec("seed list must not be empty".to_string()));
    }
    let root = spec.out_dir.join(spec.name.dir_name());
    fs::create_dir_all(&root).map_err(|e| ToolError::io(&root, e))?;

    let plans = match spec.name {
        ExperimentName::VaryMss => vary_mss_plans(spec),
        ExperimentName::VaryErrorRate => vary_error_plans(spec),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs.max(1))
        .build()
        .expect("thread pool construction");
    let results: Vec<Result<MetricsReport, ToolError>> = pool.install(|| {
        plans
            .par_iter()
            .map(|plan| {
                let out = run_simulation_with(&plan.cfg, spec.inputs.clone())?;
                let report =
                    report_from_run(&out, &plan.cfg).expect("completed runs have frames");
                write(
                    &root.join("runs").join(&plan.label).join("metrics.csv"),
                    &logs::metrics_csv(&report),
                )?;
                Ok(report)
            })
            .collect()
    });

    let mut reports: Vec<(Option<&'static str>, MetricsReport)> = Vec::new();
    let mut failures: Vec<(String, String)> = Vec::new();
    for (plan, result) in plans.iter().zip(results) {
        match result {
            Ok(report) => reports.push((plan.flavor, report)),
            Err(e) => failures.push((plan.label.clone(), e.to_string())),
        }
    }

    let mut tables: Vec<(String, Vec<SweepRow>)> = Vec::new();
    match spec.name {
        ExperimentName::VaryMss => {
            let all: Vec<MetricsReport> = reports.iter().map(|(_, r)| r.clone()).collect();
            let rows = aggregate_sweep(SweepDim::Mss, &all)
                .map_err(|e| ToolError::Spec(e.to_string()))?;
            write(&root.join("sweep.csv"), &logs::sweep_csv(&rows))?;
            for (name, content) in mss_figures(&rows) {
                write(&root.join(name), &content)?;
            }
            tables.push(("sweep.csv".to_string(), rows));
        }
        ExperimentName::VaryErrorRate => {
            for flavor in ["cbr", "vbr"] {
                let subset: Vec<MetricsReport> = reports
                    .iter()
                    .filter(|(f, _)| *f == Some(flavor))
                    .map(|(_, r)| r.clone())
                    .collect();
                let rows = aggregate_sweep(SweepDim::ErrorRate, &subset)
                    .map_err(|e| ToolError::Spec(e.to_string()))?;
                write(&root.join(format!("sweep_{flavor}.csv")), &logs::sweep_csv(&rows))?;
                for (name, content) in error_figures(flavor, &rows) {
                    write(&root.join(name), &content)?;
                }
                tables.push((format!("sweep_{flavor}.csv"), rows));
            }
        }
    }

    if !failures.is_empty() {
        let mut text = String::new();
        for (label, error) in &failures {
            text.push_str(label);
            text.push_str(": ");
            text.push_str(error);
            text.push('\n');
        }
        write(&root.join("failures.txt"), &text)?;
    }

    Ok(ExperimentOutcome { reports, tables, failures })
}
