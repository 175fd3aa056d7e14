//! Run metrics (channel utilization, throughput, delay, energy) and
//! cross-seed sweep aggregation.

use alloc::vec::Vec;
use core::fmt;

use crate::config::{SchedulerKind, SimConfig, SourceKind};
use crate::engine::{EventKind, EventRecord, GrantEvent, GrantRecord, NodeEnergy, RunOutput};

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// Utilization over zero frames is undefined.
    ZeroFrames,
    /// Sweep aggregation needs reports that vary along exactly one
    /// dimension.
    MixedSweep,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::ZeroFrames => f.write_str("utilization undefined over zero frames"),
            MetricsError::MixedSweep => {
                f.write_str("sweep reports mix values on a non-swept dimension")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MetricsError {}

/// Identifies one run within a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepKey {
    pub scheduler: SchedulerKind,
    pub num_mss: u32,
    pub error_rate: f64,
    pub seed: u64,
}

/// All metrics of one completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub sweep_key: SweepKey,
    /// Delivered bytes over total frame capacity, in [0, 1].
    pub utilization: f64,
    pub utilization_by_class: [f64; 3],
    /// Packets received successfully.
    pub throughput_pkts: u64,
    /// Mean end-to-end delay over delivered packets; absent when nothing
    /// was delivered.
    pub mean_delay_ms: Option<f64>,
    pub delay_cbr_ms: Option<f64>,
    pub delay_vbr_ms: Option<f64>,
    /// Mean per-MSS total energy (base station excluded).
    pub mean_energy_mj: f64,
    pub dropped_pkts: u64,
    pub delivered_bytes: u64,
    pub delivered_bytes_by_class: [u64; 3],
}

/// Delivered bytes in the grant log over the total capacity of the run.
pub fn utilization(
    grants: &[GrantRecord],
    frames: u64,
    frame_capacity_bytes: u32,
) -> Result<f64, MetricsError> {
    if frames == 0 {
        return Err(MetricsError::ZeroFrames);
    }
    let delivered: u64 = grants
        .iter()
        .filter(|g| g.outcome == GrantEvent::Delivered)
        .map(|g| u64::from(g.bytes))
        .sum();
    Ok(delivered as f64 / (frame_capacity_bytes as f64 * frames as f64))
}

/// Per-class variant of [`utilization`].
pub fn utilization_by_class(
    grants: &[GrantRecord],
    frames: u64,
    frame_capacity_bytes: u32,
) -> Result<[f64; 3], MetricsError> {
    if frames == 0 {
        return Err(MetricsError::ZeroFrames);
    }
    let mut bytes = [0u64; 3];
    for g in grants.iter().filter(|g| g.outcome == GrantEvent::Delivered) {
        bytes[g.class.index()] += u64::from(g.bytes);
    }
    let denom = frame_capacity_bytes as f64 * frames as f64;
    Ok([bytes[0] as f64 / denom, bytes[1] as f64 / denom, bytes[2] as f64 / denom])
}

/// Mean delivery latency over surviving (delivered) packets only.
pub fn mean_delay(events: &[EventRecord]) -> Option<f64> {
    mean_delay_where(events, |_| true)
}

/// Mean delivery latency over delivered packets passing `filter`.
pub fn mean_delay_where(
    events: &[EventRecord],
    filter: impl Fn(&EventRecord) -> bool,
) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0u64;
    for e in events.iter().filter(|e| e.kind == EventKind::Deliver && filter(e)) {
        sum += e.delay_ms.expect("deliver events carry a delay");
        n += 1;
    }
    if n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}

/// Mean of per-station total energy. The base station is not a subscriber
/// station and is excluded unless explicitly appended by the caller.
pub fn mean_energy(node_energy: &[NodeEnergy]) -> f64 {
    if node_energy.is_empty() {
        return 0.0;
    }
    node_energy.iter().map(|e| e.total_mj).sum::<f64>() / node_energy.len() as f64
}

/// Builds the full report for one run.
pub fn report_from_run(out: &RunOutput, cfg: &SimConfig) -> Result<MetricsReport, MetricsError> {
    let key = SweepKey {
        scheduler: cfg.scheduler,
        num_mss: cfg.num_mss,
        error_rate: cfg.error_rate,
        seed: cfg.seed,
    };
    let mut delivered_bytes_by_class = [0u64; 3];
    for g in out.grants.iter().filter(|g| g.outcome == GrantEvent::Delivered) {
        delivered_bytes_by_class[g.class.index()] += u64::from(g.bytes);
    }
    let delivered_bytes: u64 = delivered_bytes_by_class.iter().sum();

    let source_of = |e: &EventRecord| out.connections[e.connection.0 as usize].source;
    let throughput_pkts =
        out.events.iter().filter(|e| e.kind == EventKind::Deliver).count() as u64;
    let dropped_pkts = out.events.iter().filter(|e| e.kind == EventKind::Drop).count() as u64;

    Ok(MetricsReport {
        sweep_key: key,
        utilization: utilization(&out.grants, out.frames, out.frame_capacity_bytes)?,
        utilization_by_class: utilization_by_class(
            &out.grants,
            out.frames,
            out.frame_capacity_bytes,
        )?,
        throughput_pkts,
        mean_delay_ms: mean_delay(&out.events),
        delay_cbr_ms: mean_delay_where(&out.events, |e| source_of(e) == SourceKind::Cbr),
        delay_vbr_ms: mean_delay_where(&out.events, |e| source_of(e) == SourceKind::Vbr),
        mean_energy_mj: mean_energy(&out.node_energy),
        dropped_pkts,
        delivered_bytes,
        delivered_bytes_by_class,
    })
}

/// The dimension a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDim {
    Mss,
    ErrorRate,
}

impl SweepDim {
    pub fn name(self) -> &'static str {
        match self {
            SweepDim::Mss => "mss",
            SweepDim::ErrorRate => "error_rate",
        }
    }

    fn value(self, key: &SweepKey) -> f64 {
        match self {
            SweepDim::Mss => key.num_mss as f64,
            SweepDim::ErrorRate => key.error_rate,
        }
    }

    /// The complementary dimension must stay fixed across the sweep.
    fn fixed_value(self, key: &SweepKey) -> f64 {
        match self {
            SweepDim::Mss => key.error_rate,
            SweepDim::ErrorRate => key.num_mss as f64,
        }
    }
}

pub const SWEEP_METRICS: [&str; 10] = [
    "utilization",
    "utilization_class1",
    "utilization_class2",
    "utilization_class3",
    "throughput_pkts",
    "mean_delay_ms",
    "delay_cbr_ms",
    "delay_vbr_ms",
    "mean_energy_mj",
    "dropped_pkts",
];

fn metric_value(report: &MetricsReport, metric: &str) -> Option<f64> {
    match metric {
        "utilization" => Some(report.utilization),
        "utilization_class1" => Some(report.utilization_by_class[0]),
        "utilization_class2" => Some(report.utilization_by_class[1]),
        "utilization_class3" => Some(report.utilization_by_class[2]),
        "throughput_pkts" => Some(report.throughput_pkts as f64),
        "mean_delay_ms" => report.mean_delay_ms,
        "delay_cbr_ms" => report.delay_cbr_ms,
        "delay_vbr_ms" => report.delay_vbr_ms,
        "mean_energy_mj" => Some(report.mean_energy_mj),
        "dropped_pkts" => Some(report.dropped_pkts as f64),
        _ => None,
    }
}

/// One aggregated cell of the sweep table: mean and sd of a metric across
/// seeds at one sweep point for one scheduler.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheduler: SchedulerKind,
    pub sweep_name: &'static str,
    pub sweep_value: f64,
    pub metric: &'static str,
    pub mean: f64,
    pub sd: f64,
    pub n_seeds: u32,
}

/// Aggregates per-seed reports into a sweep table ordered by scheduler,
/// sweep value, then metric. Reports must vary only along `dim`.
pub fn aggregate_sweep(
    dim: SweepDim,
    reports: &[MetricsReport],
) -> Result<Vec<SweepRow>, MetricsError> {
    if let Some(first) = reports.first() {
        let fixed = dim.fixed_value(&first.sweep_key);
        if reports.iter().any(|r| dim.fixed_value(&r.sweep_key) != fixed) {
            return Err(MetricsError::MixedSweep);
        }
    }

    let mut points: Vec<(SchedulerKind, f64)> = reports
        .iter()
        .map(|r| (r.sweep_key.scheduler, dim.value(&r.sweep_key)))
        .collect();
    points.sort_by(|a, b| a.0.name().cmp(b.0.name()).then(a.1.total_cmp(&b.1)));
    points.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let mut rows = Vec::new();
    for (scheduler, value) in points {
        for metric in SWEEP_METRICS {
            // Values sorted before summing so aggregation is invariant to
            // the input report order.
            let mut values: Vec<f64> = reports
                .iter()
                .filter(|r| {
                    r.sweep_key.scheduler == scheduler && dim.value(&r.sweep_key) == value
                })
                .filter_map(|r| metric_value(r, metric))
                .collect();
            if values.is_empty() {
                continue;
            }
            values.sort_by(f64::total_cmp);
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let sd = if values.len() < 2 {
                0.0
            } else {
                let var =
                    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
                crate::math::sqrt(var)
            };
            rows.push(SweepRow {
                scheduler,
                sweep_name: dim.name(),
                sweep_value: value,
                metric,
                mean,
                sd,
                n_seeds: values.len() as u32,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qos::{ConnectionId, NodeId, TrafficClass};

    fn delivered(frame: u64, class: TrafficClass, bytes: u32) -> GrantRecord {
        GrantRecord {
            frame,
            node: NodeId(0),
            connection: ConnectionId(0),
            class,
            bytes,
            request_frame: frame,
            outcome: GrantEvent::Delivered,
        }
    }

    #[test]
    fn utilization_empty_is_zero() {
        assert_eq!(utilization(&[], 100, 625).unwrap(), 0.0);
    }

    #[test]
    fn utilization_full_is_one() {
        let grants: Vec<GrantRecord> =
            (0..100).map(|m| delivered(m, TrafficClass::Class1, 625)).collect();
        assert_eq!(utilization(&grants, 100, 625).unwrap(), 1.0);
    }

    #[test]
    fn utilization_half() {
        // 5000 of 10000 frames carry a full 625 B delivered burst.
        let grants: Vec<GrantRecord> =
            (0..5000).map(|m| delivered(m * 2, TrafficClass::Class1, 625)).collect();
        assert_eq!(utilization(&grants, 10_000, 625).unwrap(), 0.5);
    }

    #[test]
    fn utilization_ignores_lost_and_placed() {
        let mut grants = alloc::vec![delivered(0, TrafficClass::Class1, 600)];
        grants.push(GrantRecord { outcome: GrantEvent::Lost, ..grants[0] });
        grants.push(GrantRecord { outcome: GrantEvent::Placed, ..grants[0] });
        let u = utilization(&grants, 10, 625).unwrap();
        assert!((u - 600.0 / 6250.0).abs() < 1e-15);
    }

    #[test]
    fn utilization_zero_frames_is_error() {
        assert_eq!(utilization(&[], 0, 625), Err(MetricsError::ZeroFrames));
    }

    #[test]
    fn class_utilizations_partition_overall() {
        let grants = alloc::vec![
            delivered(0, TrafficClass::Class1, 100),
            delivered(1, TrafficClass::Class2, 200),
            delivered(2, TrafficClass::Class3, 300),
            delivered(3, TrafficClass::Class1, 25),
        ];
        let total = utilization(&grants, 10, 625).unwrap();
        let by_class = utilization_by_class(&grants, 10, 625).unwrap();
        assert!((by_class.iter().sum::<f64>() - total).abs() < 1e-12);
    }

    fn deliver_event(delay_ms: f64) -> EventRecord {
        EventRecord {
            time_s: 0.0,
            frame: 0,
            node: NodeId(0),
            connection: ConnectionId(0),
            class: TrafficClass::Class1,
            kind: EventKind::Deliver,
            size_bytes: 100,
            delay_ms: Some(delay_ms),
        }
    }

    #[test]
    fn delay_mean_of_two() {
        let events = alloc::vec![deliver_event(10.0), deliver_event(20.0)];
        assert_eq!(mean_delay(&events), Some(15.0));
    }

    #[test]
    fn delay_none_when_nothing_delivered() {
        let drop = EventRecord { kind: EventKind::Drop, delay_ms: None, ..deliver_event(0.0) };
        assert_eq!(mean_delay(&[drop]), None);
    }

    fn energy(node: u32, total: f64) -> NodeEnergy {
        NodeEnergy {
            node: NodeId(node),
            tx_mj: 0.0,
            rx_mj: 0.0,
            listen_mj: 0.0,
            sleep_mj: total,
            total_mj: total,
        }
    }

    #[test]
    fn energy_mean() {
        assert_eq!(mean_energy(&[energy(0, 100.0), energy(1, 300.0)]), 200.0);
        assert_eq!(mean_energy(&[energy(0, 500.0)]), 500.0);
    }

    fn report(scheduler: SchedulerKind, mss: u32, err: f64, seed: u64, util: f64) -> MetricsReport {
        MetricsReport {
            sweep_key: SweepKey { scheduler, num_mss: mss, error_rate: err, seed },
            utilization: util,
            utilization_by_class: [util, 0.0, 0.0],
            throughput_pkts: 10,
            mean_delay_ms: Some(5.0),
            delay_cbr_ms: Some(5.0),
            delay_vbr_ms: None,
            mean_energy_mj: 100.0,
            dropped_pkts: 1,
            delivered_bytes: 1000,
            delivered_bytes_by_class: [1000, 0, 0],
        }
    }

    #[test]
    fn aggregate_shapes_and_order() {
        let mut reports = Vec::new();
        for mss in [2u32, 4, 6, 8, 10] {
            for seed in 1..=20u64 {
                for sched in [SchedulerKind::Apeps, SchedulerKind::Pbs] {
                    reports.push(report(sched, mss, 0.01, seed, 0.5));
                }
            }
        }
        let rows = aggregate_sweep(SweepDim::Mss, &reports).unwrap();
        // 2 schedulers x 5 points x metrics (delay_vbr_ms is absent).
        let metrics_present = SWEEP_METRICS.len() - 1;
        assert_eq!(rows.len(), 2 * 5 * metrics_present);
        let util_rows: Vec<&SweepRow> =
            rows.iter().filter(|r| r.metric == "utilization").collect();
        assert_eq!(util_rows.len(), 10);
        assert!(util_rows.iter().all(|r| r.n_seeds == 20 && r.sd == 0.0));
        // Ordered by scheduler then sweep value.
        let values: Vec<f64> = util_rows.iter().map(|r| r.sweep_value).collect();
        assert_eq!(values, alloc::vec![2.0, 4.0, 6.0, 8.0, 10.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn aggregate_single_report_sd_zero() {
        let rows =
            aggregate_sweep(SweepDim::Mss, &[report(SchedulerKind::Apeps, 4, 0.01, 1, 0.7)])
                .unwrap();
        let row = rows.iter().find(|r| r.metric == "utilization").unwrap();
        assert_eq!(row.mean, 0.7);
        assert_eq!(row.sd, 0.0);
        assert_eq!(row.n_seeds, 1);
    }

    #[test]
    fn aggregate_rejects_mixed_dimensions() {
        let reports = alloc::vec![
            report(SchedulerKind::Apeps, 2, 0.01, 1, 0.5),
            report(SchedulerKind::Apeps, 4, 0.02, 1, 0.5),
        ];
        assert_eq!(aggregate_sweep(SweepDim::Mss, &reports), Err(MetricsError::MixedSweep));
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let mut reports = Vec::new();
        for seed in 1..=7u64 {
            reports.push(report(SchedulerKind::Apeps, 4, 0.01, seed, 0.1 * seed as f64));
        }
        let forward = aggregate_sweep(SweepDim::Mss, &reports).unwrap();
        reports.reverse();
        let backward = aggregate_sweep(SweepDim::Mss, &reports).unwrap();
        assert_eq!(forward, backward);
    }
}
