//! CSV renderers for run outputs. All formatting is fixed-width enough to be
//! byte-stable: identical runs produce identical files.

use std::fmt::Write as _;

use apeps_core::engine::{EventKind, RunOutput};
use apeps_core::metrics::MetricsReport;

/// `time_s,frame,node,connection,class,event,size_bytes,delay_ms`
/// (delay blank except on deliver rows).
pub fn events_csv(out: &RunOutput) -> String {
    let mut s = String::from("time_s,frame,node,connection,class,event,size_bytes,delay_ms\n");
    for e in &out.events {
        let _ = write!(
            s,
            "{:.6},{},{},{},{},{},{}",
            e.time_s,
            e.frame,
            e.node,
            e.connection,
            e.class,
            e.kind.name(),
            e.size_bytes
        );
        match (e.kind, e.delay_ms) {
            (EventKind::Deliver, Some(d)) => {
                let _ = writeln!(s, ",{d:.3}");
            }
            _ => s.push_str(",\n"),
        }
    }
    s
}

/// `frame,node,connection,class,bytes,request_frame,outcome`
pub fn grants_csv(out: &RunOutput) -> String {
    let mut s = String::from("frame,node,connection,class,bytes,request_frame,outcome\n");
    for g in &out.grants {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            g.frame,
            g.node,
            g.connection,
            g.class,
            g.bytes,
            g.request_frame,
            g.outcome.name()
        );
    }
    s
}

/// `node,tx_mj,rx_mj,listen_mj,sleep_mj,total_mj`; the base station is the
/// final `bs` row.
pub fn energy_csv(out: &RunOutput) -> String {
    let mut s = String::from("node,tx_mj,rx_mj,listen_mj,sleep_mj,total_mj\n");
    for e in &out.node_energy {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            e.node, e.tx_mj, e.rx_mj, e.listen_mj, e.sleep_mj, e.total_mj
        );
    }
    let b = &out.bs_energy;
    let _ = writeln!(
        s,
        "bs,{:.6},{:.6},{:.6},{:.6},{:.6}",
        b.tx_mj, b.rx_mj, b.listen_mj, b.sleep_mj, b.total_mj
    );
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// One wide row of per-run metrics.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let k = &report.sweep_key;
    let mut s = String::from(
        "scheduler,num_mss,error_rate,seed,utilization,utilization_class1,\
         utilization_class2,utilization_class3,throughput_pkts,mean_delay_ms,\
         delay_cbr_ms,delay_vbr_ms,mean_energy_mj,dropped_pkts,delivered_bytes\n",
    );
    let _ = writeln!(
        s,
        "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{:.6},{},{}",
        k.scheduler,
        k.num_mss,
        k.error_rate,
        k.seed,
        report.utilization,
        report.utilization_by_class[0],
        report.utilization_by_class[1],
        report.utilization_by_class[2],
        report.throughput_pkts,
        opt(report.mean_delay_ms),
        opt(report.delay_cbr_ms),
        opt(report.delay_vbr_ms),
        report.mean_energy_mj,
        report.dropped_pkts,
        report.delivered_bytes
    );
    s
}

/// `scheduler,sweep_name,sweep_value,metric,mean,sd,n_seeds`
pub fn sweep_csv(rows: &[apeps_core::metrics::SweepRow]) -> String {
    let mut s = String::from("scheduler,sweep_name,sweep_value,metric,mean,sd,n_seeds\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{:.6},{}",
            r.scheduler, r.sweep_name, r.sweep_value, r.metric, r.mean, r.sd, r.n_seeds
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use apeps_core::config::SimConfig;
    use apeps_core::metrics::report_from_run;
    use apeps_core::run_simulation;

    #[test]
    fn csv_rendering_is_byte_stable() {
        let cfg = SimConfig { num_mss: 2, sim_duration_s: 1.0, ..SimConfig::default() };
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(events_csv(&a), events_csv(&b));
        assert_eq!(grants_csv(&a), grants_csv(&b));
        assert_eq!(energy_csv(&a), energy_csv(&b));
        let ra = report_from_run(&a, &cfg).unwrap();
        let rb = report_from_run(&b, &cfg).unwrap();
        assert_eq!(metrics_csv(&ra), metrics_csv(&rb));
    }

    #[test]
    fn event_rows_have_delay_only_on_deliver() {
        let cfg = SimConfig { num_mss: 1, sim_duration_s: 0.5, ..SimConfig::default() };
        let out = run_simulation(&cfg).unwrap();
        let csv = events_csv(&out);
        for line in csv.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 8, "{line}");
            if fields[5] == "deliver" {
                assert!(!fields[7].is_empty());
            } else {
                assert!(fields[7].is_empty());
            }
        }
    }
}
