//! Periodic power-save baseline scheduling.
//!
//! Grants may land only in the fixed periodic listen windows; within them
//! the earliest frame that fits and meets the deadline wins. No channel
//! awareness, no frame-selection heuristics, no slot stealing.

use alloc::vec::Vec;

use crate::config::PbsConfig;
use crate::scheduler::{meets_deadline, FrameLedger, Grant, GrantDecision};
use crate::traffic::BandwidthRequest;

/// Schedules pre-sorted requests first-fit into listen frames, returning a
/// decision per request in input order. Requests that fit no listen frame
/// within their delay window are deferred.
pub fn pbs_schedule(
    requests: &[BandwidthRequest],
    ledger: &mut FrameLedger,
    pbs: &PbsConfig,
    frame_ms: f64,
) -> Vec<GrantDecision> {
    requests
        .iter()
        .map(|req| {
            let from = req.observed_frame.max(ledger.start());
            let frame = (from..ledger.end()).find(|&m| {
                pbs.is_listen_frame(m)
                    && meets_deadline(m, req.observed_frame, frame_ms, req.delay_constraint_ms)
                    && ledger.fits(m, req.bytes)
            });
            match frame {
                Some(frame) => {
                    let grant = Grant {
                        frame,
                        connection: req.connection_id,
                        node: req.node_id,
                        class: req.class,
                        bytes: req.bytes,
                        request_frame: req.observed_frame,
                    };
                    ledger.place(grant).expect("frame passed the fit check");
                    GrantDecision::Placed(grant)
                }
                None => GrantDecision::Deferred,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qos::{ConnectionId, NodeId, TrafficClass};

    fn request(conn: u32, observed: u64, bytes: u32, dc_ms: f64) -> BandwidthRequest {
        BandwidthRequest {
            connection_id: ConnectionId(conn),
            node_id: NodeId(conn),
            class: TrafficClass::Class1,
            observed_frame: observed,
            bytes,
            delay_constraint_ms: dc_ms,
        }
    }

    fn pbs() -> PbsConfig {
        // Listen frames: 12, 13, 18, 19, 24, 25, ...
        PbsConfig { listen_frames: 2, sleep_frames: 4 }
    }

    #[test]
    fn first_fit_in_listen_window() {
        let mut ledger = FrameLedger::new(12, 12, 625, false);
        let out = pbs_schedule(&[request(0, 12, 100, 60.0)], &mut ledger, &pbs(), 5.0);
        assert_eq!(out, alloc::vec![GrantDecision::Placed(Grant {
            frame: 12,
            connection: ConnectionId(0),
            node: NodeId(0),
            class: TrafficClass::Class1,
            bytes: 100,
            request_frame: 12,
        })]);
    }

    #[test]
    fn sleep_phase_arrival_misses_deadline() {
        // Observed at 14 (sleep phase), next listen frame is 18, but
        // (18 - 14 + 1) * 5 = 25 ms exceeds the 10 ms constraint.
        let mut ledger = FrameLedger::new(14, 12, 625, false);
        let out = pbs_schedule(&[request(0, 14, 100, 10.0)], &mut ledger, &pbs(), 5.0);
        assert_eq!(out, alloc::vec![GrantDecision::Deferred]);
    }

    #[test]
    fn sleep_phase_arrival_waits_for_listen() {
        let mut ledger = FrameLedger::new(14, 12, 625, false);
        let out = pbs_schedule(&[request(0, 14, 100, 40.0)], &mut ledger, &pbs(), 5.0);
        let GrantDecision::Placed(g) = out[0] else { panic!() };
        assert_eq!(g.frame, 18);
    }

    #[test]
    fn full_listen_windows_defer() {
        let mut ledger = FrameLedger::new(12, 6, 625, false);
        // Fill both listen frames in range (12, 13); 18 is out of horizon.
        for m in [12u64, 13] {
            ledger
                .place(Grant {
                    frame: m,
                    connection: ConnectionId(50),
                    node: NodeId(5),
                    class: TrafficClass::Class2,
                    bytes: 625,
                    request_frame: 12,
                })
                .unwrap();
        }
        let out = pbs_schedule(&[request(0, 12, 100, 200.0)], &mut ledger, &pbs(), 5.0);
        assert_eq!(out, alloc::vec![GrantDecision::Deferred]);
    }

    #[test]
    fn never_places_outside_listen_frames() {
        let mut ledger = FrameLedger::new(12, 30, 625, false);
        let reqs: Vec<BandwidthRequest> =
            (0..20).map(|i| request(i, 12, 200, 300.0)).collect();
        let out = pbs_schedule(&reqs, &mut ledger, &pbs(), 5.0);
        for decision in out {
            if let GrantDecision::Placed(g) = decision {
                assert!(pbs().is_listen_frame(g.frame), "grant in sleep frame {}", g.frame);
            }
        }
    }
}
