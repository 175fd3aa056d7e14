//! Frame scheduling: request ordering, feasible-frame computation, frame
//! selection, grant placement, sleep-cycle generation, overflow slot
//! stealing, and the periodic baseline.

mod ledger;
mod overflow;
mod pbs;
mod sleep;

pub use ledger::{FrameLedger, Grant, LedgerError};
pub use overflow::{handle_overflow, OverflowCandidate, OverflowRecipient};
pub use pbs::pbs_schedule;
pub use sleep::{build_sleep_schedule, pbs_sleep_schedule, SleepSchedule, SleepState};

use alloc::vec::Vec;

use crate::traffic::BandwidthRequest;

/// Outcome of scheduling one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrantDecision {
    /// Bandwidth reserved; the ledger was updated.
    Placed(Grant),
    /// Nothing feasible this pass; the backlog re-enters the next frame's
    /// request snapshot.
    Deferred,
    /// Served by revoking a lower-priority grant (`donor`) and reusing its
    /// slot for `placed`.
    Stolen { placed: Grant, donor: Grant },
}

/// Scheduling deadline rule: a request observed at frame `k` may be served
/// in frame `m` only if the elapsed whole frames fit the delay constraint,
/// `(m - k + 1) * T_f <= DC`.
#[inline]
pub fn meets_deadline(frame: u64, observed: u64, frame_ms: f64, delay_constraint_ms: f64) -> bool {
    (frame - observed + 1) as f64 * frame_ms <= delay_constraint_ms
}

/// Orders pending requests for one scheduling pass: traffic class first
/// (Class1 served first), then absolute request deadline
/// (`observed_frame * T_f + DC`, ascending), then connection id.
pub fn sort_requests(requests: &mut [BandwidthRequest], frame_ms: f64) {
    requests.sort_by(|a, b| {
        let da = a.observed_frame as f64 * frame_ms + a.delay_constraint_ms;
        let db = b.observed_frame as f64 * frame_ms + b.delay_constraint_ms;
        a.class
            .cmp(&b.class)
            .then(da.total_cmp(&db))
            .then(a.connection_id.cmp(&b.connection_id))
    });
}

/// The set of frames that can hold `req` whole: at or after the observed
/// frame, within the ledger horizon, with enough remaining capacity, and
/// inside the delay window. Returned in ascending order; empty is valid.
pub fn feasible_frames(
    req: &BandwidthRequest,
    ledger: &FrameLedger,
    frame_ms: f64,
) -> Vec<u64> {
    let from = req.observed_frame.max(ledger.start());
    (from..ledger.end())
        .filter(|&m| {
            meets_deadline(m, req.observed_frame, frame_ms, req.delay_constraint_ms)
                && ledger.fits(m, req.bytes)
        })
        .collect()
}

/// Picks the frame to serve a request from a non-empty feasible set: the
/// earliest already-in-use frame when one exists, otherwise the last
/// (latest) frame, which keeps earlier frames open for later traffic.
pub fn select_frame(feasible: &[u64], in_use: impl Fn(u64) -> bool) -> Option<u64> {
    if feasible.is_empty() {
        return None;
    }
    feasible.iter().copied().find(|&m| in_use(m)).or_else(|| feasible.last().copied())
}

/// Schedules one request against the ledger: the whole request is placed in
/// the selected feasible frame, or deferred when nothing is feasible. There
/// are no partial grants.
pub fn schedule_request(
    req: &BandwidthRequest,
    ledger: &mut FrameLedger,
    frame_ms: f64,
) -> GrantDecision {
    let feasible = feasible_frames(req, ledger, frame_ms);
    let Some(frame) = select_frame(&feasible, |m| ledger.in_use(m)) else {
        return GrantDecision::Deferred;
    };
    let grant = Grant {
        frame,
        connection: req.connection_id,
        node: req.node_id,
        class: req.class,
        bytes: req.bytes,
        request_frame: req.observed_frame,
    };
    ledger
        .place(grant)
        .expect("selected frame came from the feasible set");
    GrantDecision::Placed(grant)
}

/// Runs one adaptive scheduling pass over pre-sorted requests, returning a
/// decision per request in input order.
pub fn apeps_schedule(
    requests: &[BandwidthRequest],
    ledger: &mut FrameLedger,
    frame_ms: f64,
) -> Vec<GrantDecision> {
    requests.iter().map(|req| schedule_request(req, ledger, frame_ms)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qos::{ConnectionId, NodeId, TrafficClass};

    pub(crate) fn request(
        conn: u32,
        class: TrafficClass,
        observed: u64,
        bytes: u32,
        dc_ms: f64,
    ) -> BandwidthRequest {
        BandwidthRequest {
            connection_id: ConnectionId(conn),
            node_id: NodeId(conn),
            class,
            observed_frame: observed,
            bytes,
            delay_constraint_ms: dc_ms,
        }
    }

    #[test]
    fn sort_class_dominates_deadline() {
        // A BE request with a tight deadline still queues behind UGS.
        let mut reqs = [
            request(1, TrafficClass::Class3, 0, 100, 10.0),
            request(2, TrafficClass::Class1, 0, 100, 100.0),
        ];
        sort_requests(&mut reqs, 5.0);
        assert_eq!(reqs[0].connection_id, ConnectionId(2));
    }

    #[test]
    fn sort_deadline_within_class() {
        let mut reqs = [
            request(1, TrafficClass::Class1, 0, 100, 20.0),
            request(2, TrafficClass::Class1, 0, 100, 15.0),
        ];
        sort_requests(&mut reqs, 5.0);
        assert_eq!(reqs[0].connection_id, ConnectionId(2));
    }

    #[test]
    fn sort_id_breaks_ties() {
        let mut reqs = [
            request(7, TrafficClass::Class2, 3, 100, 50.0),
            request(3, TrafficClass::Class2, 3, 100, 50.0),
        ];
        sort_requests(&mut reqs, 5.0);
        assert_eq!(reqs[0].connection_id, ConnectionId(3));
    }

    #[test]
    fn feasible_window_from_deadline() {
        // T_f = 5 ms, DC = 20 ms, observed at k = 10, empty ledger:
        // (m - 10 + 1) * 5 <= 20 admits m in {10, 11, 12, 13}.
        let ledger = FrameLedger::new(10, 20, 625, false);
        let req = request(0, TrafficClass::Class1, 10, 100, 20.0);
        assert_eq!(feasible_frames(&req, &ledger, 5.0), alloc::vec![10, 11, 12, 13]);
    }

    #[test]
    fn feasible_empty_when_capacity_short() {
        let mut ledger = FrameLedger::new(0, 10, 500, false);
        for m in 0..10 {
            ledger
                .place(Grant {
                    frame: m,
                    connection: ConnectionId(99),
                    node: NodeId(9),
                    class: TrafficClass::Class2,
                    bytes: 450,
                    request_frame: 0,
                })
                .unwrap();
        }
        let req = request(0, TrafficClass::Class1, 0, 100, 1000.0);
        assert!(feasible_frames(&req, &ledger, 5.0).is_empty());
    }

    #[test]
    fn feasible_single_gap() {
        // Frames full except frame 12 at 450/500; a 50 B request observed at
        // 10 with DC 20 ms fits only there.
        let mut ledger = FrameLedger::new(10, 10, 500, false);
        for m in 10..20 {
            let bytes = if m == 12 { 450 } else { 500 };
            ledger
                .place(Grant {
                    frame: m,
                    connection: ConnectionId(99),
                    node: NodeId(9),
                    class: TrafficClass::Class2,
                    bytes,
                    request_frame: 10,
                })
                .unwrap();
        }
        let req = request(0, TrafficClass::Class1, 10, 50, 20.0);
        assert_eq!(feasible_frames(&req, &ledger, 5.0), alloc::vec![12]);
    }

    #[test]
    fn select_prefers_earliest_in_use() {
        let used = [12u64, 14];
        let got = select_frame(&[12, 14], |m| used.contains(&m));
        assert_eq!(got, Some(12));
    }

    #[test]
    fn select_all_unused_takes_last() {
        let got = select_frame(&[11, 12, 13], |_| false);
        assert_eq!(got, Some(13));
    }

    #[test]
    fn select_mixed_prefers_in_use() {
        let got = select_frame(&[11, 13], |m| m == 13);
        assert_eq!(got, Some(13));
    }

    #[test]
    fn select_empty_is_none() {
        assert_eq!(select_frame(&[], |_| true), None);
    }

    #[test]
    fn schedule_places_last_frame_on_empty_horizon() {
        let mut ledger = FrameLedger::new(10, 20, 625, false);
        let req = request(0, TrafficClass::Class1, 10, 100, 20.0);
        match schedule_request(&req, &mut ledger, 5.0) {
            GrantDecision::Placed(g) => {
                assert_eq!(g.frame, 13);
                assert_eq!(ledger.allocated_bytes(13), 100);
            }
            other => panic!("expected placement, got {other:?}"),
        }
    }

    #[test]
    fn schedule_defers_when_nothing_feasible() {
        let mut ledger = FrameLedger::new(0, 5, 50, false);
        let req = request(0, TrafficClass::Class1, 0, 100, 100.0);
        assert_eq!(schedule_request(&req, &mut ledger, 5.0), GrantDecision::Deferred);
    }

    #[test]
    fn schedule_threads_ledger_state() {
        let mut ledger = FrameLedger::new(0, 4, 625, false);
        let req = request(0, TrafficClass::Class1, 0, 400, 20.0);
        for _ in 0..4 {
            // 400 B fits each of the four frames once (remaining 225 after).
            assert!(matches!(
                schedule_request(&req, &mut ledger, 5.0),
                GrantDecision::Placed(_)
            ));
        }
        assert_eq!(schedule_request(&req, &mut ledger, 5.0), GrantDecision::Deferred);
    }
}
