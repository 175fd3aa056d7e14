//! Sleep/listen cycle generation.
//!
//! The adaptive scheme derives the cycle from the grant map each frame: a
//! node listens exactly in the frames where it sends or receives a grant and
//! sleeps everywhere else. The periodic baseline ignores traffic and repeats
//! a fixed listen/sleep window.

use alloc::vec::Vec;

use crate::config::PbsConfig;
use crate::qos::NodeId;
use crate::scheduler::FrameLedger;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SleepState {
    Sleep,
    Listen,
}

/// Per-node power plan over a contiguous frame window.
#[derive(Debug, Clone, PartialEq)]
pub struct SleepSchedule {
    pub node_id: NodeId,
    pub start: u64,
    pub states: Vec<SleepState>,
}

impl SleepSchedule {
    pub fn state(&self, frame: u64) -> Option<SleepState> {
        if frame < self.start {
            return None;
        }
        self.states.get((frame - self.start) as usize).copied()
    }

    pub fn is_listen(&self, frame: u64) -> bool {
        self.state(frame) == Some(SleepState::Listen)
    }

    pub fn listen_frames(&self) -> impl Iterator<Item = u64> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == SleepState::Listen)
            .map(move |(i, _)| self.start + i as u64)
    }
}

/// Adaptive cycle for `node_id` over the ledger horizon: listen exactly
/// where the node holds a grant, sleep elsewhere.
pub fn build_sleep_schedule(node_id: NodeId, ledger: &FrameLedger) -> SleepSchedule {
    let mut states = Vec::with_capacity(ledger.horizon());
    states.resize(ledger.horizon(), SleepState::Sleep);
    for grant in ledger.grants_from(ledger.start()) {
        if grant.node == node_id {
            states[(grant.frame - ledger.start()) as usize] = SleepState::Listen;
        }
    }
    SleepSchedule { node_id, start: ledger.start(), states }
}

/// Fixed periodic cycle for the baseline, independent of traffic.
pub fn pbs_sleep_schedule(
    node_id: NodeId,
    start: u64,
    horizon: usize,
    pbs: &PbsConfig,
) -> SleepSchedule {
    let states = (start..start + horizon as u64)
        .map(|m| if pbs.is_listen_frame(m) { SleepState::Listen } else { SleepState::Sleep })
        .collect();
    SleepSchedule { node_id, start, states }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qos::{ConnectionId, TrafficClass};
    use crate::scheduler::Grant;

    fn grant(frame: u64, node: u32) -> Grant {
        Grant {
            frame,
            connection: ConnectionId(node),
            node: NodeId(node),
            class: TrafficClass::Class1,
            bytes: 100,
            request_frame: frame,
        }
    }

    #[test]
    fn listen_exactly_on_grant_frames() {
        let mut ledger = FrameLedger::new(10, 6, 625, false);
        ledger.place(grant(10, 1)).unwrap();
        ledger.place(grant(13, 1)).unwrap();
        ledger.place(grant(12, 2)).unwrap();
        let schedule = build_sleep_schedule(NodeId(1), &ledger);
        let listen: Vec<u64> = schedule.listen_frames().collect();
        assert_eq!(listen, alloc::vec![10, 13]);
        for m in [11, 12, 14, 15] {
            assert_eq!(schedule.state(m), Some(SleepState::Sleep));
        }
    }

    #[test]
    fn idle_node_sleeps_entire_horizon() {
        let ledger = FrameLedger::new(0, 8, 625, false);
        let schedule = build_sleep_schedule(NodeId(4), &ledger);
        assert_eq!(schedule.listen_frames().count(), 0);
    }

    #[test]
    fn saturated_node_never_sleeps() {
        let mut ledger = FrameLedger::new(0, 5, 625, false);
        for m in 0..5 {
            ledger.place(grant(m, 3)).unwrap();
        }
        let schedule = build_sleep_schedule(NodeId(3), &ledger);
        assert_eq!(schedule.listen_frames().count(), 5);
    }

    #[test]
    fn periodic_pattern_ignores_traffic() {
        let pbs = PbsConfig { listen_frames: 2, sleep_frames: 4 };
        let schedule = pbs_sleep_schedule(NodeId(0), 4, 10, &pbs);
        let listen: Vec<u64> = schedule.listen_frames().collect();
        assert_eq!(listen, alloc::vec![6, 7, 12, 13]);
    }
}
