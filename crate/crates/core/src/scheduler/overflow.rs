//! Overflow slot stealing.
//!
//! A bad-channel (Group2) node whose Class1 queue grows past the threshold
//! gets priority boosted at the expense of good-channel nodes: one Class2 or
//! Class3 grant of a Group1 node is revoked — extending that donor's sleep —
//! and the freed slot carries the overflowing Class1 backlog instead.

use alloc::vec::Vec;

use crate::channel::Group;
use crate::qos::{ConnectionId, NodeId, TrafficClass};
use crate::scheduler::{meets_deadline, FrameLedger, Grant, GrantDecision};

/// The Class1 connection that receives stolen capacity for a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverflowRecipient {
    pub connection_id: ConnectionId,
    /// Queued Class1 bytes not yet covered by an outstanding grant.
    pub ungranted_bytes: u64,
    pub delay_constraint_ms: f64,
}

/// A Group2 node inspected for overflow, with its Class1 queue length in
/// packets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverflowCandidate {
    pub node_id: NodeId,
    pub class1_queue_pkts: u32,
    pub recipient: Option<OverflowRecipient>,
}

/// Runs the overflow pass for frame `now`. For each candidate over the
/// queue threshold, the best donor grant is revoked and its slot re-granted
/// to the candidate's Class1 backlog, capped at the revoked byte count.
///
/// Donor preference: Class3 grants before Class2, then the nearest frame,
/// then the lowest connection id. A donor must belong to a Group1 node and
/// its frame must satisfy the recipient's delay constraint measured from
/// `now`. Candidates without a usable donor are left unchanged.
pub fn handle_overflow(
    candidates: &[OverflowCandidate],
    node_group: impl Fn(NodeId) -> Group,
    ledger: &mut FrameLedger,
    queue_threshold_pkts: u32,
    frame_ms: f64,
    now: u64,
) -> Vec<GrantDecision> {
    let mut decisions = Vec::new();
    for candidate in candidates {
        if candidate.class1_queue_pkts <= queue_threshold_pkts {
            continue;
        }
        let Some(recipient) = candidate.recipient else { continue };
        if recipient.ungranted_bytes == 0 {
            continue;
        }
        let donor = ledger
            .grants_from(now)
            .filter(|g| {
                g.class != TrafficClass::Class1
                    && node_group(g.node) == Group::Group1
                    && meets_deadline(g.frame, now, frame_ms, recipient.delay_constraint_ms)
            })
            .min_by_key(|g| (core::cmp::Reverse(g.class), g.frame, g.connection))
            .copied();
        let Some(donor) = donor else { continue };
        let revoked =
            ledger.revoke(&donor).expect("donor grant was just found in the ledger");
        let placed = Grant {
            frame: revoked.frame,
            connection: recipient.connection_id,
            node: candidate.node_id,
            class: TrafficClass::Class1,
            bytes: u64::from(revoked.bytes).min(recipient.ungranted_bytes) as u32,
            request_frame: now,
        };
        ledger
            .place(placed)
            .expect("stolen bytes fit the capacity just freed");
        decisions.push(GrantDecision::Stolen { placed, donor: revoked });
    }
    decisions
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grant(frame: u64, conn: u32, node: u32, class: TrafficClass, bytes: u32) -> Grant {
        Grant {
            frame,
            connection: ConnectionId(conn),
            node: NodeId(node),
            class,
            bytes,
            request_frame: frame,
        }
    }

    fn candidate(node: u32, queue: u32, backlog: u64) -> OverflowCandidate {
        OverflowCandidate {
            node_id: NodeId(node),
            class1_queue_pkts: queue,
            recipient: Some(OverflowRecipient {
                connection_id: ConnectionId(100 + node),
                ungranted_bytes: backlog,
                delay_constraint_ms: 50.0,
            }),
        }
    }

    /// Everyone but node 9 has a good channel.
    fn groups(node: NodeId) -> Group {
        if node == NodeId(9) {
            Group::Group2
        } else {
            Group::Group1
        }
    }

    #[test]
    fn steals_class3_grant_and_regrants() {
        let mut ledger = FrameLedger::new(0, 10, 625, false);
        ledger.place(grant(4, 1, 1, TrafficClass::Class3, 300)).unwrap();
        let out =
            handle_overflow(&[candidate(9, 11, 500)], groups, &mut ledger, 10, 5.0, 0);
        assert_eq!(out.len(), 1);
        let GrantDecision::Stolen { placed, donor } = out[0] else {
            panic!("expected steal");
        };
        assert_eq!(donor.connection, ConnectionId(1));
        assert_eq!(placed.frame, 4);
        assert_eq!(placed.bytes, 300);
        assert_eq!(placed.class, TrafficClass::Class1);
        // Donor's slot now carries the recipient; donor has nothing left in
        // frame 4, so its adaptive schedule sleeps there.
        let grants = ledger.grants_in(4);
        assert_eq!(grants.len(), 1);
        assert_eq!(grants[0].node, NodeId(9));
        ledger.check_invariants().unwrap();
    }

    #[test]
    fn below_threshold_is_untouched() {
        let mut ledger = FrameLedger::new(0, 10, 625, false);
        ledger.place(grant(4, 1, 1, TrafficClass::Class3, 300)).unwrap();
        let out =
            handle_overflow(&[candidate(9, 10, 500)], groups, &mut ledger, 10, 5.0, 0);
        assert!(out.is_empty());
        assert_eq!(ledger.grants_in(4).len(), 1);
    }

    #[test]
    fn no_donor_means_no_change() {
        let mut ledger = FrameLedger::new(0, 10, 625, false);
        // Only Class1 grants exist; they are never revoked.
        ledger.place(grant(4, 1, 1, TrafficClass::Class1, 300)).unwrap();
        let out =
            handle_overflow(&[candidate(9, 11, 500)], groups, &mut ledger, 10, 5.0, 0);
        assert!(out.is_empty());
        assert_eq!(ledger.grants_in(4)[0].connection, ConnectionId(1));
    }

    #[test]
    fn donor_order_class3_then_frame_then_id() {
        let mut ledger = FrameLedger::new(0, 10, 625, false);
        ledger.place(grant(2, 1, 1, TrafficClass::Class2, 100)).unwrap();
        ledger.place(grant(6, 3, 2, TrafficClass::Class3, 100)).unwrap();
        ledger.place(grant(6, 2, 3, TrafficClass::Class3, 100)).unwrap();
        let out =
            handle_overflow(&[candidate(9, 11, 500)], groups, &mut ledger, 10, 5.0, 0);
        let GrantDecision::Stolen { donor, .. } = out[0] else { panic!() };
        // Class3 beats the earlier Class2 frame; id 2 beats id 3.
        assert_eq!(donor.connection, ConnectionId(2));
        assert_eq!(donor.frame, 6);
    }

    #[test]
    fn donor_frame_must_fit_recipient_deadline() {
        let mut ledger = FrameLedger::new(0, 20, 625, false);
        ledger.place(grant(15, 1, 1, TrafficClass::Class3, 100)).unwrap();
        // DC 50 ms at 5 ms frames admits frames 0..=9 only.
        let out =
            handle_overflow(&[candidate(9, 11, 500)], groups, &mut ledger, 10, 5.0, 0);
        assert!(out.is_empty());
    }

    #[test]
    fn group2_grants_are_not_donors() {
        let mut ledger = FrameLedger::new(0, 10, 625, false);
        ledger.place(grant(4, 1, 9, TrafficClass::Class3, 300)).unwrap();
        let out =
            handle_overflow(&[candidate(9, 11, 500)], groups, &mut ledger, 10, 5.0, 0);
        assert!(out.is_empty());
    }

    #[test]
    fn steal_caps_at_backlog() {
        let mut ledger = FrameLedger::new(0, 10, 625, false);
        ledger.place(grant(4, 1, 1, TrafficClass::Class2, 500)).unwrap();
        let out =
            handle_overflow(&[candidate(9, 11, 120)], groups, &mut ledger, 10, 5.0, 0);
        let GrantDecision::Stolen { placed, .. } = out[0] else { panic!() };
        assert_eq!(placed.bytes, 120);
        assert_eq!(ledger.allocated_bytes(4), 120);
    }
}
