//! The rolling frame ledger: per-frame capacity, allocations, and grants
//! over the scheduling horizon.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::qos::{ConnectionId, NodeId, TrafficClass};

/// Bandwidth reserved in one frame for one connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grant {
    pub frame: u64,
    pub connection: ConnectionId,
    pub node: NodeId,
    pub class: TrafficClass,
    pub bytes: u32,
    /// Frame at which the underlying request was observed.
    pub request_frame: u64,
}

#[derive(Debug, Clone, Default)]
struct FrameSlot {
    allocated: u32,
    grants: Vec<Grant>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LedgerError {
    FrameOutOfHorizon { frame: u64, start: u64, end: u64 },
    CapacityExceeded { frame: u64, allocated: u32, capacity: u32, bytes: u32 },
    Inconsistent { frame: u64, reason: String },
}

impl fmt::Display for LedgerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LedgerError::FrameOutOfHorizon { frame, start, end } => {
                write!(f, "frame {frame} outside ledger horizon [{start}, {end})")
            }
            LedgerError::CapacityExceeded { frame, allocated, capacity, bytes } => write!(
                f,
                "frame {frame}: placing {bytes} B over {allocated}/{capacity} B already allocated"
            ),
            LedgerError::Inconsistent { frame, reason } => {
                write!(f, "ledger invariant broken at frame {frame}: {reason}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LedgerError {}

/// Frame-indexed bandwidth ledger over a contiguous horizon
/// `[start, start + horizon)`. Every frame has the same byte capacity;
/// allocations never exceed it.
#[derive(Debug, Clone)]
pub struct FrameLedger {
    start: u64,
    capacity_bytes: u32,
    strict_capacity: bool,
    slots: VecDeque<FrameSlot>,
}

impl FrameLedger {
    pub fn new(start: u64, horizon: usize, capacity_bytes: u32, strict_capacity: bool) -> Self {
        let mut slots = VecDeque::with_capacity(horizon);
        slots.resize_with(horizon, FrameSlot::default);
        FrameLedger { start, capacity_bytes, strict_capacity, slots }
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// First frame index past the horizon.
    pub fn end(&self) -> u64 {
        self.start + self.slots.len() as u64
    }

    pub fn horizon(&self) -> usize {
        self.slots.len()
    }

    pub fn capacity_bytes(&self) -> u32 {
        self.capacity_bytes
    }

    pub fn contains(&self, frame: u64) -> bool {
        frame >= self.start && frame < self.end()
    }

    fn slot(&self, frame: u64) -> Option<&FrameSlot> {
        if self.contains(frame) {
            self.slots.get((frame - self.start) as usize)
        } else {
            None
        }
    }

    pub fn allocated_bytes(&self, frame: u64) -> u32 {
        self.slot(frame).map(|s| s.allocated).unwrap_or(0)
    }

    pub fn remaining_bytes(&self, frame: u64) -> u32 {
        self.capacity_bytes - self.allocated_bytes(frame)
    }

    /// A frame is in use once anything is allocated in it.
    pub fn in_use(&self, frame: u64) -> bool {
        self.allocated_bytes(frame) > 0
    }

    /// Capacity test for `bytes` more in `frame`. The strict mode refuses to
    /// fill a frame exactly to capacity.
    pub fn fits(&self, frame: u64, bytes: u32) -> bool {
        if !self.contains(frame) {
            return false;
        }
        let remaining = self.remaining_bytes(frame);
        if self.strict_capacity {
            bytes < remaining
        } else {
            bytes <= remaining
        }
    }

    pub fn grants_in(&self, frame: u64) -> &[Grant] {
        self.slot(frame).map(|s| s.grants.as_slice()).unwrap_or(&[])
    }

    /// All grants at or after `frame`, in frame order then placement order.
    pub fn grants_from(&self, frame: u64) -> impl Iterator<Item = &Grant> {
        let skip = frame.saturating_sub(self.start) as usize;
        self.slots.iter().skip(skip).flat_map(|s| s.grants.iter())
    }

    pub fn place(&mut self, grant: Grant) -> Result<(), LedgerError> {
        if !self.contains(grant.frame) {
            return Err(LedgerError::FrameOutOfHorizon {
                frame: grant.frame,
                start: self.start,
                end: self.end(),
            });
        }
        if !self.fits(grant.frame, grant.bytes) {
            return Err(LedgerError::CapacityExceeded {
                frame: grant.frame,
                allocated: self.allocated_bytes(grant.frame),
                capacity: self.capacity_bytes,
                bytes: grant.bytes,
            });
        }
        let start = self.start;
        let slot = &mut self.slots[(grant.frame - start) as usize];
        slot.allocated += grant.bytes;
        slot.grants.push(grant);
        Ok(())
    }

    /// Removes one grant matching `grant` exactly and returns it.
    pub fn revoke(&mut self, grant: &Grant) -> Option<Grant> {
        if !self.contains(grant.frame) {
            return None;
        }
        let start = self.start;
        let slot = &mut self.slots[(grant.frame - start) as usize];
        let pos = slot.grants.iter().position(|g| g == grant)?;
        let revoked = slot.grants.remove(pos);
        slot.allocated -= revoked.bytes;
        Some(revoked)
    }

    /// Rolls the horizon forward one frame, discarding the front slot and
    /// opening a fresh frame at the far end.
    pub fn advance(&mut self) {
        self.slots.pop_front();
        self.slots.push_back(FrameSlot::default());
        self.start += 1;
    }

    /// Verifies per-frame bookkeeping: allocation totals match the grant
    /// lists and never exceed capacity.
    pub fn check_invariants(&self) -> Result<(), LedgerError> {
        for (i, slot) in self.slots.iter().enumerate() {
            let frame = self.start + i as u64;
            let sum: u64 = slot.grants.iter().map(|g| u64::from(g.bytes)).sum();
            if sum != u64::from(slot.allocated) {
                return Err(LedgerError::Inconsistent {
                    frame,
                    reason: alloc::format!(
                        "allocated {} != grant sum {}",
                        slot.allocated,
                        sum
                    ),
                });
            }
            if slot.allocated > self.capacity_bytes {
                return Err(LedgerError::Inconsistent {
                    frame,
                    reason: alloc::format!(
                        "allocated {} exceeds capacity {}",
                        slot.allocated,
                        self.capacity_bytes
                    ),
                });
            }
            if let Some(bad) = slot.grants.iter().find(|g| g.frame != frame) {
                return Err(LedgerError::Inconsistent {
                    frame,
                    reason: alloc::format!("grant tagged for frame {}", bad.frame),
                });
            }
        }
        Ok(())
    }
}
