//! Packet arrival generation (CBR and trace-driven VBR) and conversion of
//! queue backlog into per-frame bandwidth requests.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::math;
use crate::qos::{ConnectionId, NodeId, QosProfile, TrafficClass};

/// One generated packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    /// Monotone sequence number within the connection.
    pub id: u64,
    pub connection_id: ConnectionId,
    pub size_bytes: u32,
    pub arrival_time_s: f64,
}

/// CBR inter-arrival time for a packet size and bit rate:
/// `packet_size_bytes * 8000 / rate_bps` milliseconds.
pub fn cbr_interval_ms_for_rate(packet_size_bytes: u32, rate_bps: f64) -> f64 {
    packet_size_bytes as f64 * 8000.0 / rate_bps
}

/// Constant-bit-rate arrivals: fixed-size packets at exact intervals starting
/// at t = 0. The horizon endpoint is inclusive, so the count is
/// `floor(horizon_ms / interval_ms) + 1`.
pub fn cbr_arrivals(qos: &QosProfile, connection_id: ConnectionId, horizon_s: f64) -> Vec<Packet> {
    let horizon_ms = horizon_s * 1000.0;
    let count = math::floor(horizon_ms / qos.inter_arrival_ms) as u64 + 1;
    (0..count)
        .map(|i| Packet {
            id: i,
            connection_id,
            size_bytes: qos.packet_size_bytes,
            arrival_time_s: i as f64 * qos.inter_arrival_ms / 1000.0,
        })
        .collect()
}

/// A variable-bit-rate arrival trace: packet sizes at strictly increasing
/// offsets. Replay wraps cyclically with a configurable tail gap after the
/// final entry.
#[derive(Debug, Clone, PartialEq)]
pub struct VbrTrace {
    entries: Vec<(f64, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    Empty,
    Malformed { line: usize, reason: String },
    NonIncreasingOffset { line: usize },
    NonPositiveSize { line: usize },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::Empty => f.write_str("trace must contain at least one entry"),
            TraceError::Malformed { line, reason } => {
                write!(f, "trace line {line}: {reason} (expected `offset_ms size_bytes`)")
            }
            TraceError::NonIncreasingOffset { line } => {
                write!(f, "trace line {line}: offsets must be strictly increasing")
            }
            TraceError::NonPositiveSize { line } => {
                write!(f, "trace line {line}: size must be a positive integer")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TraceError {}

impl VbrTrace {
    pub fn new(entries: Vec<(f64, u32)>) -> Result<Self, TraceError> {
        if entries.is_empty() {
            return Err(TraceError::Empty);
        }
        for (i, &(offset, size)) in entries.iter().enumerate() {
            if size == 0 {
                return Err(TraceError::NonPositiveSize { line: i + 1 });
            }
            if offset < 0.0 || (i > 0 && offset <= entries[i - 1].0) {
                return Err(TraceError::NonIncreasingOffset { line: i + 1 });
            }
        }
        Ok(VbrTrace { entries })
    }

    pub fn entries(&self) -> &[(f64, u32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_offset_ms(&self) -> f64 {
        self.entries.last().map(|&(o, _)| o).unwrap_or(0.0)
    }
}

/// Parses the text form of a VBR trace: one `offset_ms size_bytes` pair per
/// line, `#` starts a comment.
pub fn load_vbr_trace(text: &str) -> Result<VbrTrace, TraceError> {
    let mut entries: Vec<(f64, u32)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(offset), Some(size)) = (parts.next(), parts.next()) else {
            return Err(TraceError::Malformed {
                line: line_no,
                reason: String::from("missing fields"),
            });
        };
        if parts.next().is_some() {
            return Err(TraceError::Malformed {
                line: line_no,
                reason: String::from("trailing fields"),
            });
        }
        let offset: f64 = offset.parse().map_err(|_| TraceError::Malformed {
            line: line_no,
            reason: String::from("bad offset"),
        })?;
        let size: i64 = size.parse().map_err(|_| TraceError::Malformed {
            line: line_no,
            reason: String::from("bad size"),
        })?;
        if size <= 0 {
            return Err(TraceError::NonPositiveSize { line: line_no });
        }
        if let Some(&(prev, _)) = entries.last() {
            if offset <= prev {
                return Err(TraceError::NonIncreasingOffset { line: line_no });
            }
        } else if offset < 0.0 {
            return Err(TraceError::Malformed {
                line: line_no,
                reason: String::from("negative offset"),
            });
        }
        entries.push((offset, size as u32));
    }
    VbrTrace::new(entries)
}

/// Synthesizes an H.263-like video trace: lognormal frame sizes at a fixed
/// spacing. `mean_bytes` is the arithmetic mean of the size distribution.
pub fn synth_vbr_trace<R: Rng + ?Sized>(
    mean_bytes: u32,
    sigma: f64,
    interval_ms: f64,
    count: usize,
    rng: &mut R,
) -> VbrTrace {
    // Lognormal with E[X] = mean: mu = ln(mean) - sigma^2 / 2.
    let mu = math::ln(mean_bytes as f64) - sigma * sigma / 2.0;
    let entries = (0..count.max(1))
        .map(|i| {
            let size = if sigma == 0.0 {
                mean_bytes.max(1)
            } else {
                let z = standard_normal(rng);
                let s = math::exp(mu + sigma * z);
                math::round(s).max(1.0) as u32
            };
            (i as f64 * interval_ms, size)
        })
        .collect();
    VbrTrace::new(entries).expect("synthetic trace satisfies trace invariants")
}

/// One standard normal draw (Box-Muller, two uniform draws per call).
fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// Deterministic packet source for one connection.
#[derive(Debug, Clone)]
pub enum ArrivalGen {
    Cbr { packet_bytes: u32, interval_ms: f64, next_index: u64 },
    Vbr { trace: VbrTrace, period_ms: f64, cycle: u64, index: usize },
}

impl ArrivalGen {
    pub fn cbr(packet_bytes: u32, interval_ms: f64) -> Self {
        ArrivalGen::Cbr { packet_bytes, interval_ms, next_index: 0 }
    }

    /// Cyclic replay of `trace` with `tail_gap_ms` between the last entry of
    /// one cycle and the first entry of the next.
    pub fn vbr(trace: VbrTrace, tail_gap_ms: f64) -> Self {
        let period_ms = trace.last_offset_ms() + tail_gap_ms;
        ArrivalGen::Vbr { trace, period_ms, cycle: 0, index: 0 }
    }

    /// Arrival time of the next packet, in seconds.
    pub fn peek_time_s(&self) -> f64 {
        match self {
            ArrivalGen::Cbr { interval_ms, next_index, .. } => {
                *next_index as f64 * interval_ms / 1000.0
            }
            ArrivalGen::Vbr { trace, period_ms, cycle, index } => {
                (*cycle as f64 * period_ms + trace.entries()[*index].0) / 1000.0
            }
        }
    }

    /// Consumes and returns the next (arrival_time_s, size_bytes).
    pub fn next_packet(&mut self) -> (f64, u32) {
        match self {
            ArrivalGen::Cbr { packet_bytes, interval_ms, next_index } => {
                let t = *next_index as f64 * *interval_ms / 1000.0;
                *next_index += 1;
                (t, *packet_bytes)
            }
            ArrivalGen::Vbr { trace, period_ms, cycle, index } => {
                let (offset, size) = trace.entries()[*index];
                let t = (*cycle as f64 * *period_ms + offset) / 1000.0;
                *index += 1;
                if *index == trace.len() {
                    *index = 0;
                    *cycle += 1;
                }
                (t, size)
            }
        }
    }
}

/// The pending backlog of one connection at the start of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionBacklog {
    pub connection_id: ConnectionId,
    pub node_id: NodeId,
    pub class: TrafficClass,
    pub backlog_bytes: u64,
    pub delay_constraint_ms: f64,
}

/// Bandwidth requested by a connection at a frame, capped at one frame's
/// capacity. Only emitted for non-empty backlog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthRequest {
    pub connection_id: ConnectionId,
    pub node_id: NodeId,
    pub class: TrafficClass,
    pub observed_frame: u64,
    pub bytes: u32,
    pub delay_constraint_ms: f64,
}

/// Converts per-connection backlog into bandwidth requests for frame
/// `frame_index`: one request per connection with pending bytes, capped at
/// the frame capacity, ordered by class then connection id.
pub fn emit_requests(
    backlogs: &[ConnectionBacklog],
    frame_index: u64,
    frame_capacity_bytes: u32,
) -> Vec<BandwidthRequest> {
    let mut requests: Vec<BandwidthRequest> = backlogs
        .iter()
        .filter(|b| b.backlog_bytes > 0)
        .map(|b| BandwidthRequest {
            connection_id: b.connection_id,
            node_id: b.node_id,
            class: b.class,
            observed_frame: frame_index,
            bytes: b.backlog_bytes.min(frame_capacity_bytes as u64) as u32,
            delay_constraint_ms: b.delay_constraint_ms,
        })
        .collect();
    requests.sort_by_key(|r| (r.class, r.connection_id));
    requests
}
