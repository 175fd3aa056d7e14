//! Simulation core for a single-cell IEEE 802.16e network.
//!
//! One base station serves a set of mobile subscriber stations (MSS) in
//! point-to-multipoint mode. Time advances in fixed-duration OFDM frames;
//! every frame the engine collects bandwidth requests from per-connection
//! queues, schedules them against a rolling frame ledger, derives sleep/listen
//! cycles per node, realizes due grants over a lossy channel, and accounts
//! energy. Two schedulers are provided:
//!
//! * `apeps` — adaptive power-efficient scheduling: strict traffic-class
//!   priority with deadline ordering, channel-aware Group1/Group2 node
//!   partitioning, non-periodic sleep cycles derived from the actual grant
//!   map, and slot stealing that serves over-threshold Class1 backlog of
//!   bad-channel nodes out of low-priority grants.
//! * `pbs` — a periodic power-save baseline with fixed sleep/listen windows
//!   and no channel awareness.
//!
//! The crate is `no_std`-compatible (`alloc` required); all file and process
//! I/O lives in the companion `apeps-sim` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod config;
pub mod engine;
pub(crate) mod math;
pub mod metrics;
pub mod qos;
pub mod scheduler;
pub mod traffic;

pub use config::{PowerProfile, SchedulerKind, SimConfig};
pub use engine::{run_simulation, RunOutput};
pub use metrics::MetricsReport;
pub use qos::{Connection, ConnectionId, Direction, NodeId, QosProfile, ServiceType, TrafficClass};
