//! Frame-synchronous simulation loop binding traffic, channel, and
//! scheduler, with per-node energy accounting.
//!
//! Each frame executes a fixed pipeline: (1) enqueue arrivals, (2) update
//! SINR and Group1/Group2 membership, (3) revoke this frame's low-priority
//! grants of bad-channel nodes and emit bandwidth requests (bad-channel
//! nodes may only request Class1), (4) sort and schedule requests,
//! (5) overflow slot stealing, (6) derive sleep cycles, (7) realize grants
//! due this frame over the lossy channel, (8) drop deadline-expired packets
//! at the frame boundary, (9) charge each node for its power state.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    classify_group, prr, received_power_mw, sample_delivery, ChannelTrace, Group, PrrModel,
};
use crate::config::{ConfigError, SchedulerKind, SimConfig, SourceKind};
use crate::math;
use crate::qos::{Connection, ConnectionId, Direction, NodeId, QosProfile, TrafficClass};
use crate::scheduler::{
    apeps_schedule, handle_overflow, pbs_schedule, sort_requests, FrameLedger, Grant,
    GrantDecision, LedgerError, OverflowCandidate, OverflowRecipient,
};
use crate::traffic::{emit_requests, synth_vbr_trace, ArrivalGen, ConnectionBacklog, VbrTrace};

#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    Config(ConfigError),
    /// A scheduler bookkeeping invariant broke mid-run; this is a bug trap,
    /// not a user error.
    Invariant { frame: u64, detail: LedgerError },
}

impl core::fmt::Display for EngineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EngineError::Config(e) => write!(f, "{e}"),
            EngineError::Invariant { frame, detail } => {
                write!(f, "invariant violation at frame {frame}: {detail}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EngineError {}

impl From<ConfigError> for EngineError {
    fn from(e: ConfigError) -> Self {
        EngineError::Config(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrive,
    Deliver,
    Drop,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Arrive => "arrive",
            EventKind::Deliver => "deliver",
            EventKind::Drop => "drop",
        }
    }
}

/// One packet-level event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time_s: f64,
    pub frame: u64,
    pub node: NodeId,
    pub connection: ConnectionId,
    pub class: TrafficClass,
    pub kind: EventKind,
    pub size_bytes: u32,
    /// Delivery latency; only present on deliver events.
    pub delay_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrantEvent {
    /// Bandwidth reserved by the normal scheduling pass.
    Placed,
    /// Bandwidth reserved through overflow slot stealing.
    Stolen,
    /// Reservation cancelled (channel-error suppression or stolen from).
    Revoked,
    /// Transmission realized and received; `bytes` is what went on air.
    Delivered,
    /// Transmission realized but lost on the channel.
    Lost,
    /// Grant came due with nothing left to send.
    Empty,
}

impl GrantEvent {
    pub fn name(self) -> &'static str {
        match self {
            GrantEvent::Placed => "placed",
            GrantEvent::Stolen => "stolen",
            GrantEvent::Revoked => "revoked",
            GrantEvent::Delivered => "delivered",
            GrantEvent::Lost => "lost",
            GrantEvent::Empty => "empty",
        }
    }
}

/// One row of the grant log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrantRecord {
    pub frame: u64,
    pub node: NodeId,
    pub connection: ConnectionId,
    pub class: TrafficClass,
    pub bytes: u32,
    pub request_frame: u64,
    pub outcome: GrantEvent,
}

/// Energy split of one station over the whole run, in millijoules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEnergy {
    pub node: NodeId,
    pub tx_mj: f64,
    pub rx_mj: f64,
    pub listen_mj: f64,
    pub sleep_mj: f64,
    pub total_mj: f64,
}

/// Static facts about one placed MSS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSummary {
    pub node: NodeId,
    pub position_m: (f64, f64),
    pub distance_m: f64,
    pub sinr_db: f64,
}

/// Per-connection outcome counters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSummary {
    pub connection: Connection,
    pub source: SourceKind,
    pub arrived_pkts: u64,
    pub delivered_pkts: u64,
    pub dropped_pkts: u64,
    pub queued_end_pkts: u64,
}

/// Group membership per (frame, node), recorded every frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTimeline {
    num_nodes: usize,
    cells: Vec<u8>,
}

impl GroupTimeline {
    fn new(num_nodes: usize) -> Self {
        GroupTimeline { num_nodes, cells: Vec::new() }
    }

    fn push_frame(&mut self, groups: impl Iterator<Item = Group>) {
        self.cells.extend(groups.map(|g| match g {
            Group::Group1 => 0u8,
            Group::Group2 => 1u8,
        }));
    }

    pub fn group_at(&self, frame: u64, node: NodeId) -> Option<Group> {
        let idx = frame as usize * self.num_nodes + node.0 as usize;
        self.cells.get(idx).map(|&c| if c == 0 { Group::Group1 } else { Group::Group2 })
    }
}

/// Complete logs of one run, the input to the metrics layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub frames: u64,
    pub frame_capacity_bytes: u32,
    pub events: Vec<EventRecord>,
    pub grants: Vec<GrantRecord>,
    pub node_energy: Vec<NodeEnergy>,
    pub bs_energy: NodeEnergy,
    pub nodes: Vec<NodeSummary>,
    pub connections: Vec<ConnectionSummary>,
    pub groups: GroupTimeline,
    pub deferred_requests: u64,
    pub steals: u64,
}

/// External inputs that replace built-in generators: a VBR packet trace for
/// video flows and a SINR trace overriding the distance model.
#[derive(Debug, Clone, Default)]
pub struct SimInputs {
    pub vbr_trace: Option<VbrTrace>,
    pub channel_trace: Option<ChannelTrace>,
}

#[derive(Debug, Clone)]
struct QueuedPacket {
    size_bytes: u32,
    remaining_bytes: u32,
    arrival_time_s: f64,
}

#[derive(Debug)]
struct ConnState {
    meta: Connection,
    source: SourceKind,
    arrivals: ArrivalGen,
    queue: VecDeque<QueuedPacket>,
    /// Sum of `remaining_bytes` over the queue.
    queued_bytes: u64,
    /// Bytes reserved in not-yet-realized grants.
    outstanding_bytes: u64,
    arrived: u64,
    delivered: u64,
    dropped: u64,
}

impl ConnState {
    fn ungranted_backlog(&self) -> u64 {
        self.queued_bytes.saturating_sub(self.outstanding_bytes)
    }
}

#[derive(Debug, Clone)]
struct NodeState {
    id: NodeId,
    position_m: (f64, f64),
    distance_m: f64,
    static_sinr_db: f64,
    sinr_db: f64,
    group: Group,
    tx_frames: u64,
    rx_frames: u64,
    listen_frames: u64,
    sleep_frames: u64,
    tx_flag: bool,
    rx_flag: bool,
}

impl NodeState {
    fn energy(&self, profile: &crate::config::PowerProfile, frame_s: f64) -> NodeEnergy {
        let mj = |count: u64, mw: f64| mw * (count as f64 * frame_s);
        let tx_mj = mj(self.tx_frames, profile.tx_mw);
        let rx_mj = mj(self.rx_frames, profile.rx_mw);
        let listen_mj = mj(self.listen_frames, profile.listen_mw);
        let sleep_mj = mj(self.sleep_frames, profile.sleep_mw);
        NodeEnergy {
            node: self.id,
            tx_mj,
            rx_mj,
            listen_mj,
            sleep_mj,
            total_mj: tx_mj + rx_mj + listen_mj + sleep_mj,
        }
    }
}

/// One simulation run, advanced one frame at a time.
pub struct Sim {
    cfg: SimConfig,
    inputs: SimInputs,
    prr_model: PrrModel,
    frame_ms: f64,
    total_frames: u64,
    clock: u64,
    nodes: Vec<NodeState>,
    conns: Vec<ConnState>,
    ledger: FrameLedger,
    rng: ChaCha8Rng,
    events: Vec<EventRecord>,
    grants: Vec<GrantRecord>,
    groups: GroupTimeline,
    deferred_requests: u64,
    steals: u64,
    // BS power accounting; the BS itself never sleeps.
    bs_tx_frames: u64,
    bs_rx_frames: u64,
    bs_listen_frames: u64,
    backlog_buf: Vec<ConnectionBacklog>,
}

fn sub_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 over seed + stream keeps per-purpose rng streams disjoint.
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Sim {
    pub fn new(cfg: SimConfig, inputs: SimInputs) -> Result<Self, EngineError> {
        let cfg = crate::config::validate_config(cfg)?;
        let frame_ms = cfg.frame_duration_ms();
        let total_frames = cfg.num_frames();

        // MSS placed uniformly at random within radio range of the centered
        // base station.
        let mut place_rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, 0));
        let center = (500.0, 500.0);
        let mut nodes = Vec::with_capacity(cfg.num_mss as usize);
        for id in 0..cfg.num_mss {
            let r = cfg.channel.radio_range_m * math::sqrt(place_rng.gen::<f64>());
            let theta = 2.0 * core::f64::consts::PI * place_rng.gen::<f64>();
            let position = (center.0 + r * math::cos(theta), center.1 + r * math::sin(theta));
            let power = received_power_mw(
                cfg.channel.tx_power_mw,
                r,
                cfg.channel.ref_distance_m,
                cfg.channel.path_loss_exponent,
            );
            let sinr_db = math::ratio_to_db(power / cfg.channel.noise_mw);
            nodes.push(NodeState {
                id: NodeId(id),
                position_m: position,
                distance_m: r,
                static_sinr_db: sinr_db,
                sinr_db,
                group: Group::Group1,
                tx_frames: 0,
                rx_frames: 0,
                listen_frames: 0,
                sleep_frames: 0,
                tx_flag: false,
                rx_flag: false,
            });
        }

        let conns = build_connections(&cfg, &inputs);

        let max_dc_ms =
            conns.iter().map(|c| c.meta.qos.delay_constraint_ms).fold(0.0f64, f64::max);
        let horizon = (math::ceil(max_dc_ms / frame_ms) as usize).max(1);
        let ledger = FrameLedger::new(0, horizon, cfg.frame_capacity_bytes, cfg.strict_capacity);

        let prr_model = match cfg.channel.prr_model {
            // The top-level error_rate field is the canonical loss knob in
            // fixed mode.
            PrrModel::FixedErrorRate { .. } => {
                PrrModel::FixedErrorRate { error_rate: cfg.error_rate }
            }
            other => other,
        };

        let rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, 1));
        let num_nodes = nodes.len();
        Ok(Sim {
            inputs,
            prr_model,
            frame_ms,
            total_frames,
            clock: 0,
            nodes,
            conns,
            ledger,
            rng,
            events: Vec::new(),
            grants: Vec::new(),
            groups: GroupTimeline::new(num_nodes),
            deferred_requests: 0,
            steals: 0,
            bs_tx_frames: 0,
            bs_rx_frames: 0,
            bs_listen_frames: 0,
            backlog_buf: Vec::new(),
            cfg,
        })
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn total_frames(&self) -> u64 {
        self.total_frames
    }

    pub fn node_positions(&self) -> Vec<(f64, f64)> {
        self.nodes.iter().map(|n| n.position_m).collect()
    }

    pub fn node_distances(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.distance_m).collect()
    }

    /// Executes one frame of the pipeline.
    pub fn advance_frame(&mut self) -> Result<(), EngineError> {
        let k = self.clock;
        let frame_s = self.cfg.frame_duration_s;
        let frame_end_s = (k + 1) as f64 * frame_s;
        let apeps = self.cfg.scheduler == SchedulerKind::Apeps;

        // (1) Arrivals in [k*T_f, (k+1)*T_f).
        for conn in self.conns.iter_mut() {
            while conn.arrivals.peek_time_s() < frame_end_s {
                let (t, size) = conn.arrivals.next_packet();
                conn.queue.push_back(QueuedPacket {
                    size_bytes: size,
                    remaining_bytes: size,
                    arrival_time_s: t,
                });
                conn.queued_bytes += u64::from(size);
                conn.arrived += 1;
                self.events.push(EventRecord {
                    time_s: t,
                    frame: k,
                    node: conn.meta.node_id,
                    connection: conn.meta.id,
                    class: conn.meta.class(),
                    kind: EventKind::Arrive,
                    size_bytes: size,
                    delay_ms: None,
                });
            }
        }

        // (2) Channel estimation and grouping. The baseline has no channel
        // awareness: every node stays Group1 and no estimation draw is made.
        if apeps {
            for node in self.nodes.iter_mut() {
                if let Some(trace) = &self.inputs.channel_trace {
                    node.sinr_db = trace.sinr_db(node.id.0, k).unwrap_or(node.static_sinr_db);
                    node.group = classify_group(node.sinr_db, self.cfg.sinr_threshold_db);
                } else if matches!(self.prr_model, PrrModel::FixedErrorRate { .. }) {
                    // Without per-frame SINR dynamics the channel-error
                    // process itself marks the bad-channel frames.
                    let errored = self.rng.gen_bool(self.cfg.error_rate);
                    node.group = if errored { Group::Group2 } else { Group::Group1 };
                } else {
                    node.sinr_db = node.static_sinr_db;
                    node.group = classify_group(node.sinr_db, self.cfg.sinr_threshold_db);
                }
            }
        }
        self.groups.push_frame(self.nodes.iter().map(|n| n.group));

        // (3a) Channel-error suppression: this frame's Class2/Class3 grants
        // of bad-channel nodes are cancelled and their slots returned to the
        // pool for the scheduling pass below.
        if apeps {
            let revoke: Vec<Grant> = self
                .ledger
                .grants_in(k)
                .iter()
                .filter(|g| {
                    g.class != TrafficClass::Class1
                        && self.nodes[g.node.0 as usize].group == Group::Group2
                })
                .copied()
                .collect();
            for grant in revoke {
                let grant = self.ledger.revoke(&grant).expect("grant listed in this frame");
                self.conns[grant.connection.0 as usize].outstanding_bytes -=
                    u64::from(grant.bytes);
                self.grants.push(record(&grant, GrantEvent::Revoked));
            }
        }

        // (3b) Bandwidth requests from current backlog. Bad-channel nodes
        // may only push Class1 traffic; their other backlog is held.
        self.backlog_buf.clear();
        for conn in self.conns.iter() {
            let backlog = conn.ungranted_backlog();
            if backlog == 0 {
                continue;
            }
            let class = conn.meta.class();
            if apeps
                && class != TrafficClass::Class1
                && self.nodes[conn.meta.node_id.0 as usize].group == Group::Group2
            {
                continue;
            }
            self.backlog_buf.push(ConnectionBacklog {
                connection_id: conn.meta.id,
                node_id: conn.meta.node_id,
                class,
                backlog_bytes: backlog,
                delay_constraint_ms: conn.meta.qos.delay_constraint_ms,
            });
        }
        let mut requests = emit_requests(&self.backlog_buf, k, self.cfg.frame_capacity_bytes);

        // (4) Priority pass.
        sort_requests(&mut requests, self.frame_ms);
        let decisions = if apeps {
            apeps_schedule(&requests, &mut self.ledger, self.frame_ms)
        } else {
            pbs_schedule(&requests, &mut self.ledger, &self.cfg.pbs, self.frame_ms)
        };
        for decision in &decisions {
            match decision {
                GrantDecision::Placed(grant) => {
                    self.conns[grant.connection.0 as usize].outstanding_bytes +=
                        u64::from(grant.bytes);
                    self.grants.push(record(grant, GrantEvent::Placed));
                }
                GrantDecision::Deferred => self.deferred_requests += 1,
                GrantDecision::Stolen { .. } => unreachable!("pass never steals"),
            }
        }

        // (5) Overflow slot stealing for over-threshold Class1 queues on
        // bad-channel nodes.
        if apeps {
            let mut candidates: Vec<OverflowCandidate> = Vec::new();
            for node in self.nodes.iter().filter(|n| n.group == Group::Group2) {
                let mut queue_pkts = 0u64;
                let mut recipient: Option<OverflowRecipient> = None;
                for conn in self.conns.iter().filter(|c| {
                    c.meta.node_id == node.id && c.meta.class() == TrafficClass::Class1
                }) {
                    queue_pkts += conn.queue.len() as u64;
                    if recipient.is_none() && conn.ungranted_backlog() > 0 {
                        recipient = Some(OverflowRecipient {
                            connection_id: conn.meta.id,
                            ungranted_bytes: conn.ungranted_backlog(),
                            delay_constraint_ms: conn.meta.qos.delay_constraint_ms,
                        });
                    }
                }
                candidates.push(OverflowCandidate {
                    node_id: node.id,
                    class1_queue_pkts: queue_pkts.min(u64::from(u32::MAX)) as u32,
                    recipient,
                });
            }
            let groups: Vec<Group> = self.nodes.iter().map(|n| n.group).collect();
            let stolen = handle_overflow(
                &candidates,
                |node| groups[node.0 as usize],
                &mut self.ledger,
                self.cfg.queue_threshold_pkts,
                self.frame_ms,
                k,
            );
            for decision in stolen {
                let GrantDecision::Stolen { placed, donor } = decision else {
                    unreachable!("overflow only steals");
                };
                self.conns[donor.connection.0 as usize].outstanding_bytes -=
                    u64::from(donor.bytes);
                self.conns[placed.connection.0 as usize].outstanding_bytes +=
                    u64::from(placed.bytes);
                self.grants.push(record(&donor, GrantEvent::Revoked));
                self.grants.push(record(&placed, GrantEvent::Stolen));
                self.steals += 1;
            }
        }

        // (6) Sleep cycles are implied by the grant map (adaptive) or the
        // fixed pattern (baseline); the awake predicate in step (9) and the
        // schedule builders in the scheduler module share that definition.

        // (7) Realize grants due this frame.
        let due: Vec<Grant> = self.ledger.grants_in(k).to_vec();
        let deliver_time_s = (k as f64 + 0.5) * frame_s;
        for grant in due {
            let conn = &mut self.conns[grant.connection.0 as usize];
            conn.outstanding_bytes -= u64::from(grant.bytes);
            let attempted = u64::from(grant.bytes).min(conn.queued_bytes) as u32;
            if attempted == 0 {
                self.grants.push(GrantRecord { bytes: 0, ..record(&grant, GrantEvent::Empty) });
                continue;
            }
            let node = &mut self.nodes[grant.node.0 as usize];
            match conn.meta.direction {
                Direction::Uplink => node.tx_flag = true,
                Direction::Downlink => node.rx_flag = true,
            }
            let prr_value = if node.distance_m > self.cfg.channel.radio_range_m {
                0.0
            } else {
                prr(self.prr_model, node.sinr_db)
            };
            let delivered = sample_delivery(prr_value, &mut self.rng)
                .expect("prr model outputs lie in [0, 1]");
            if !delivered {
                self.grants
                    .push(GrantRecord { bytes: attempted, ..record(&grant, GrantEvent::Lost) });
                continue;
            }
            self.grants
                .push(GrantRecord { bytes: attempted, ..record(&grant, GrantEvent::Delivered) });
            // Drain the transmitted bytes head-first; packets completing
            // here are delivered.
            let mut left = attempted;
            while left > 0 {
                let head = conn.queue.front_mut().expect("queued_bytes covers the drain");
                let chunk = head.remaining_bytes.min(left);
                head.remaining_bytes -= chunk;
                left -= chunk;
                conn.queued_bytes -= u64::from(chunk);
                if head.remaining_bytes == 0 {
                    let done = conn.queue.pop_front().unwrap();
                    conn.delivered += 1;
                    self.events.push(EventRecord {
                        time_s: deliver_time_s,
                        frame: k,
                        node: conn.meta.node_id,
                        connection: conn.meta.id,
                        class: conn.meta.class(),
                        kind: EventKind::Deliver,
                        size_bytes: done.size_bytes,
                        delay_ms: Some((deliver_time_s - done.arrival_time_s) * 1000.0),
                    });
                }
            }
        }

        // (8) Deadline expiry at the frame boundary.
        for conn in self.conns.iter_mut() {
            let dc_s = conn.meta.qos.delay_constraint_ms / 1000.0;
            while let Some(head) = conn.queue.front() {
                if head.arrival_time_s + dc_s > frame_end_s {
                    break;
                }
                let gone = conn.queue.pop_front().unwrap();
                conn.queued_bytes -= u64::from(gone.remaining_bytes);
                conn.dropped += 1;
                self.events.push(EventRecord {
                    time_s: frame_end_s,
                    frame: k,
                    node: conn.meta.node_id,
                    connection: conn.meta.id,
                    class: conn.meta.class(),
                    kind: EventKind::Drop,
                    size_bytes: gone.size_bytes,
                    delay_ms: None,
                });
            }
        }

        // (9) Energy: transmit dominates receive dominates idle listening.
        let mut any_uplink = false;
        let mut any_downlink = false;
        for node in self.nodes.iter_mut() {
            any_uplink |= node.tx_flag;
            any_downlink |= node.rx_flag;
            let awake = if apeps {
                self.ledger.grants_in(k).iter().any(|g| g.node == node.id)
            } else {
                self.cfg.pbs.is_listen_frame(k)
            };
            if node.tx_flag {
                node.tx_frames += 1;
            } else if node.rx_flag {
                node.rx_frames += 1;
            } else if awake {
                node.listen_frames += 1;
            } else {
                node.sleep_frames += 1;
            }
            node.tx_flag = false;
            node.rx_flag = false;
        }
        if any_downlink {
            self.bs_tx_frames += 1;
        } else if any_uplink {
            self.bs_rx_frames += 1;
        } else {
            self.bs_listen_frames += 1;
        }

        self.ledger
            .check_invariants()
            .map_err(|detail| EngineError::Invariant { frame: k, detail })?;
        self.ledger.advance();
        self.clock += 1;
        Ok(())
    }

    /// Consumes the run and assembles the output logs.
    pub fn finish(self) -> RunOutput {
        let frame_s = self.cfg.frame_duration_s;
        let profile = &self.cfg.power_profile;
        let node_energy: Vec<NodeEnergy> =
            self.nodes.iter().map(|n| n.energy(profile, frame_s)).collect();
        let mj = |count: u64, mw: f64| mw * (count as f64 * frame_s);
        let bs_tx = mj(self.bs_tx_frames, profile.tx_mw);
        let bs_rx = mj(self.bs_rx_frames, profile.rx_mw);
        let bs_listen = mj(self.bs_listen_frames, profile.listen_mw);
        let bs_energy = NodeEnergy {
            node: NodeId(u32::MAX),
            tx_mj: bs_tx,
            rx_mj: bs_rx,
            listen_mj: bs_listen,
            sleep_mj: 0.0,
            total_mj: bs_tx + bs_rx + bs_listen,
        };
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSummary {
                node: n.id,
                position_m: n.position_m,
                distance_m: n.distance_m,
                sinr_db: n.static_sinr_db,
            })
            .collect();
        let connections = self
            .conns
            .iter()
            .map(|c| ConnectionSummary {
                connection: c.meta.clone(),
                source: c.source,
                arrived_pkts: c.arrived,
                delivered_pkts: c.delivered,
                dropped_pkts: c.dropped,
                queued_end_pkts: c.queue.len() as u64,
            })
            .collect();
        RunOutput {
            frames: self.clock,
            frame_capacity_bytes: self.cfg.frame_capacity_bytes,
            events: self.events,
            grants: self.grants,
            node_energy,
            bs_energy,
            nodes,
            connections,
            groups: self.groups,
            deferred_requests: self.deferred_requests,
            steals: self.steals,
        }
    }
}

fn record(grant: &Grant, outcome: GrantEvent) -> GrantRecord {
    GrantRecord {
        frame: grant.frame,
        node: grant.node,
        connection: grant.connection,
        class: grant.class,
        bytes: grant.bytes,
        request_frame: grant.request_frame,
        outcome,
    }
}

fn build_connections(cfg: &SimConfig, inputs: &SimInputs) -> Vec<ConnState> {
    let t = &cfg.traffic;
    let mut conns = Vec::new();
    let mut next_id = 0u32;
    for node in 0..cfg.num_mss {
        let add = |conns: &mut Vec<ConnState>,
                   next_id: &mut u32,
                   qos: QosProfile,
                   source: SourceKind,
                   arrivals: ArrivalGen| {
            let meta =
                Connection::new(ConnectionId(*next_id), NodeId(node), Direction::Uplink, qos);
            *next_id += 1;
            conns.push(ConnState {
                meta,
                source,
                arrivals,
                queue: VecDeque::new(),
                queued_bytes: 0,
                outstanding_bytes: 0,
                arrived: 0,
                delivered: 0,
                dropped: 0,
            });
        };
        for _ in 0..t.cbr_flows_per_mss {
            add(
                &mut conns,
                &mut next_id,
                QosProfile {
                    packet_size_bytes: t.cbr_packet_bytes,
                    inter_arrival_ms: t.cbr_interval_ms,
                    delay_constraint_ms: t.cbr_delay_ms,
                    service_type: t.cbr_service,
                },
                SourceKind::Cbr,
                ArrivalGen::cbr(t.cbr_packet_bytes, t.cbr_interval_ms),
            );
        }
        for _ in 0..t.vbr_flows_per_mss {
            let trace = match &inputs.vbr_trace {
                Some(trace) => trace.clone(),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(
                        cfg.seed,
                        1000 + u64::from(next_id),
                    ));
                    let count =
                        math::ceil(cfg.sim_duration_s * 1000.0 / t.vbr_interval_ms) as usize + 1;
                    synth_vbr_trace(
                        t.vbr_mean_bytes,
                        t.vbr_sigma,
                        t.vbr_interval_ms,
                        count,
                        &mut rng,
                    )
                }
            };
            add(
                &mut conns,
                &mut next_id,
                QosProfile {
                    packet_size_bytes: t.vbr_mean_bytes,
                    inter_arrival_ms: t.vbr_interval_ms,
                    delay_constraint_ms: t.vbr_delay_ms,
                    service_type: t.vbr_service,
                },
                SourceKind::Vbr,
                ArrivalGen::vbr(trace, t.vbr_interval_ms),
            );
        }
        for _ in 0..t.nrtps_flows_per_mss {
            add(
                &mut conns,
                &mut next_id,
                QosProfile {
                    packet_size_bytes: t.nrtps_packet_bytes,
                    inter_arrival_ms: t.nrtps_interval_ms,
                    delay_constraint_ms: t.nrtps_delay_ms,
                    service_type: crate::qos::ServiceType::Nrtps,
                },
                SourceKind::Background,
                ArrivalGen::cbr(t.nrtps_packet_bytes, t.nrtps_interval_ms),
            );
        }
        for _ in 0..t.be_flows_per_mss {
            add(
                &mut conns,
                &mut next_id,
                QosProfile {
                    packet_size_bytes: t.be_packet_bytes,
                    inter_arrival_ms: t.be_interval_ms,
                    delay_constraint_ms: t.be_delay_ms,
                    service_type: crate::qos::ServiceType::Be,
                },
                SourceKind::Background,
                ArrivalGen::cbr(t.be_packet_bytes, t.be_interval_ms),
            );
        }
    }
    conns
}

/// Runs a full simulation with built-in traffic generators.
pub fn run_simulation(cfg: &SimConfig) -> Result<RunOutput, EngineError> {
    run_simulation_with(cfg, SimInputs::default())
}

/// Runs a full simulation with optional external traces.
pub fn run_simulation_with(cfg: &SimConfig, inputs: SimInputs) -> Result<RunOutput, EngineError> {
    let mut sim = Sim::new(cfg.clone(), inputs)?;
    for _ in 0..sim.total_frames() {
        sim.advance_frame()?;
    }
    Ok(sim.finish())
}
