//! Simulation configuration and validation.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::PrrModel;
use crate::qos::ServiceType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    Apeps,
    Pbs,
}

impl SchedulerKind {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Apeps => "apeps",
            SchedulerKind::Pbs => "pbs",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Radio power draw per state, in milliwatts. The defaults are plausible
/// 802.16e magnitudes; they are configuration, not measured ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub tx_mw: f64,
    pub rx_mw: f64,
    pub listen_mw: f64,
    pub sleep_mw: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        PowerProfile { tx_mw: 420.0, rx_mw: 280.0, listen_mw: 120.0, sleep_mw: 10.0 }
    }
}

/// Periodic power-save baseline: fixed listen/sleep windows, repeating from
/// frame 0, shared by every node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PbsConfig {
    pub listen_frames: u64,
    pub sleep_frames: u64,
}

impl PbsConfig {
    pub fn period(&self) -> u64 {
        self.listen_frames + self.sleep_frames
    }

    /// True when frame `m` falls in the listen window of the cycle.
    pub fn is_listen_frame(&self, m: u64) -> bool {
        m % self.period() < self.listen_frames
    }
}

impl Default for PbsConfig {
    fn default() -> Self {
        PbsConfig { listen_frames: 2, sleep_frames: 4 }
    }
}

/// Link-budget parameters for the distance-based SINR model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub tx_power_mw: f64,
    pub noise_mw: f64,
    pub path_loss_exponent: f64,
    pub ref_distance_m: f64,
    pub radio_range_m: f64,
    pub prr_model: PrrModel,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            tx_power_mw: 1000.0,
            noise_mw: 1e-3,
            path_loss_exponent: 2.0,
            ref_distance_m: 1.0,
            radio_range_m: 250.0,
            prr_model: PrrModel::FixedErrorRate { error_rate: 0.01 },
        }
    }
}

/// Which traffic source feeds a flow: the real-time CBR application, the
/// real-time VBR video application, or constant-rate background (nrtPS/BE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Cbr,
    Vbr,
    Background,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::Cbr => f.write_str("cbr"),
            SourceKind::Vbr => f.write_str("vbr"),
            SourceKind::Background => f.write_str("background"),
        }
    }
}

/// Traffic carried by every MSS. Four flow templates: a CBR flow and a VBR
/// video flow (both real-time Class1 by default), an nrtPS Class2 flow, and
/// a BE Class3 flow. Counts of zero disable a template.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMix {
    pub cbr_flows_per_mss: u32,
    pub cbr_packet_bytes: u32,
    pub cbr_interval_ms: f64,
    pub cbr_delay_ms: f64,
    pub cbr_service: ServiceType,

    pub vbr_flows_per_mss: u32,
    pub vbr_mean_bytes: u32,
    pub vbr_sigma: f64,
    pub vbr_interval_ms: f64,
    pub vbr_delay_ms: f64,
    pub vbr_service: ServiceType,

    pub nrtps_flows_per_mss: u32,
    pub nrtps_packet_bytes: u32,
    pub nrtps_interval_ms: f64,
    pub nrtps_delay_ms: f64,

    pub be_flows_per_mss: u32,
    pub be_packet_bytes: u32,
    pub be_interval_ms: f64,
    pub be_delay_ms: f64,
}

impl Default for TrafficMix {
    fn default() -> Self {
        TrafficMix {
            cbr_flows_per_mss: 1,
            cbr_packet_bytes: 150,
            cbr_interval_ms: 30.0,
            cbr_delay_ms: 25.0,
            cbr_service: ServiceType::Ugs,

            vbr_flows_per_mss: 1,
            vbr_mean_bytes: 100,
            vbr_sigma: 0.5,
            vbr_interval_ms: 33.0,
            vbr_delay_ms: 25.0,
            vbr_service: ServiceType::Rtps,

            nrtps_flows_per_mss: 1,
            nrtps_packet_bytes: 200,
            nrtps_interval_ms: 160.0,
            nrtps_delay_ms: 200.0,

            be_flows_per_mss: 1,
            be_packet_bytes: 200,
            be_interval_ms: 320.0,
            be_delay_ms: 400.0,
        }
    }
}

/// Full simulation configuration. `Default` gives the standard experiment
/// profile; see the companion crate for the key=value file format.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub frame_duration_s: f64,
    pub frame_capacity_bytes: u32,
    pub num_mss: u32,
    pub sim_duration_s: f64,
    pub sinr_threshold_db: f64,
    pub queue_threshold_pkts: u32,
    pub error_rate: f64,
    pub seed: u64,
    pub scheduler: SchedulerKind,
    /// Reject a request that would exactly fill a frame (strict reading of
    /// the capacity inequality) instead of allowing it.
    pub strict_capacity: bool,
    pub power_profile: PowerProfile,
    pub pbs: PbsConfig,
    pub channel: ChannelConfig,
    pub traffic: TrafficMix,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            frame_duration_s: 0.005,
            frame_capacity_bytes: 625,
            num_mss: 4,
            sim_duration_s: 50.0,
            sinr_threshold_db: 5.0,
            queue_threshold_pkts: 10,
            error_rate: 0.01,
            seed: 1,
            scheduler: SchedulerKind::Apeps,
            strict_capacity: false,
            power_profile: PowerProfile::default(),
            pbs: PbsConfig::default(),
            channel: ChannelConfig::default(),
            traffic: TrafficMix::default(),
        }
    }
}

impl SimConfig {
    pub fn frame_duration_ms(&self) -> f64 {
        self.frame_duration_s * 1000.0
    }

    /// Number of frames in a run: `sim_duration_s / frame_duration_s`,
    /// rounded to the nearest whole frame.
    pub fn num_frames(&self) -> u64 {
        crate::math::round(self.sim_duration_s / self.frame_duration_s) as u64
    }
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    pub field: &'static str,
    pub actual: String,
    pub constraint: &'static str,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} violates: {}", self.field, self.actual, self.constraint)
    }
}

/// All violated invariants of one config, never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<ConfigViolation>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} problem(s)):", self.0.len())?;
        for v in &self.0 {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

macro_rules! check {
    ($out:ident, $cond:expr, $field:expr, $actual:expr, $constraint:expr) => {
        if !$cond {
            $out.push(ConfigViolation {
                field: $field,
                actual: alloc::format!("{}", $actual),
                constraint: $constraint,
            });
        }
    };
}

/// Validates every `SimConfig` invariant, reporting all violations at once.
/// Returns the config unchanged when valid, so validation is idempotent.
pub fn validate_config(cfg: SimConfig) -> Result<SimConfig, ConfigError> {
    let mut v = Vec::new();
    check!(v, cfg.frame_duration_s > 0.0, "frame_duration_s", cfg.frame_duration_s, "must be > 0");
    check!(
        v,
        cfg.frame_capacity_bytes > 0,
        "frame_capacity_bytes",
        cfg.frame_capacity_bytes,
        "must be > 0"
    );
    check!(v, cfg.num_mss > 0, "num_mss", cfg.num_mss, "must be > 0");
    if cfg.frame_duration_s > 0.0 {
        check!(
            v,
            cfg.sim_duration_s >= cfg.frame_duration_s,
            "sim_duration_s",
            cfg.sim_duration_s,
            "must cover at least one frame"
        );
    }
    check!(
        v,
        (0.0..=1.0).contains(&cfg.error_rate),
        "error_rate",
        cfg.error_rate,
        "must be within [0, 1]"
    );
    check!(
        v,
        cfg.queue_threshold_pkts > 0,
        "queue_threshold_pkts",
        cfg.queue_threshold_pkts,
        "must be > 0"
    );

    let p = &cfg.power_profile;
    let power_ok = p.sleep_mw >= 0.0
        && p.sleep_mw <= p.listen_mw
        && p.listen_mw <= p.rx_mw
        && p.sleep_mw <= p.tx_mw;
    check!(
        v,
        power_ok,
        "power_profile",
        alloc::format!(
            "tx={} rx={} listen={} sleep={}",
            p.tx_mw,
            p.rx_mw,
            p.listen_mw,
            p.sleep_mw
        ),
        "requires 0 <= sleep <= listen <= rx and sleep <= tx"
    );

    check!(v, cfg.pbs.listen_frames > 0, "pbs_listen_frames", cfg.pbs.listen_frames, "must be > 0");
    check!(v, cfg.pbs.sleep_frames > 0, "pbs_sleep_frames", cfg.pbs.sleep_frames, "must be > 0");

    check!(v, cfg.channel.noise_mw > 0.0, "noise_mw", cfg.channel.noise_mw, "must be > 0");
    check!(v, cfg.channel.tx_power_mw > 0.0, "tx_power_mw", cfg.channel.tx_power_mw, "must be > 0");
    check!(
        v,
        cfg.channel.ref_distance_m > 0.0,
        "ref_distance_m",
        cfg.channel.ref_distance_m,
        "must be > 0"
    );
    check!(
        v,
        cfg.channel.radio_range_m > 0.0,
        "radio_range_m",
        cfg.channel.radio_range_m,
        "must be > 0"
    );
    if let PrrModel::FixedErrorRate { error_rate } = cfg.channel.prr_model {
        check!(
            v,
            (0.0..=1.0).contains(&error_rate),
            "prr_model.error_rate",
            error_rate,
            "must be within [0, 1]"
        );
    }
    if let PrrModel::SinrLogistic { slope, .. } = cfg.channel.prr_model {
        check!(v, slope > 0.0, "logistic_slope", slope, "must be > 0");
    }

    let t = &cfg.traffic;
    let frame_ms = cfg.frame_duration_ms();
    let flow = |enabled: bool,
                v: &mut Vec<ConfigViolation>,
                    bytes: (&'static str, u32),
                    interval: (&'static str, f64),
                    delay: (&'static str, f64)| {
        if !enabled {
            return;
        }
        check!(v, bytes.1 > 0, bytes.0, bytes.1, "must be > 0");
        check!(v, interval.1 > 0.0, interval.0, interval.1, "must be > 0");
        check!(
            v,
            delay.1 >= frame_ms,
            delay.0,
            delay.1,
            "must be at least one frame duration"
        );
    };
    flow(
        t.cbr_flows_per_mss > 0,
        &mut v,
        ("cbr_packet_bytes", t.cbr_packet_bytes),
        ("cbr_interval_ms", t.cbr_interval_ms),
        ("cbr_delay_ms", t.cbr_delay_ms),
    );
    flow(
        t.vbr_flows_per_mss > 0,
        &mut v,
        ("vbr_mean_bytes", t.vbr_mean_bytes),
        ("vbr_interval_ms", t.vbr_interval_ms),
        ("vbr_delay_ms", t.vbr_delay_ms),
    );
    flow(
        t.nrtps_flows_per_mss > 0,
        &mut v,
        ("nrtps_packet_bytes", t.nrtps_packet_bytes),
        ("nrtps_interval_ms", t.nrtps_interval_ms),
        ("nrtps_delay_ms", t.nrtps_delay_ms),
    );
    flow(
        t.be_flows_per_mss > 0,
        &mut v,
        ("be_packet_bytes", t.be_packet_bytes),
        ("be_interval_ms", t.be_interval_ms),
        ("be_delay_ms", t.be_delay_ms),
    );
    if t.vbr_flows_per_mss > 0 {
        check!(v, t.vbr_sigma >= 0.0, "vbr_sigma", t.vbr_sigma, "must be >= 0");
    }

    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError(v))
    }
}
