//! Flat `key = value` configuration files and key-based overrides.
//!
//! Lines are `key = value`, `#` starts a comment, blank lines are ignored.
//! Keys mirror the simulation config fields; CLI flags override file values,
//! which override built-in defaults.

use std::path::PathBuf;

use apeps_core::channel::PrrModel;
use apeps_core::config::{SchedulerKind, SimConfig};
use apeps_core::qos::ServiceType;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigFileError {
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: bad value for `{key}`: {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("override `{text}`: expected KEY=VALUE")]
    MalformedOverride { text: String },
    #[error("override {key}: {reason}")]
    BadOverride { key: String, reason: String },
}

/// A `SimConfig` under construction plus the file-path extras that live
/// outside the core config.
#[derive(Debug, Clone)]
pub struct ConfigOverlay {
    pub cfg: SimConfig,
    prr_mode: PrrMode,
    decode_threshold_db: f64,
    logistic_midpoint_db: f64,
    logistic_slope: f64,
    pub vbr_trace: Option<PathBuf>,
    pub channel_trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PrrMode {
    Fixed,
    Step,
    Logistic,
}

impl Default for ConfigOverlay {
    fn default() -> Self {
        ConfigOverlay {
            cfg: SimConfig::default(),
            prr_mode: PrrMode::Fixed,
            decode_threshold_db: 5.0,
            logistic_midpoint_db: 5.0,
            logistic_slope: 1.0,
            vbr_trace: None,
            channel_trace: None,
        }
    }
}

impl ConfigOverlay {
    /// Applies one key; `line` feeds error messages (0 for CLI overrides).
    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigFileError> {
        let bad = |reason: String| ConfigFileError::BadValue {
            line,
            key: key.to_string(),
            reason,
        };
        macro_rules! num {
            ($ty:ty) => {
                value.parse::<$ty>().map_err(|e| bad(e.to_string()))?
            };
        }
        let cfg = &mut self.cfg;
        match key {
            "frame_duration_s" => cfg.frame_duration_s = num!(f64),
            "frame_capacity_bytes" => cfg.frame_capacity_bytes = num!(u32),
            "num_mss" => cfg.num_mss = num!(u32),
            "sim_duration_s" => cfg.sim_duration_s = num!(f64),
            "sinr_threshold_db" => cfg.sinr_threshold_db = num!(f64),
            "queue_threshold_pkts" => cfg.queue_threshold_pkts = num!(u32),
            "error_rate" => cfg.error_rate = num!(f64),
            "seed" => cfg.seed = num!(u64),
            "scheduler" => cfg.scheduler = parse_scheduler(value).map_err(bad)?,
            "strict_capacity" => cfg.strict_capacity = parse_bool(value).map_err(bad)?,
            "tx_mw" => cfg.power_profile.tx_mw = num!(f64),
            "rx_mw" => cfg.power_profile.rx_mw = num!(f64),
            "listen_mw" => cfg.power_profile.listen_mw = num!(f64),
            "sleep_mw" => cfg.power_profile.sleep_mw = num!(f64),
            "pbs_listen_frames" => cfg.pbs.listen_frames = num!(u64),
            "pbs_sleep_frames" => cfg.pbs.sleep_frames = num!(u64),
            "prr_model" => {
                self.prr_mode = match value {
                    "fixed" => PrrMode::Fixed,
                    "step" => PrrMode::Step,
                    "logistic" => PrrMode::Logistic,
                    other => {
                        return Err(bad(format!(
                            "expected fixed|step|logistic, got `{other}`"
                        )))
                    }
                }
            }
            "decode_threshold_db" => self.decode_threshold_db = num!(f64),
            "logistic_midpoint_db" => self.logistic_midpoint_db = num!(f64),
            "logistic_slope" => self.logistic_slope = num!(f64),
            "tx_power_mw" => cfg.channel.tx_power_mw = num!(f64),
            "noise_mw" => cfg.channel.noise_mw = num!(f64),
            "path_loss_exponent" => cfg.channel.path_loss_exponent = num!(f64),
            "ref_distance_m" => cfg.channel.ref_distance_m = num!(f64),
            "radio_range_m" => cfg.channel.radio_range_m = num!(f64),
            "cbr_flows_per_mss" => cfg.traffic.cbr_flows_per_mss = num!(u32),
            "cbr_packet_bytes" => cfg.traffic.cbr_packet_bytes = num!(u32),
            "cbr_interval_ms" => cfg.traffic.cbr_interval_ms = num!(f64),
            "cbr_delay_ms" => cfg.traffic.cbr_delay_ms = num!(f64),
            "cbr_service" => cfg.traffic.cbr_service = parse_service(value).map_err(bad)?,
            "vbr_flows_per_mss" => cfg.traffic.vbr_flows_per_mss = num!(u32),
            "vbr_mean_bytes" => cfg.traffic.vbr_mean_bytes = num!(u32),
            "vbr_sigma" => cfg.traffic.vbr_sigma = num!(f64),
            "vbr_interval_ms" => cfg.traffic.vbr_interval_ms = num!(f64),
            "vbr_delay_ms" => cfg.traffic.vbr_delay_ms = num!(f64),
            "vbr_service" => cfg.traffic.vbr_service = parse_service(value).map_err(bad)?,
            "nrtps_flows_per_mss" => cfg.traffic.nrtps_flows_per_mss = num!(u32),
            "nrtps_packet_bytes" => cfg.traffic.nrtps_packet_bytes = num!(u32),
            "nrtps_interval_ms" => cfg.traffic.nrtps_interval_ms = num!(f64),
            "nrtps_delay_ms" => cfg.traffic.nrtps_delay_ms = num!(f64),
            "be_flows_per_mss" => cfg.traffic.be_flows_per_mss = num!(u32),
            "be_packet_bytes" => cfg.traffic.be_packet_bytes = num!(u32),
            "be_interval_ms" => cfg.traffic.be_interval_ms = num!(f64),
            "be_delay_ms" => cfg.traffic.be_delay_ms = num!(f64),
            "vbr_trace" => {
                self.vbr_trace =
                    if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            "channel_trace" => {
                self.channel_trace =
                    if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            _ => {
                return Err(ConfigFileError::UnknownKey { line, key: key.to_string() });
            }
        }
        Ok(())
    }

    /// Resolves the PRR model fields into the final config.
    pub fn finalize(mut self) -> (SimConfig, Option<PathBuf>, Option<PathBuf>) {
        self.cfg.channel.prr_model = match self.prr_mode {
            PrrMode::Fixed => PrrModel::FixedErrorRate { error_rate: self.cfg.error_rate },
            PrrMode::Step => {
                PrrModel::SinrStep { decode_threshold_db: self.decode_threshold_db }
            }
            PrrMode::Logistic => PrrModel::SinrLogistic {
                midpoint_db: self.logistic_midpoint_db,
                slope: self.logistic_slope,
            },
        };
        (self.cfg, self.vbr_trace, self.channel_trace)
    }
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("expected true|false, got `{other}`")),
    }
}

fn parse_scheduler(value: &str) -> Result<SchedulerKind, String> {
    match value {
        "apeps" => Ok(SchedulerKind::Apeps),
        "pbs" => Ok(SchedulerKind::Pbs),
        other => Err(format!("expected apeps|pbs, got `{other}`")),
    }
}

fn parse_service(value: &str) -> Result<ServiceType, String> {
    ServiceType::ALL
        .iter()
        .copied()
        .find(|s| s.name() == value)
        .ok_or_else(|| format!("expected ugs|rtps|ertps|nrtps|be, got `{value}`"))
}

/// Parses config file text onto `overlay`.
pub fn parse_config_text(
    overlay: &mut ConfigOverlay,
    text: &str,
) -> Result<(), ConfigFileError> {
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigFileError::Malformed { line: line_no, text: line.to_string() });
        };
        overlay.apply(key.trim(), value.trim(), line_no)?;
    }
    Ok(())
}

/// Applies `KEY=VALUE` override strings (e.g. from `--set`).
pub fn apply_overrides(
    overlay: &mut ConfigOverlay,
    overrides: &[String],
) -> Result<(), ConfigFileError> {
    for item in overrides {
        let Some((key, value)) = item.split_once('=') else {
            return Err(ConfigFileError::MalformedOverride { text: item.clone() });
        };
        overlay.apply(key.trim(), value.trim(), 0).map_err(|e| match e {
            ConfigFileError::UnknownKey { key, .. } => ConfigFileError::BadOverride {
                key,
                reason: "unknown key".to_string(),
            },
            ConfigFileError::BadValue { key, reason, .. } => {
                ConfigFileError::BadOverride { key, reason }
            }
            other => other,
        })?;
    }
    Ok(())
}

/// Renders the resolved config back to the file format, covering every key.
pub fn render_config(cfg: &SimConfig) -> String {
    let mut out = String::new();
    let prr = match cfg.channel.prr_model {
        PrrModel::FixedErrorRate { .. } => ("fixed", 5.0, 5.0, 1.0),
        PrrModel::SinrStep { decode_threshold_db } => ("step", decode_threshold_db, 5.0, 1.0),
        PrrModel::SinrLogistic { midpoint_db, slope } => ("logistic", 5.0, midpoint_db, slope),
    };
    let t = &cfg.traffic;
    let pairs: Vec<(&str, String)> = vec![
        ("frame_duration_s", cfg.frame_duration_s.to_string()),
        ("frame_capacity_bytes", cfg.frame_capacity_bytes.to_string()),
        ("num_mss", cfg.num_mss.to_string()),
        ("sim_duration_s", cfg.sim_duration_s.to_string()),
        ("sinr_threshold_db", cfg.sinr_threshold_db.to_string()),
        ("queue_threshold_pkts", cfg.queue_threshold_pkts.to_string()),
        ("error_rate", cfg.error_rate.to_string()),
        ("seed", cfg.seed.to_string()),
        ("scheduler", cfg.scheduler.name().to_string()),
        ("strict_capacity", cfg.strict_capacity.to_string()),
        ("tx_mw", cfg.power_profile.tx_mw.to_string()),
        ("rx_mw", cfg.power_profile.rx_mw.to_string()),
        ("listen_mw", cfg.power_profile.listen_mw.to_string()),
        ("sleep_mw", cfg.power_profile.sleep_mw.to_string()),
        ("pbs_listen_frames", cfg.pbs.listen_frames.to_string()),
        ("pbs_sleep_frames", cfg.pbs.sleep_frames.to_string()),
        ("prr_model", prr.0.to_string()),
        ("decode_threshold_db", prr.1.to_string()),
        ("logistic_midpoint_db", prr.2.to_string()),
        ("logistic_slope", prr.3.to_string()),
        ("tx_power_mw", cfg.channel.tx_power_mw.to_string()),
        ("noise_mw", cfg.channel.noise_mw.to_string()),
        ("path_loss_exponent", cfg.channel.path_loss_exponent.to_string()),
        ("ref_distance_m", cfg.channel.ref_distance_m.to_string()),
        ("radio_range_m", cfg.channel.radio_range_m.to_string()),
        ("cbr_flows_per_mss", t.cbr_flows_per_mss.to_string()),
        ("cbr_packet_bytes", t.cbr_packet_bytes.to_string()),
        ("cbr_interval_ms", t.cbr_interval_ms.to_string()),
        ("cbr_delay_ms", t.cbr_delay_ms.to_string()),
        ("cbr_service", t.cbr_service.name().to_string()),
        ("vbr_flows_per_mss", t.vbr_flows_per_mss.to_string()),
        ("vbr_mean_bytes", t.vbr_mean_bytes.to_string()),
        ("vbr_sigma", t.vbr_sigma.to_string()),
        ("vbr_interval_ms", t.vbr_interval_ms.to_string()),
        ("vbr_delay_ms", t.vbr_delay_ms.to_string()),
        ("vbr_service", t.vbr_service.name().to_string()),
        ("nrtps_flows_per_mss", t.nrtps_flows_per_mss.to_string()),
        ("nrtps_packet_bytes", t.nrtps_packet_bytes.to_string()),
        ("nrtps_interval_ms", t.nrtps_interval_ms.to_string()),
        ("nrtps_delay_ms", t.nrtps_delay_ms.to_string()),
        ("be_flows_per_mss", t.be_flows_per_mss.to_string()),
        ("be_packet_bytes", t.be_packet_bytes.to_string()),
        ("be_interval_ms", t.be_interval_ms.to_string()),
        ("be_delay_ms", t.be_delay_ms.to_string()),
    ];
    for (key, value) in pairs {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    }
    out
}
