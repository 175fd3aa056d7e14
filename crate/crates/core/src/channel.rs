//! Per-link SINR, SINR-to-PRR mapping, delivery sampling, and channel-state
//! grouping.
//!
//! Group1 is the good-channel partition (SINR at or above the configured
//! threshold), Group2 is the bad-channel partition. Every grouping decision
//! in this crate follows that convention.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::math;
use crate::qos::NodeId;

/// One SINR observation on a directed link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub received_power_mw: f64,
    pub noise_mw: f64,
    pub interference_mw: Vec<f64>,
    /// `received_power_mw / (noise_mw + sum(interference_mw))`.
    pub sinr: f64,
}

impl LinkSample {
    pub fn new(
        sender: NodeId,
        receiver: NodeId,
        received_power_mw: f64,
        noise_mw: f64,
        interference_mw: Vec<f64>,
    ) -> Result<Self, ChannelError> {
        let sinr = compute_sinr(received_power_mw, noise_mw, &interference_mw)?;
        Ok(LinkSample { sender, receiver, received_power_mw, noise_mw, interference_mw, sinr })
    }
}

/// Packet-reception-rate model: delivery probability as a function of SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrrModel {
    /// Constant loss probability, independent of SINR. This is the model the
    /// error-rate experiments sweep.
    FixedErrorRate { error_rate: f64 },
    /// Perfect reception at or above the decode threshold, nothing below.
    SinrStep { decode_threshold_db: f64 },
    /// Smooth logistic transition centered on `midpoint_db`.
    SinrLogistic { midpoint_db: f64, slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Group1,
    Group2,
}

impl Group {
    pub fn is_good(self) -> bool {
        self == Group::Group1
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Group1 => f.write_str("group1"),
            Group::Group2 => f.write_str("group2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    /// Noise power must be strictly positive to keep the SINR ratio finite.
    NonPositiveNoise { noise_mw: f64 },
    /// PRR values are probabilities.
    PrrOutOfRange { prr: f64 },
    /// Channel trace line failed to parse.
    TraceParse { line: usize, reason: String },
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::NonPositiveNoise { noise_mw } => {
                write!(f, "noise power must be > 0 mW, got {noise_mw}")
            }
            ChannelError::PrrOutOfRange { prr } => {
                write!(f, "packet reception rate must lie in [0, 1], got {prr}")
            }
            ChannelError::TraceParse { line, reason } => {
                write!(f, "channel trace line {line}: {reason}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ChannelError {}

/// Signal-to-interference-and-noise ratio at a receiver: the received power
/// of the wanted signal over noise plus the received power of every
/// concurrent transmitter. With no interferers this is the plain SNR.
pub fn compute_sinr(
    received_power_mw: f64,
    noise_mw: f64,
    interference_mw: &[f64],
) -> Result<f64, ChannelError> {
    if noise_mw <= 0.0 {
        return Err(ChannelError::NonPositiveNoise { noise_mw });
    }
    let interference: f64 = interference_mw.iter().sum();
    Ok(received_power_mw / (noise_mw + interference))
}

/// Delivery probability for a transmission seen at `sinr_db`.
pub fn prr(model: PrrModel, sinr_db: f64) -> f64 {
    match model {
        PrrModel::FixedErrorRate { error_rate } => 1.0 - error_rate,
        PrrModel::SinrStep { decode_threshold_db } => {
            if sinr_db >= decode_threshold_db {
                1.0
            } else {
                0.0
            }
        }
        PrrModel::SinrLogistic { midpoint_db, slope } => {
            1.0 / (1.0 + math::exp(-slope * (sinr_db - midpoint_db)))
        }
    }
}

/// One Bernoulli realization of a PRR value.
pub fn sample_delivery<R: Rng + ?Sized>(prr_value: f64, rng: &mut R) -> Result<bool, ChannelError> {
    if !(0.0..=1.0).contains(&prr_value) {
        return Err(ChannelError::PrrOutOfRange { prr: prr_value });
    }
    Ok(rng.gen_bool(prr_value))
}

/// Nodes at or above the SINR threshold have a good channel (Group1);
/// everyone else is Group2.
pub fn classify_group(sinr_db: f64, sinr_threshold_db: f64) -> Group {
    if sinr_db >= sinr_threshold_db {
        Group::Group1
    } else {
        Group::Group2
    }
}

/// Received power after distance decay: `tx_power * (d0 / d)^alpha`.
/// Distances inside the reference distance are clamped to it.
pub fn received_power_mw(
    tx_power_mw: f64,
    distance_m: f64,
    ref_distance_m: f64,
    path_loss_exponent: f64,
) -> f64 {
    let d = if distance_m < ref_distance_m { ref_distance_m } else { distance_m };
    tx_power_mw * math::powf(ref_distance_m / d, path_loss_exponent)
}

/// SINR samples driven from a text trace instead of the distance model.
/// Lines are `frame_index node_id sinr_db`; the value holds until the next
/// entry for the same node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelTrace {
    /// Per node: (frame, sinr_db) entries sorted by frame.
    entries: Vec<(u32, Vec<(u64, f64)>)>,
}

impl ChannelTrace {
    pub fn parse(text: &str) -> Result<Self, ChannelError> {
        let mut trace = ChannelTrace::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let mut parts = line.split_whitespace();
            let (Some(frame), Some(node), Some(db)) = (parts.next(), parts.next(), parts.next())
            else {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(ChannelError::TraceParse {
                    line: line_no,
                    reason: String::from("expected `frame_index node_id sinr_db`"),
                });
            };
            if parts.next().is_some() {
                return Err(ChannelError::TraceParse {
                    line: line_no,
                    reason: String::from("trailing fields"),
                });
            }
            let frame: u64 = frame.parse().map_err(|_| ChannelError::TraceParse {
                line: line_no,
                reason: String::from("bad frame index"),
            })?;
            let node: u32 = node.parse().map_err(|_| ChannelError::TraceParse {
                line: line_no,
                reason: String::from("bad node id"),
            })?;
            let db: f64 = db.parse().map_err(|_| ChannelError::TraceParse {
                line: line_no,
                reason: String::from("bad sinr value"),
            })?;
            let slot = match trace.entries.iter_mut().find(|(n, _)| *n == node) {
                Some((_, v)) => v,
                None => {
                    trace.entries.push((node, Vec::new()));
                    &mut trace.entries.last_mut().unwrap().1
                }
            };
            if let Some(&(last, _)) = slot.last() {
                if frame < last {
                    return Err(ChannelError::TraceParse {
                        line: line_no,
                        reason: String::from("frame indices must be non-decreasing per node"),
                    });
                }
            }
            slot.push((frame, db));
        }
        Ok(trace)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SINR for `node` at `frame`: the most recent entry at or before the
    /// frame, if any.
    pub fn sinr_db(&self, node: u32, frame: u64) -> Option<f64> {
        let (_, samples) = self.entries.iter().find(|(n, _)| *n == node)?;
        let pos = samples.partition_point(|&(f, _)| f <= frame);
        if pos == 0 {
            None
        } else {
            Some(samples[pos - 1].1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_close(a: f64, b: f64) -> bool {
        if b == 0.0 {
            a == 0.0
        } else {
            ((a - b) / b).abs() < 1e-12
        }
    }

    #[test]
    fn sinr_without_interference_is_snr() {
        let s = compute_sinr(1.0, 0.1, &[]).unwrap();
        assert!(rel_close(s, 10.0));
    }

    #[test]
    fn sinr_with_interference() {
        let s = compute_sinr(1.0, 0.1, &[0.4, 0.5]).unwrap();
        assert!(rel_close(s, 1.0));
    }

    #[test]
    fn sinr_zero_signal() {
        let s = compute_sinr(0.0, 0.5, &[0.5]).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn sinr_rejects_non_positive_noise() {
        assert!(matches!(
            compute_sinr(1.0, 0.0, &[]),
            Err(ChannelError::NonPositiveNoise { .. })
        ));
        assert!(compute_sinr(1.0, -1.0, &[]).is_err());
    }

    #[test]
    fn prr_fixed_ignores_sinr() {
        let m = PrrModel::FixedErrorRate { error_rate: 0.01 };
        assert!(rel_close(prr(m, -30.0), 0.99));
        assert!(rel_close(prr(m, 40.0), 0.99));
    }

    #[test]
    fn prr_step_boundary_inclusive() {
        let m = PrrModel::SinrStep { decode_threshold_db: 5.0 };
        assert_eq!(prr(m, 5.0), 1.0);
        assert_eq!(prr(m, 4.999), 0.0);
    }

    #[test]
    fn prr_logistic_midpoint() {
        let m = PrrModel::SinrLogistic { midpoint_db: 7.0, slope: 2.0 };
        assert!(rel_close(prr(m, 7.0), 0.5));
    }

    #[test]
    fn group_boundary_is_good_channel() {
        assert_eq!(classify_group(10.0, 5.0), Group::Group1);
        assert_eq!(classify_group(3.0, 5.0), Group::Group2);
        assert_eq!(classify_group(5.0, 5.0), Group::Group1);
    }

    #[test]
    fn delivery_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert!(sample_delivery(1.0, &mut rng).unwrap());
            assert!(!sample_delivery(0.0, &mut rng).unwrap());
        }
        assert!(sample_delivery(1.2, &mut rng).is_err());
        assert!(sample_delivery(-0.1, &mut rng).is_err());
    }

    #[test]
    fn delivery_monte_carlo_half() {
        // 1e5 draws at p = 0.5: the mean must land within +-0.01 of 0.5
        // (about six standard deviations).
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let hits = (0..n).filter(|_| sample_delivery(0.5, &mut rng).unwrap()).count();
        let mean = hits as f64 / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn delivery_replay_is_deterministic() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..256).map(|_| sample_delivery(0.3, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn trace_lookup_holds_last_value() {
        let t = ChannelTrace::parse("0 1 10.0\n5 1 2.0\n3 2 -1.0\n# comment\n").unwrap();
        assert_eq!(t.sinr_db(1, 0), Some(10.0));
        assert_eq!(t.sinr_db(1, 4), Some(10.0));
        assert_eq!(t.sinr_db(1, 5), Some(2.0));
        assert_eq!(t.sinr_db(1, 500), Some(2.0));
        assert_eq!(t.sinr_db(2, 2), None);
        assert_eq!(t.sinr_db(2, 3), Some(-1.0));
        assert_eq!(t.sinr_db(7, 0), None);
    }

    #[test]
    fn trace_parse_errors_carry_line_numbers() {
        let err = ChannelTrace::parse("0 1 10.0\nnot a line\n").unwrap_err();
        assert!(matches!(err, ChannelError::TraceParse { line: 2, .. }));
        let err = ChannelTrace::parse("5 1 10.0\n2 1 3.0\n").unwrap_err();
        assert!(matches!(err, ChannelError::TraceParse { line: 2, .. }));
    }

    #[test]
    fn path_loss_decays_and_clamps() {
        let p1 = received_power_mw(1000.0, 1.0, 1.0, 2.0);
        let p2 = received_power_mw(1000.0, 10.0, 1.0, 2.0);
        let p3 = received_power_mw(1000.0, 0.1, 1.0, 2.0);
        assert_eq!(p1, 1000.0);
        assert!(rel_close(p2, 10.0));
        assert_eq!(p3, 1000.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sinr_scale_invariant(
                p in 0.0..1e6f64,
                n in 1e-9..1e3f64,
                i1 in 0.0..1e3f64,
                i2 in 0.0..1e3f64,
                lambda in 1e-3..1e3f64,
            ) {
                let base = compute_sinr(p, n, &[i1, i2]).unwrap();
                let scaled =
                    compute_sinr(p * lambda, n * lambda, &[i1 * lambda, i2 * lambda]).unwrap();
                prop_assert!((scaled - base).abs() <= 1e-9 * base.abs().max(1.0));
            }

            #[test]
            fn sinr_interference_strictly_decreases(
                p in 1e-6..1e6f64,
                n in 1e-9..1e3f64,
                extra in 1e-9..1e3f64,
            ) {
                let clear = compute_sinr(p, n, &[]).unwrap();
                let jammed = compute_sinr(p, n, &[extra]).unwrap();
                prop_assert!(jammed < clear);
            }

            #[test]
            fn prr_in_unit_interval_and_monotone(
                mid in -20.0..20.0f64,
                slope in 0.01..10.0f64,
                thr in -20.0..20.0f64,
                er in 0.0..1.0f64,
            ) {
                let models = [
                    PrrModel::FixedErrorRate { error_rate: er },
                    PrrModel::SinrStep { decode_threshold_db: thr },
                    PrrModel::SinrLogistic { midpoint_db: mid, slope },
                ];
                for model in models {
                    let mut prev = None;
                    for step in -120..=120 {
                        let db = step as f64 * 0.5;
                        let p = prr(model, db);
                        prop_assert!((0.0..=1.0).contains(&p));
                        if !matches!(model, PrrModel::FixedErrorRate { .. }) {
                            if let Some(prev) = prev {
                                prop_assert!(p >= prev);
                            }
                            prev = Some(p);
                        }
                    }
                }
            }

            #[test]
            fn group_matches_predicate(sinr in -50.0..50.0f64, thr in -50.0..50.0f64) {
                let g = classify_group(sinr, thr);
                prop_assert_eq!(g == Group::Group1, sinr >= thr);
            }
        }
    }
}
