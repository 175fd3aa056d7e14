//! Service types, traffic classes, and per-connection QoS parameters.

use core::fmt;

/// The five 802.16 scheduling service types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ServiceType {
    Ugs,
    Rtps,
    Ertps,
    Nrtps,
    Be,
}

impl ServiceType {
    pub const ALL: [ServiceType; 5] = [
        ServiceType::Ugs,
        ServiceType::Rtps,
        ServiceType::Ertps,
        ServiceType::Nrtps,
        ServiceType::Be,
    ];

    /// Maps a service type onto its scheduling class: UGS/rtPS/ertPS are
    /// Class1 real-time traffic, nrtPS is Class2, BE is Class3.
    pub fn traffic_class(self) -> TrafficClass {
        match self {
            ServiceType::Ugs | ServiceType::Rtps | ServiceType::Ertps => TrafficClass::Class1,
            ServiceType::Nrtps => TrafficClass::Class2,
            ServiceType::Be => TrafficClass::Class3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ServiceType::Ugs => "ugs",
            ServiceType::Rtps => "rtps",
            ServiceType::Ertps => "ertps",
            ServiceType::Nrtps => "nrtps",
            ServiceType::Be => "be",
        }
    }
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scheduling priority class. The derived order is scheduling precedence:
/// `Class1 < Class2 < Class3`, so an ascending sort serves Class1 first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrafficClass {
    Class1,
    Class2,
    Class3,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 3] =
        [TrafficClass::Class1, TrafficClass::Class2, TrafficClass::Class3];

    /// Queue index (0-based) for the per-node class queues.
    pub fn index(self) -> usize {
        match self {
            TrafficClass::Class1 => 0,
            TrafficClass::Class2 => 1,
            TrafficClass::Class3 => 2,
        }
    }

    /// True when `self` outranks `other` (is served first).
    pub fn outranks(self, other: TrafficClass) -> bool {
        self < other
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrafficClass::Class1 => f.write_str("class1"),
            TrafficClass::Class2 => f.write_str("class2"),
            TrafficClass::Class3 => f.write_str("class3"),
        }
    }
}

/// Maps a service type to its traffic class. Total over the five types.
pub fn classify_traffic(service_type: ServiceType) -> TrafficClass {
    service_type.traffic_class()
}

/// Per-connection QoS parameters: average packet size, average inter-packet
/// arrival time, and the delay constraint between two consecutive packets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosProfile {
    pub packet_size_bytes: u32,
    pub inter_arrival_ms: f64,
    pub delay_constraint_ms: f64,
    pub service_type: ServiceType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for ConnectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Uplink,
    Downlink,
}

/// One traffic flow between the base station and a subscriber station.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub id: ConnectionId,
    pub node_id: NodeId,
    pub direction: Direction,
    pub qos: QosProfile,
    class: TrafficClass,
}

impl Connection {
    /// The class is always derived from the QoS service type.
    pub fn new(id: ConnectionId, node_id: NodeId, direction: Direction, qos: QosProfile) -> Self {
        let class = qos.service_type.traffic_class();
        Connection { id, node_id, direction, qos, class }
    }

    pub fn class(&self) -> TrafficClass {
        self.class
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_mapping() {
        assert_eq!(classify_traffic(ServiceType::Ugs), TrafficClass::Class1);
        assert_eq!(classify_traffic(ServiceType::Rtps), TrafficClass::Class1);
        assert_eq!(classify_traffic(ServiceType::Ertps), TrafficClass::Class1);
        assert_eq!(classify_traffic(ServiceType::Nrtps), TrafficClass::Class2);
        assert_eq!(classify_traffic(ServiceType::Be), TrafficClass::Class3);
    }

    #[test]
    fn exactly_three_distinct_classes() {
        let mut seen: alloc::vec::Vec<TrafficClass> =
            ServiceType::ALL.iter().map(|s| s.traffic_class()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen, TrafficClass::ALL);
    }

    #[test]
    fn class_order_is_priority_order() {
        assert!(TrafficClass::Class1 < TrafficClass::Class2);
        assert!(TrafficClass::Class2 < TrafficClass::Class3);
        assert!(TrafficClass::Class1.outranks(TrafficClass::Class3));
        assert!(!TrafficClass::Class3.outranks(TrafficClass::Class3));
    }

    #[test]
    fn connection_derives_class() {
        let qos = QosProfile {
            packet_size_bytes: 1500,
            inter_arrival_ms: 12.0,
            delay_constraint_ms: 100.0,
            service_type: ServiceType::Nrtps,
        };
        let c = Connection::new(ConnectionId(3), NodeId(1), Direction::Uplink, qos);
        assert_eq!(c.class(), TrafficClass::Class2);
    }
}
