use serde::{Deserialize, Serialize};

/// Dense node identifier, `0..n`.
pub type NodeId = u16;

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance_to(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Ground-truth behaviour of a node's data plane.
///
/// Roles only govern what a node does with *relayed data packets*; every role
/// participates in route discovery, and probe-reply behaviour for blackholes
/// is a separate scenario knob (`ControlBehavior`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Role {
    Honest,
    /// Drops every relayed data packet.
    Blackhole,
    /// Drops each relayed data packet independently with probability `p`.
    Grayhole { p: f64 },
}

impl Role {
    pub fn is_malicious(&self) -> bool {
        !matches!(self, Role::Honest)
    }
}

/// How blackhole nodes respond to trust handshake probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlBehavior {
    /// Replies to probes so it keeps attracting traffic (classic blackhole).
    Responsive,
    /// Ignores probes; its cooperative count suffers.
    Silent,
}

/// Data-plane tallies for one node.
///
/// `received` counts packets arriving from other nodes (for relaying or for
/// consumption); a node's own originations are tallied separately. The
/// running invariant `forwarded + dropped + consumed <= received` holds at
/// all times, with equality at the end of a run because relays decide each
/// packet's fate at arrival.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PacketCounters {
    pub originated: u64,
    pub received: u64,
    pub forwarded: u64,
    pub dropped: u64,
    pub consumed: u64,
}

impl PacketCounters {
    pub fn record_origination(&mut self) {
        self.originated += 1;
    }

    pub fn record_received(&mut self) {
        self.received += 1;
    }

    pub fn record_forwarded(&mut self) {
        self.forwarded += 1;
        self.check();
    }

    pub fn record_dropped(&mut self) {
        self.dropped += 1;
        self.check();
    }

    pub fn record_consumed(&mut self) {
        self.consumed += 1;
        self.check();
    }

    /// Packets received but not yet resolved (zero once a node has decided
    /// the fate of everything handed to it).
    pub fn pending(&self) -> u64 {
        self.received - (self.forwarded + self.dropped + self.consumed)
    }

    fn check(&self) {
        assert!(
            self.forwarded + self.dropped + self.consumed <= self.received,
            "counter conservation violated: {self:?}"
        );
    }
}

/// Full per-node simulation state.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub position: Position,
    pub waypoint: Position,
    /// Current leg speed in m/s (random-waypoint draws a new one per leg).
    pub speed: f64,
    pub role: Role,
    /// Counters for the current trust window; reset at each epoch boundary.
    pub window: PacketCounters,
    /// Whole-run counters; never reset, used for conservation checks.
    pub total: PacketCounters,
}

impl NodeState {
    pub fn new(id: NodeId, position: Position, role: Role) -> Self {
        NodeState {
            id,
            position,
            waypoint: position,
            speed: 0.0,
            role,
            window: PacketCounters::default(),
            total: PacketCounters::default(),
        }
    }
}
