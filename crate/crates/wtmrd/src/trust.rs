//! Per-node behavioural trust, recomputed on fixed epochs.
//!
//! Each epoch a node's trust is assembled from three observations of its
//! window (not cumulative) behaviour:
//!
//! * cooperative count `alpha` — how many of its neighbors answered a
//!   lightweight two-message handshake probe within the timeout, normalised
//!   by neighbor count;
//! * forwarding rate `beta` — relayed-on fraction of the data packets handed
//!   to it;
//! * drop rate `gamma` — deliberately discarded fraction of those packets.
//!
//! Two combination modes exist. `Faithful` adds all three terms, which
//! rewards dropping; it is kept selectable because some published variants
//! state it that way. `Corrected` (the default) subtracts the drop term and
//! clamps at zero, so trust is monotone in good behaviour.

use serde::{Deserialize, Serialize};

use crate::sim::node::{ControlBehavior, NodeId, PacketCounters, Role};
use crate::sim::radio::NeighborIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrustMode {
    /// tau = alpha_norm + beta + gamma (literal additive form).
    Faithful,
    /// tau = max(0, alpha_norm + beta - gamma).
    Corrected,
}

/// One node's trust observation for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRecord {
    pub epoch: u32,
    pub node: NodeId,
    /// Raw cooperative count (probe replies received in time).
    pub alpha: u32,
    /// `alpha` over neighbor count (0 when the node has no neighbors).
    pub alpha_norm: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
    pub mode: TrustMode,
}

/// Does `role` answer a handshake probe at all?
fn replies_to_probe(role: Role, control: ControlBehavior) -> bool {
    match role {
        Role::Honest | Role::Grayhole { .. } => true,
        Role::Blackhole => control == ControlBehavior::Responsive,
    }
}

/// Count how many of `neighbors` complete the probe handshake in time.
///
/// A probe is a request/reply pair, so the reply lands after one round trip
/// (`probe_rtt_ms`); replies arriving after `timeout_ms` are not counted.
/// Nodes that reply at all reply promptly — lateness only occurs when the
/// configured timeout is shorter than the round trip itself.
pub fn handshake_probe(
    neighbors: &[NodeId],
    roles: &[Role],
    control: ControlBehavior,
    timeout_ms: u64,
    probe_rtt_ms: u64,
) -> u32 {
    if probe_rtt_ms > timeout_ms {
        return 0;
    }
    neighbors
        .iter()
        .filter(|&&n| replies_to_probe(roles[n as usize], control))
        .count() as u32
}

/// Fraction of received packets the node passed on. Zero received means no
/// evidence, reported as 0.
pub fn forwarding_rate(counters: &PacketCounters) -> f64 {
    if counters.received == 0 {
        0.0
    } else {
        counters.forwarded as f64 / counters.received as f64
    }
}

/// Fraction of received packets the node deliberately discarded. Link-level
/// losses are charged to the link, not to this rate.
pub fn drop_rate(counters: &PacketCounters) -> f64 {
    if counters.received == 0 {
        0.0
    } else {
        counters.dropped as f64 / counters.received as f64
    }
}

/// Combine the three components under `mode`.
///
/// All inputs must already be rates in `[0, 1]`; anything else is an
/// accounting bug upstream and panics.
pub fn trust_value(alpha_norm: f64, beta: f64, gamma: f64, mode: TrustMode) -> f64 {
    for (name, v) in [("alpha_norm", alpha_norm), ("beta", beta), ("gamma", gamma)] {
        assert!(
            (0.0..=1.0).contains(&v),
            "trust component {name}={v} outside [0,1]"
        );
    }
    match mode {
        TrustMode::Faithful => alpha_norm + beta + gamma,
        TrustMode::Corrected => (alpha_norm + beta - gamma).max(0.0),
    }
}

/// Everything `trust_epoch` needs, snapshotted at the epoch boundary.
pub struct EpochInputs<'a> {
    pub epoch: u32,
    pub neighbors: &'a NeighborIndex,
    pub roles: &'a [Role],
    pub control: ControlBehavior,
    /// Per-node window counters for the epoch that just ended.
    pub windows: &'a [PacketCounters],
    pub mode: TrustMode,
    pub handshake_timeout_ms: u64,
    pub probe_rtt_ms: u64,
}

/// Compute one `TrustRecord` per node from an epoch snapshot.
///
/// Pure in its inputs: recomputing from the same snapshot reproduces the
/// records exactly.
pub fn trust_epoch(inputs: &EpochInputs) -> Vec<TrustRecord> {
    let n = inputs.roles.len();
    assert_eq!(inputs.windows.len(), n, "counters/roles length mismatch");
    assert_eq!(inputs.neighbors.len(), n, "neighbor index length mismatch");
    (0..n)
        .map(|id| {
            let neighbors = inputs.neighbors.neighbors(id as NodeId);
            let alpha = handshake_probe(
                neighbors,
                inputs.roles,
                inputs.control,
                inputs.handshake_timeout_ms,
                inputs.probe_rtt_ms,
            );
            let alpha_norm = if neighbors.is_empty() {
                0.0
            } else {
                alpha as f64 / neighbors.len() as f64
            };
            let beta = forwarding_rate(&inputs.windows[id]);
            let gamma = drop_rate(&inputs.windows[id]);
            TrustRecord {
                epoch: inputs.epoch,
                node: id as NodeId,
                alpha,
                alpha_norm,
                beta,
                gamma,
                tau: trust_value(alpha_norm, beta, gamma, inputs.mode),
                mode: inputs.mode,
            }
        })
        .collect()
}
