//! Multipath on-demand route discovery over normal-labelled nodes.
//!
//! Discovery is a timed RREQ flood with bounded duplicate admissions plus a
//! destination-only RREP per admitted copy, so every reply carries a complete
//! and trustworthy hop trace. The source then keeps up to `k` node-disjoint
//! paths, shortest first ([`select_paths`]).
//!
//! The flood itself is deterministic: control messages move one radio hop per
//! `per_hop_ms` through a private event queue with FIFO tie-breaking, and
//! neighbor lists are visited in id order.

mod discovery;
mod paths;

pub use discovery::{
    run_discovery, DiscoveryConfig, DiscoveryEvent, DiscoveryOutcome, DiscoveryRefused, LinkView,
    StaticGraph,
};
pub use paths::{pairwise_disjoint, select_paths, CandidatePath, PathSet};

use crate::sim::node::NodeId;

/// Route-table entry; reverse entries point back toward a request origin,
/// forward entries toward a reply's destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteEntry {
    pub destination: NodeId,
    pub next_hop: NodeId,
    /// Hops remaining to `destination` via `next_hop`.
    pub hop_count: u32,
    /// Sequence number of the request that installed the entry.
    pub sequence: u32,
    /// Distinguishes parallel entries for the same destination.
    pub path_id: u32,
}

/// Per-node routing table, unique on `(destination, path_id)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RouteTable {
    entries: Vec<RouteEntry>,
}

impl RouteTable {
    pub fn insert(&mut self, entry: RouteEntry) {
        assert!(
            self.lookup(entry.destination, entry.path_id).is_none(),
            "duplicate route entry for destination {} path {}",
            entry.destination,
            entry.path_id
        );
        self.entries.push(entry);
    }

    pub fn lookup(&self, destination: NodeId, path_id: u32) -> Option<&RouteEntry> {
        self.entries
            .iter()
            .find(|e| e.destination == destination && e.path_id == path_id)
    }

    pub fn entries(&self) -> &[RouteEntry] {
        &self.entries
    }
}
