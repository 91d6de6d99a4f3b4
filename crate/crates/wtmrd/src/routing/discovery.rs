use std::rc::Rc;

use thiserror::Error;

use crate::sim::event::EventQueue;
use crate::sim::node::NodeId;
use crate::sim::radio::NeighborIndex;
use crate::sim::time::SimTime;

use super::{RouteEntry, RouteTable};

/// Adjacency as the discovery machine sees it. Time-dependent so tests can
/// script link breaks mid-flight; the engine feeds a fixed snapshot because a
/// whole discovery spans well under one mobility tick.
pub trait LinkView {
    /// Neighbors of `node` at time `t`, ascending by id.
    fn neighbors(&self, t: SimTime, node: NodeId) -> Vec<NodeId>;
    fn in_range(&self, t: SimTime, a: NodeId, b: NodeId) -> bool;
}

/// Immutable adjacency list; the plain `LinkView` used by the engine and by
/// graph-level tests.
#[derive(Debug, Clone)]
pub struct StaticGraph {
    adjacency: Vec<Vec<NodeId>>,
}

impl StaticGraph {
    pub fn new(mut adjacency: Vec<Vec<NodeId>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
        }
        StaticGraph { adjacency }
    }

    pub fn from_index(index: &NeighborIndex) -> Self {
        StaticGraph {
            adjacency: (0..index.len())
                .map(|i| index.neighbors(i as NodeId).to_vec())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Nodes reachable from `start`, including it (plain breadth-first walk).
    pub fn bfs_reachable(&self, start: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.adjacency.len()];
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start as usize] = true;
        let mut out = Vec::new();
        while let Some(n) = queue.pop_front() {
            out.push(n);
            for &nb in &self.adjacency[n as usize] {
                if !seen[nb as usize] {
                    seen[nb as usize] = true;
                    queue.push_back(nb);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

impl LinkView for StaticGraph {
    fn neighbors(&self, _t: SimTime, node: NodeId) -> Vec<NodeId> {
        self.adjacency[node as usize].clone()
    }

    fn in_range(&self, _t: SimTime, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DiscoveryConfig {
    /// Max admitted copies of one request per node (distinct previous hops).
    pub max_duplicates: u32,
    /// Simulated transmission plus processing per radio hop.
    pub per_hop_ms: u64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            max_duplicates: 3,
            per_hop_ms: 2,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiscoveryRefused {
    #[error("discovery endpoint {0} is labelled malicious")]
    EndpointQuarantined(NodeId),
    #[error("source and destination are the same node {0}")]
    DegenerateEndpoints(NodeId),
}

/// A reply that made it back to the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteReply {
    /// Complete source-to-destination hop list.
    pub path: Rc<[NodeId]>,
    pub arrived: SimTime,
    /// Order in which the destination emitted the reply.
    pub reply_id: u32,
}

impl RouteReply {
    pub fn hop_count(&self) -> u32 {
        (self.path.len() - 1) as u32
    }
}

/// Control-plane transcript of one discovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscoveryEvent {
    /// A request copy traversed one hop (timestamped at arrival).
    RreqHop { t: SimTime, from: NodeId, to: NodeId },
    /// A reply traversed one hop toward the source.
    RrepHop {
        t: SimTime,
        from: NodeId,
        to: NodeId,
        reply_id: u32,
    },
    /// The reverse route broke mid-reply; the reply is lost.
    RrepBreak {
        t: SimTime,
        at: NodeId,
        unreachable: NodeId,
        reply_id: u32,
    },
    /// A reply reached the source and became a candidate path.
    ReplyArrived {
        t: SimTime,
        reply_id: u32,
        hops: u32,
    },
}

#[derive(Debug)]
pub struct DiscoveryOutcome {
    /// Replies in source-arrival order.
    pub replies: Vec<RouteReply>,
    /// Per-node tables built by this discovery (reverse and forward entries).
    pub tables: Vec<RouteTable>,
    pub events: Vec<DiscoveryEvent>,
    /// Admitted request copies, for the flood-size invariant.
    pub admitted: u64,
}

enum CtrlMsg {
    Rreq {
        to: NodeId,
        trace: Rc<[NodeId]>,
    },
    Rrep {
        to: NodeId,
        path: Rc<[NodeId]>,
        /// Index of `to` within `path`.
        pos: usize,
        reply_id: u32,
    },
}

/// Flood a route request from `source` for `dest` and collect the replies.
///
/// Only nodes with `eligible[n] == true` are ever handed a message; a request
/// copy is admitted at a node when it arrives via a previous hop not seen
/// before for this request and fewer than `max_duplicates` copies were
/// admitted there. Every admitted copy is rebroadcast (so propagation matches
/// breadth-first reachability over the eligible subgraph) and the destination
/// additionally answers each admitted copy with a reply that walks the
/// recorded trace back to the source, installing forward entries on the way.
pub fn run_discovery(
    view: &dyn LinkView,
    eligible: &[bool],
    source: NodeId,
    dest: NodeId,
    request_seq: u32,
    start: SimTime,
    cfg: &DiscoveryConfig,
) -> Result<DiscoveryOutcome, DiscoveryRefused> {
    if source == dest {
        return Err(DiscoveryRefused::DegenerateEndpoints(source));
    }
    for endpoint in [source, dest] {
        if !eligible[endpoint as usize] {
            return Err(DiscoveryRefused::EndpointQuarantined(endpoint));
        }
    }

    let n = eligible.len();
    let mut queue: EventQueue<CtrlMsg> = EventQueue::new();
    // Align the machine clock with the engine clock so event rows carry
    // absolute times.
    queue.advance_to(start);

    let mut admitted_from: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut tables: Vec<RouteTable> = vec![RouteTable::default(); n];
    let mut events = Vec::new();
    let mut replies = Vec::new();
    let mut admitted: u64 = 0;
    let mut next_reply_id: u32 = 0;

    let origin_trace: Rc<[NodeId]> = Rc::from(vec![source]);
    for nb in view.neighbors(start, source) {
        if eligible[nb as usize] {
            queue
                .schedule(start + cfg.per_hop_ms, CtrlMsg::Rreq { to: nb, trace: Rc::clone(&origin_trace) })
                .unwrap();
        }
    }

    while let Some(event) = queue.pop() {
        let t = event.time;
        match event.kind {
            CtrlMsg::Rreq { to, trace } => {
                let prev = *trace.last().expect("rreq trace never empty");
                events.push(DiscoveryEvent::RreqHop { t, from: prev, to });
                debug_assert!(eligible[to as usize], "request handed to quarantined node");
                if trace.contains(&to) {
                    continue; // loop suppression
                }
                let seen = &mut admitted_from[to as usize];
                if seen.contains(&prev) || seen.len() as u32 >= cfg.max_duplicates {
                    continue; // duplicate policy
                }
                seen.push(prev);
                let path_id = (seen.len() - 1) as u32;
                admitted += 1;
                assert!(
                    admitted <= n as u64 * cfg.max_duplicates as u64,
                    "flood exceeded n * max_duplicates admissions"
                );
                // Reverse entry: back toward the request origin via prev.
                tables[to as usize].insert(RouteEntry {
                    destination: source,
                    next_hop: prev,
                    hop_count: trace.len() as u32,
                    sequence: request_seq,
                    path_id,
                });

                let mut extended: Vec<NodeId> = Vec::with_capacity(trace.len() + 1);
                extended.extend_from_slice(&trace);
                extended.push(to);
                let extended: Rc<[NodeId]> = Rc::from(extended);

                if to == dest {
                    let reply_id = next_reply_id;
                    next_reply_id += 1;
                    let pos = extended.len() - 2;
                    queue.schedule_in(
                        cfg.per_hop_ms,
                        CtrlMsg::Rrep {
                            to: extended[pos],
                            path: Rc::clone(&extended),
                            pos,
                            reply_id,
                        },
                    );
                }
                // Rebroadcast every admitted copy (the destination included,
                // keeping propagation equal to BFS reachability).
                for nb in view.neighbors(t, to) {
                    if nb != prev && !extended.contains(&nb) && eligible[nb as usize] {
                        queue.schedule_in(cfg.per_hop_ms, CtrlMsg::Rreq { to: nb, trace: Rc::clone(&extended) });
                    }
                }
            }
            CtrlMsg::Rrep { to, path, pos, reply_id } => {
                let from = path[pos + 1];
                events.push(DiscoveryEvent::RrepHop { t, from, to, reply_id });
                // Forward entry: toward the reply's destination.
                let dest_node = *path.last().unwrap();
                if tables[to as usize].lookup(dest_node, reply_id).is_none() {
                    tables[to as usize].insert(RouteEntry {
                        destination: dest_node,
                        next_hop: from,
                        hop_count: (path.len() - 1 - pos) as u32,
                        sequence: request_seq,
                        path_id: reply_id,
                    });
                }
                if pos == 0 {
                    events.push(DiscoveryEvent::ReplyArrived {
                        t,
                        reply_id,
                        hops: (path.len() - 1) as u32,
                    });
                    replies.push(RouteReply { path, arrived: t, reply_id });
                    continue;
                }
                let next = path[pos - 1];
                if !view.in_range(t, to, next) {
                    events.push(DiscoveryEvent::RrepBreak {
                        t,
                        at: to,
                        unreachable: next,
                        reply_id,
                    });
                    continue;
                }
                queue.schedule_in(
                    cfg.per_hop_ms,
                    CtrlMsg::Rrep { to: next, path, pos: pos - 1, reply_id },
                );
            }
        }
    }

    Ok(DiscoveryOutcome { replies, tables, events, admitted })
}
