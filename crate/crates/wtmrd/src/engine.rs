//! The discrete-event run engine.
//!
//! One run wires everything together: nodes move on random waypoints and the
//! neighbor index refreshes every [`MOBILITY_TICK_MS`]; flows originate CBR
//! packets; packets traverse installed multipath routes hop by hop, subject
//! to attacker drops, link breaks and the quarantine screen; trust windows
//! close on epoch boundaries, resolve after the handshake timeout, feed the
//! classifier and trigger route revalidation.
//!
//! Route discovery is lazy: a flow floods a request only when a packet finds
//! its path set empty. Packets queue while the discovery window is open and
//! are flushed — or dropped as unroutable — when it closes; a failed
//! discovery backs the flow off before it may try again. Installed paths are
//! pruned when a hop break or quarantine verdict reveals them unusable and
//! revalidated wholesale at every epoch resolution, so a flow keeps routing
//! over stale paths for at most one epoch.
//!
//! All randomness comes from named per-seed streams, so a (config, seed,
//! variant) triple fully determines the transcript. Runs differing only in
//! the variant share every stream, which keeps ablation comparisons paired:
//! same placement, same roles, same traffic, same mobility.

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metrics::{aggregate, MetricsError, MetricsReport};
use crate::routing::{
    run_discovery, select_paths, CandidatePath, DiscoveryConfig, DiscoveryEvent, PathSet,
    StaticGraph,
};
use crate::sim::event::{EventKind, EventQueue, FlowId};
use crate::sim::mobility::{advance, Arena};
use crate::sim::node::{NodeId, NodeState, PacketCounters, Position, Role};
use crate::sim::radio::NeighborIndex;
use crate::sim::rng::{stream, Domain};
use crate::sim::time::SimTime;
use crate::transcript::{DropReason, TranscriptEvent};
use crate::trust::{trust_epoch, EpochInputs, TrustRecord};
use crate::variant::{Classifier, VariantSpec};
use crate::winnow::Label;
use crate::workload::{
    assign_roles, attacker_action, generate_traffic, ConfigError, FlowSpec, RelayAction,
    ScenarioConfig,
};

/// Interval between mobility updates and neighbor-index rebuilds. At the
/// default 20 m/s speed cap a node moves at most 20 m per tick, a small
/// fraction of the 250 m radio range.
pub const MOBILITY_TICK_MS: u64 = 1000;

/// Round trip of the two-message handshake probe (request out, reply back).
pub const PROBE_RTT_MS: u64 = 4;

/// How long a packet may sit queued awaiting a route before it is discarded
/// as unroutable. Generous enough for a full discovery window plus one
/// mid-flush repair, but short enough that packets never ride out a retry
/// backoff and land with a misleading multi-hundred-millisecond delay.
pub const MAX_QUEUE_MS: u64 = 100;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Everything a completed run produces. Files are the caller's concern; the
/// transcript writers in [`crate::transcript`] serialize these fields.
pub struct RunOutput {
    pub roles: Vec<Role>,
    /// Final effective labels (quarantine merged in).
    pub labels: Vec<(NodeId, Label)>,
    pub trust_records: Vec<TrustRecord>,
    pub transcript: Vec<TranscriptEvent>,
    /// Control-plane trace; empty unless collection was requested.
    pub discovery_events: Vec<DiscoveryEvent>,
    pub report: MetricsReport,
    /// Frozen classifier weights, when the variant carries a model.
    pub model_snapshot: Option<String>,
    /// Route discoveries launched.
    pub discoveries: u64,
    /// Transmissions withheld because the next hop was quarantined after
    /// the packet launched.
    pub security_drops: u64,
    /// Whole-run packet counters per node.
    pub totals: Vec<PacketCounters>,
    /// When each node entered quarantine, if it ever did.
    pub quarantined_at: Vec<Option<SimTime>>,
}

struct FlowState {
    spec: FlowSpec,
    paths: PathSet,
    /// Per-packet round-robin over the installed paths.
    rotation: usize,
    /// Packets (seq, origination time) queued awaiting routes.
    pending: Vec<(u32, SimTime)>,
    /// A discovery window is open; its close event is scheduled.
    discovering: bool,
    /// No new discovery before this time (backoff after a failed one).
    next_retry: SimTime,
    request_seq: u32,
    /// Replies buffered until the window closes.
    candidates: Vec<CandidatePath>,
    /// Origination time of the flow's final packet; after this, losing the
    /// route set no longer warrants a rediscovery.
    last_origination: SimTime,
}

impl FlowState {
    fn new(spec: FlowSpec, last_origination: SimTime) -> Self {
        FlowState {
            spec,
            paths: PathSet::default(),
            rotation: 0,
            pending: Vec::new(),
            discovering: false,
            next_retry: SimTime::ZERO,
            request_seq: 0,
            candidates: Vec::new(),
            last_origination,
        }
    }
}

fn tally(node: &mut NodeState, record: fn(&mut PacketCounters)) {
    record(&mut node.window);
    record(&mut node.total);
}

struct Engine<'a> {
    config: &'a ScenarioConfig,
    arena: Arena,
    discovery_cfg: DiscoveryConfig,
    nodes: Vec<NodeState>,
    roles: Vec<Role>,
    mobility_rngs: Vec<ChaCha8Rng>,
    attack_rngs: Vec<ChaCha8Rng>,
    index: NeighborIndex,
    classifier: Classifier,
    flows: Vec<FlowState>,
    queue: EventQueue,
    transcript: Vec<TranscriptEvent>,
    trust_records: Vec<TrustRecord>,
    discovery_events: Vec<DiscoveryEvent>,
    collect_discovery: bool,
    /// Window counters snapshotted at the last epoch boundary, waiting for
    /// the handshake timeout to resolve. At most one epoch is in flight.
    pending_epoch: Option<(u32, Vec<PacketCounters>)>,
    discoveries: u64,
    security_drops: u64,
    quarantined_at: Vec<Option<SimTime>>,
}

/// Execute one complete run.
pub fn run_scenario(
    config: &ScenarioConfig,
    variant: VariantSpec,
    seed: u64,
    collect_discovery: bool,
) -> Result<RunOutput, RunError> {
    config.validate()?;
    Engine::new(config, variant, seed, collect_discovery)?.run()
}

impl<'a> Engine<'a> {
    fn new(
        config: &'a ScenarioConfig,
        variant: VariantSpec,
        seed: u64,
        collect_discovery: bool,
    ) -> Result<Self, RunError> {
        let n = config.nodes as usize;
        let roles = assign_roles(config, &mut stream(seed, Domain::Roles, 0));
        let flows = generate_traffic(config, &roles, &mut stream(seed, Domain::Traffic, 0))?;

        let arena = Arena {
            side: config.arena_side_m,
        };
        let mut placement_rng = stream(seed, Domain::Placement, 0);
        let positions: Vec<Position> = match &config.pinned_positions {
            Some(pins) => pins.iter().map(|&(x, y)| Position { x, y }).collect(),
            None => (0..n).map(|_| arena.random_position(&mut placement_rng)).collect(),
        };
        let nodes: Vec<NodeState> = positions
            .iter()
            .enumerate()
            .map(|(i, &p)| NodeState::new(i as NodeId, p, roles[i]))
            .collect();
        let index = NeighborIndex::build(&positions, config.radio_range_m);

        let mut queue = EventQueue::new();
        let sim_end = config.sim_end();
        // Coincident events fire in scheduling order, so the order below is
        // part of the engine's semantics: a tick that lands on an epoch
        // boundary refreshes the topology before the epoch snapshots it,
        // and everything at the final instant runs before SimEnd.
        for tick in 1..=(sim_end.as_millis() / MOBILITY_TICK_MS) {
            queue
                .schedule(SimTime(tick * MOBILITY_TICK_MS), EventKind::MobilityTick)
                .expect("setup events are in the future");
        }
        let epoch_ms = config.epoch_s * 1000;
        let mut epoch = 1;
        // An epoch only counts if its handshake resolution fits in the run.
        while epoch * epoch_ms + config.handshake_timeout_ms <= sim_end.as_millis() {
            queue
                .schedule(
                    SimTime(epoch * epoch_ms),
                    EventKind::TrustEpoch {
                        epoch: epoch as u32,
                    },
                )
                .expect("setup events are in the future");
            epoch += 1;
        }
        let mut flow_states = Vec::with_capacity(flows.len());
        for (idx, flow) in flows.into_iter().enumerate() {
            let times = flow.packet_times(sim_end);
            for (i, &t) in times.iter().enumerate() {
                queue
                    .schedule(
                        t,
                        EventKind::TrafficGen {
                            flow: idx as FlowId,
                            seq: i as u32 + 1,
                        },
                    )
                    .expect("setup events are in the future");
            }
            let last = times.last().copied().unwrap_or(SimTime::ZERO);
            flow_states.push(FlowState::new(flow, last));
        }
        queue
            .schedule(sim_end, EventKind::SimEnd)
            .expect("setup events are in the future");

        Ok(Engine {
            arena,
            discovery_cfg: DiscoveryConfig {
                max_duplicates: config.max_duplicates,
                per_hop_ms: config.per_hop_ms,
            },
            nodes,
            mobility_rngs: (0..n)
                .map(|i| stream(seed, Domain::Mobility, i as u64))
                .collect(),
            attack_rngs: (0..n)
                .map(|i| stream(seed, Domain::Attack, i as u64))
                .collect(),
            index,
            classifier: Classifier::new(
                variant,
                config.feature_bins,
                config.freeze_epoch(),
                &roles,
            ),
            roles,
            flows: flow_states,
            queue,
            transcript: Vec::new(),
            trust_records: Vec::new(),
            discovery_events: Vec::new(),
            collect_discovery,
            pending_epoch: None,
            discoveries: 0,
            security_drops: 0,
            quarantined_at: vec![None; n],
            config,
        })
    }

    fn run(mut self) -> Result<RunOutput, RunError> {
        loop {
            let event = self.queue.pop().expect("SimEnd terminates the loop");
            match event.kind {
                EventKind::MobilityTick => self.on_tick(),
                EventKind::TrafficGen { flow, seq } => self.on_traffic(flow as usize, seq),
                EventKind::PacketSend { flow } => self.on_window_close(flow as usize),
                EventKind::PacketArrival {
                    flow,
                    seq,
                    path,
                    hop,
                    origin,
                } => self.on_arrival(flow as usize, seq, &path, hop as usize, origin),
                EventKind::TrustEpoch { epoch } => self.on_epoch_boundary(epoch),
                EventKind::HandshakeTimeout { epoch } => self.on_epoch_resolution(epoch),
                EventKind::SimEnd => break,
            }
        }

        let labels = self.classifier.labels();
        let report = aggregate(
            &self.transcript,
            &self.roles,
            &labels,
            self.flows[0].spec.id,
            self.config.per_hop_ms,
            self.classifier.per_node_classify(),
        )?;
        Ok(RunOutput {
            roles: self.roles,
            labels,
            trust_records: self.trust_records,
            transcript: self.transcript,
            discovery_events: self.discovery_events,
            report,
            model_snapshot: self.classifier.model().map(|m| m.snapshot_csv()),
            discoveries: self.discoveries,
            security_drops: self.security_drops,
            totals: self.nodes.iter().map(|n| n.total).collect(),
            quarantined_at: self.quarantined_at,
        })
    }

    fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn on_tick(&mut self) {
        for i in 0..self.nodes.len() {
            advance(
                &mut self.nodes[i],
                MOBILITY_TICK_MS,
                &self.arena,
                self.config.max_speed_mps,
                &mut self.mobility_rngs[i],
            );
        }
        let positions: Vec<Position> = self.nodes.iter().map(|n| n.position).collect();
        self.index = NeighborIndex::build(&positions, self.config.radio_range_m);
    }

    fn on_traffic(&mut self, idx: usize, seq: u32) {
        let t = self.now();
        let spec = &self.flows[idx].spec;
        let (flow_id, source, dest) = (spec.id, spec.source, spec.dest);
        tally(&mut self.nodes[source as usize], PacketCounters::record_origination);
        self.transcript.push(TranscriptEvent::Originate {
            t,
            flow: flow_id,
            seq,
            source,
            dest,
        });
        if self.flows[idx].paths.is_empty() {
            self.flows[idx].pending.push((seq, t));
            self.maybe_start_discovery(idx);
        } else {
            self.send_packet(idx, seq, t, t);
        }
    }

    /// Launch `seq` on the flow's next path in rotation. `origin` is the
    /// origination time (earlier than `t` for packets that sat queued).
    fn send_packet(&mut self, idx: usize, seq: u32, origin: SimTime, t: SimTime) {
        if self.flows[idx].paths.is_empty() {
            // Pruning emptied the set mid-flush; queue for rediscovery.
            self.flows[idx].pending.push((seq, origin));
            self.maybe_start_discovery(idx);
            return;
        }
        let flow = &mut self.flows[idx];
        let path = flow.paths.paths[flow.rotation % flow.paths.len()].clone();
        flow.rotation += 1;
        let flow_id = flow.spec.id;
        let (src, next) = (path[0], path[1]);
        if !self.index.are_neighbors(src, next) {
            self.transcript.push(TranscriptEvent::Drop {
                t,
                flow: flow_id,
                seq,
                at: src,
                reason: DropReason::RouteBreak,
            });
            self.prune_path(idx, &path);
        } else if !self.classifier.is_eligible(next) {
            self.security_drops += 1;
            self.transcript.push(TranscriptEvent::Drop {
                t,
                flow: flow_id,
                seq,
                at: src,
                reason: DropReason::Security,
            });
            self.prune_path(idx, &path);
        } else {
            self.queue
                .schedule(
                    t + self.config.per_hop_ms,
                    EventKind::PacketArrival {
                        flow: idx as FlowId,
                        seq,
                        path,
                        hop: 1,
                        origin,
                    },
                )
                .expect("hop lands in the future");
        }
    }

    fn on_arrival(
        &mut self,
        idx: usize,
        seq: u32,
        path: &std::rc::Rc<[NodeId]>,
        hop: usize,
        origin: SimTime,
    ) {
        let t = self.now();
        let here = path[hop];
        let flow_id = self.flows[idx].spec.id;
        tally(&mut self.nodes[here as usize], PacketCounters::record_received);

        if hop == path.len() - 1 {
            tally(&mut self.nodes[here as usize], PacketCounters::record_consumed);
            self.transcript.push(TranscriptEvent::Deliver {
                t,
                flow: flow_id,
                seq,
                hops: (path.len() - 1) as u32,
            });
            return;
        }

        match attacker_action(self.roles[here as usize], &mut self.attack_rngs[here as usize]) {
            RelayAction::Drop => {
                tally(&mut self.nodes[here as usize], PacketCounters::record_dropped);
                self.transcript.push(TranscriptEvent::Drop {
                    t,
                    flow: flow_id,
                    seq,
                    at: here,
                    reason: DropReason::Attack,
                });
            }
            RelayAction::Forward => {
                // The relay did its part in all three branches below: losses
                // past this point are charged to the link or to policy, not
                // to the relay's forwarding rate.
                tally(&mut self.nodes[here as usize], PacketCounters::record_forwarded);
                let next = path[hop + 1];
                if !self.index.are_neighbors(here, next) {
                    self.transcript.push(TranscriptEvent::Drop {
                        t,
                        flow: flow_id,
                        seq,
                        at: here,
                        reason: DropReason::RouteBreak,
                    });
                    self.prune_path(idx, path);
                } else if !self.classifier.is_eligible(next) {
                    self.security_drops += 1;
                    self.transcript.push(TranscriptEvent::Drop {
                        t,
                        flow: flow_id,
                        seq,
                        at: here,
                        reason: DropReason::Security,
                    });
                    self.prune_path(idx, path);
                } else {
                    self.queue
                        .schedule(
                            t + self.config.per_hop_ms,
                            EventKind::PacketArrival {
                                flow: idx as FlowId,
                                seq,
                                path: path.clone(),
                                hop: (hop + 1) as u8,
                                origin,
                            },
                        )
                        .expect("hop lands in the future");
                }
            }
        }
    }

    /// Remove one revealed-unusable path. The flow may have reinstalled a
    /// fresh set since the packet launched, in which case this is a no-op.
    /// A set left short of the budget is refreshed in the background while
    /// the surviving paths keep carrying traffic, so the flow rarely stalls
    /// on a fully exhausted set.
    fn prune_path(&mut self, idx: usize, path: &std::rc::Rc<[NodeId]>) {
        let before = self.flows[idx].paths.len();
        self.flows[idx].paths.paths.retain(|p| p != path);
        if self.flows[idx].paths.len() < before {
            self.maybe_start_discovery(idx);
        }
    }

    fn maybe_start_discovery(&mut self, idx: usize) {
        let t = self.now();
        let flow = &self.flows[idx];
        if flow.discovering || t < flow.next_retry {
            return;
        }
        let (source, dest) = (flow.spec.source, flow.spec.dest);
        self.flows[idx].discovering = true;
        self.flows[idx].request_seq += 1;
        self.discoveries += 1;

        let graph = StaticGraph::from_index(&self.index);
        let eligible = self.classifier.eligibility();
        match run_discovery(
            &graph,
            &eligible,
            source,
            dest,
            self.flows[idx].request_seq,
            t,
            &self.discovery_cfg,
        ) {
            Ok(outcome) => {
                let close = t + self.config.discovery_window_ms;
                if self.collect_discovery {
                    self.discovery_events.extend(outcome.events);
                }
                self.flows[idx].candidates = outcome
                    .replies
                    .iter()
                    .filter(|r| r.arrived <= close)
                    .map(|r| CandidatePath {
                        path: r.path.clone(),
                        arrived: r.arrived,
                    })
                    .collect();
                self.queue
                    .schedule(
                        close,
                        EventKind::PacketSend {
                            flow: idx as FlowId,
                        },
                    )
                    .expect("window closes in the future");
            }
            Err(_refused) => {
                // A quarantined endpoint cannot route at all; treat it as a
                // failed discovery and back off.
                self.flows[idx].discovering = false;
                self.flows[idx].next_retry = t + self.config.retry_backoff_ms;
                self.drop_pending(idx, DropReason::NoRoute);
            }
        }
    }

    fn on_window_close(&mut self, idx: usize) {
        let t = self.now();
        let flow = &mut self.flows[idx];
        flow.discovering = false;
        let candidates = std::mem::take(&mut flow.candidates);
        let selected = select_paths(&candidates, self.config.path_budget);
        if selected.is_empty() {
            // A background refresh may come up dry while surviving paths
            // still carry the flow; only a flow left with no routes at all
            // backs off before retrying.
            if flow.paths.is_empty() {
                flow.next_retry = t + self.config.retry_backoff_ms;
                self.drop_pending(idx, DropReason::NoRoute);
            }
        } else {
            flow.paths = selected;
            flow.rotation = 0;
            let pending = std::mem::take(&mut self.flows[idx].pending);
            for (seq, origin) in pending {
                if t.as_millis() - origin.as_millis() > MAX_QUEUE_MS {
                    let flow_id = self.flows[idx].spec.id;
                    let source = self.flows[idx].spec.source;
                    self.transcript.push(TranscriptEvent::Drop {
                        t,
                        flow: flow_id,
                        seq,
                        at: source,
                        reason: DropReason::NoRoute,
                    });
                } else {
                    self.send_packet(idx, seq, origin, t);
                }
            }
        }
    }

    fn drop_pending(&mut self, idx: usize, reason: DropReason) {
        let t = self.now();
        let flow_id = self.flows[idx].spec.id;
        let source = self.flows[idx].spec.source;
        for (seq, _origin) in std::mem::take(&mut self.flows[idx].pending) {
            self.transcript.push(TranscriptEvent::Drop {
                t,
                flow: flow_id,
                seq,
                at: source,
                reason,
            });
        }
    }

    fn on_epoch_boundary(&mut self, epoch: u32) {
        assert!(
            self.pending_epoch.is_none(),
            "epoch {epoch} opened before the previous one resolved"
        );
        let snapshot: Vec<PacketCounters> = self.nodes.iter().map(|n| n.window).collect();
        for node in &mut self.nodes {
            node.window = PacketCounters::default();
        }
        self.pending_epoch = Some((epoch, snapshot));
        self.queue
            .schedule(
                self.now() + self.config.handshake_timeout_ms,
                EventKind::HandshakeTimeout { epoch },
            )
            .expect("resolution fits in the run by construction");
    }

    fn on_epoch_resolution(&mut self, epoch: u32) {
        let (snap_epoch, windows) = self.pending_epoch.take().expect("snapshot exists");
        assert_eq!(snap_epoch, epoch, "epoch resolutions interleaved");
        let records = trust_epoch(&EpochInputs {
            epoch,
            neighbors: &self.index,
            roles: &self.roles,
            control: self.config.control,
            windows: &windows,
            mode: self.config.trust_mode,
            handshake_timeout_ms: self.config.handshake_timeout_ms,
            probe_rtt_ms: PROBE_RTT_MS,
        });
        let active: Vec<bool> = windows.iter().map(|w| w.received > 0).collect();
        let now = self.now();
        for node in self.classifier.observe_epoch(epoch, &records, &active) {
            self.quarantined_at[node as usize] = Some(now);
        }
        self.trust_records.extend(records);
        self.revalidate_paths();
    }

    /// Drop installed paths that the current topology or quarantine no
    /// longer supports, then rediscover for any flow left routeless while it
    /// still has traffic to move. Running the rediscovery now, rather than
    /// when the next packet shows up, lets the window elapse during idle
    /// air-time. Runs at every epoch resolution, for every variant, so the
    /// ablations differ only in who gets quarantined.
    fn revalidate_paths(&mut self) {
        let t = self.now();
        for idx in 0..self.flows.len() {
            let index = &self.index;
            let classifier = &self.classifier;
            let before = self.flows[idx].paths.len();
            self.flows[idx].paths.paths.retain(|path| {
                path.windows(2).all(|w| index.are_neighbors(w[0], w[1]))
                    && path.iter().all(|&n| classifier.is_eligible(n))
            });
            let flow = &self.flows[idx];
            let has_traffic = !flow.pending.is_empty() || t < flow.last_origination;
            let shrank = flow.paths.len() < before;
            if has_traffic && (flow.paths.is_empty() || shrank) {
                self.maybe_start_discovery(idx);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::write_transcript_csv;
    use crate::workload::{AttackKind, FlowPlan, RoleOverride};

    /// Four pinned nodes in a row, 200 m apart: a single 3-hop corridor.
    fn line_config() -> ScenarioConfig {
        ScenarioConfig {
            nodes: 4,
            pinned_positions: Some(vec![
                (100.0, 300.0),
                (300.0, 300.0),
                (500.0, 300.0),
                (700.0, 300.0),
            ]),
            max_speed_mps: 0.0,
            sim_time_s: 5,
            epoch_s: 1,
            malicious_fraction: 0.0,
            flows: FlowPlan {
                explicit: Some(vec![FlowSpec {
                    id: 0,
                    source: 0,
                    dest: 3,
                    rate_pps: 4.0,
                    packet_bytes: 512,
                    start_ms: 1000,
                    packet_limit: None,
                }]),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    /// A diamond: 0 reaches 3 via 1 (top) or 2 (bottom); 1-2 not linked.
    fn diamond_config() -> ScenarioConfig {
        ScenarioConfig {
            nodes: 4,
            pinned_positions: Some(vec![
                (100.0, 300.0),
                (300.0, 450.0),
                (300.0, 150.0),
                (500.0, 300.0),
            ]),
            max_speed_mps: 0.0,
            sim_time_s: 10,
            epoch_s: 2,
            malicious_fraction: 0.0,
            role_overrides: vec![RoleOverride {
                node: 1,
                role: "blackhole".into(),
            }],
            flows: FlowPlan {
                explicit: Some(vec![FlowSpec {
                    id: 0,
                    source: 0,
                    dest: 3,
                    rate_pps: 4.0,
                    packet_bytes: 512,
                    start_ms: 1000,
                    packet_limit: None,
                }]),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn static_line_delivers_every_packet() {
        let config = line_config();
        let out = run_scenario(&config, VariantSpec::Wtmrd, 7, false).unwrap();

        // 16 packets (1000..5000 ms at 250 ms spacing), all delivered.
        assert_eq!(out.report.total_packets, 16);
        assert_eq!(out.report.delivered, 16);
        assert_eq!(out.report.dsl_percent, 100.0);
        assert_eq!(out.report.adr_percent, 100.0);
        assert_eq!(out.discoveries, 1, "one discovery serves the whole run");

        // First packet waits out the discovery window (40 ms), then crosses
        // three 2 ms hops; later packets go immediately.
        let first_delivery = out
            .transcript
            .iter()
            .find_map(|e| match e {
                TranscriptEvent::Deliver { t, seq: 1, .. } => Some(*t),
                _ => None,
            })
            .unwrap();
        assert_eq!(first_delivery, SimTime(1046));
        // Mean delay: one packet waited 40 ms, fifteen sailed through.
        assert!((out.report.delay_millis - 2.5).abs() < 1e-9);
    }

    #[test]
    fn diamond_blackhole_is_quarantined_and_bypassed() {
        let config = diamond_config();
        let out = run_scenario(&config, VariantSpec::Wtmrd, 11, false).unwrap();

        // Ground truth recovered exactly.
        assert_eq!(out.report.adr_percent, 100.0);
        assert_eq!(
            out.labels[1],
            (1, Label::Malicious),
            "active blackhole must be caught"
        );

        // Warm-up (freeze epoch 1 resolves at 2.1 s): rotation feeds the
        // blackhole, so attack drops exist — the screen was not active early.
        let attack_drops: Vec<SimTime> = out
            .transcript
            .iter()
            .filter_map(|e| match e {
                TranscriptEvent::Drop {
                    t,
                    reason: DropReason::Attack,
                    at: 1,
                    ..
                } => Some(*t),
                _ => None,
            })
            .collect();
        assert!(!attack_drops.is_empty(), "pre-freeze traffic feeds the blackhole");
        let resolution = SimTime(2000 + config.handshake_timeout_ms);
        assert!(
            attack_drops.iter().all(|&t| t <= resolution),
            "no attack drops after quarantine: {attack_drops:?}"
        );

        // Everything after the purge flows over the bottom path.
        let post_freeze_losses = out
            .transcript
            .iter()
            .filter(|e| matches!(e, TranscriptEvent::Drop { t, .. } if *t > resolution))
            .count();
        assert_eq!(post_freeze_losses, 0);
        assert!(out.report.dsl_percent >= 80.0, "{}", out.report.dsl_percent);
    }

    #[test]
    fn undefended_run_keeps_feeding_the_blackhole() {
        let config = diamond_config();
        let out = run_scenario(&config, VariantSpec::NoClassification, 11, false).unwrap();
        assert_eq!(out.labels[1], (1, Label::Normal), "no screen, no verdict");

        // Rotation alternates top and bottom path for the whole run, so
        // roughly half the packets die at the blackhole.
        let attack_drops = out
            .transcript
            .iter()
            .filter(|e| {
                matches!(
                    e,
                    TranscriptEvent::Drop {
                        reason: DropReason::Attack,
                        ..
                    }
                )
            })
            .count() as u64;
        assert!(attack_drops >= out.report.total_packets / 3);
        assert!(out.report.dsl_percent <= 60.0, "{}", out.report.dsl_percent);
    }

    #[test]
    fn screened_run_dominates_undefended_on_the_same_seed() {
        let config = diamond_config();
        let screened = run_scenario(&config, VariantSpec::Wtmrd, 3, false).unwrap();
        let open = run_scenario(&config, VariantSpec::NoClassification, 3, false).unwrap();
        assert!(screened.report.dsl_percent > open.report.dsl_percent + 10.0);
    }

    #[test]
    fn identical_runs_produce_identical_transcripts() {
        let config = ScenarioConfig {
            nodes: 30,
            sim_time_s: 30,
            malicious_fraction: 0.2,
            attack: AttackKind::Grayhole { p: 0.5 },
            flows: FlowPlan {
                count: 2,
                ..Default::default()
            },
            ..Default::default()
        };
        let a = run_scenario(&config, VariantSpec::Wtmrd, 99, false).unwrap();
        let b = run_scenario(&config, VariantSpec::Wtmrd, 99, false).unwrap();
        assert_eq!(
            write_transcript_csv(&a.transcript),
            write_transcript_csv(&b.transcript)
        );
        assert_eq!(a.roles, b.roles);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.trust_records, b.trust_records);
        assert_eq!(a.model_snapshot, b.model_snapshot);

        let c = run_scenario(&config, VariantSpec::Wtmrd, 100, false).unwrap();
        assert_ne!(
            write_transcript_csv(&a.transcript),
            write_transcript_csv(&c.transcript),
            "different seeds must differ"
        );
    }

    #[test]
    fn packet_conservation_holds_in_static_runs() {
        let out = run_scenario(&line_config(), VariantSpec::Wtmrd, 5, false).unwrap();
        let originated = out
            .transcript
            .iter()
            .filter(|e| matches!(e, TranscriptEvent::Originate { .. }))
            .count();
        let terminal = out
            .transcript
            .iter()
            .filter(|e| !matches!(e, TranscriptEvent::Originate { .. }))
            .count();
        // Static topology, last origination long before the end: every
        // packet resolves.
        assert_eq!(originated, terminal);
    }

    #[test]
    fn mobile_reference_shape_runs_end_to_end() {
        // A shrunk cousin of the reference scenario: mobile, 20% blackhole.
        let config = ScenarioConfig {
            nodes: 40,
            sim_time_s: 60,
            flows: FlowPlan {
                count: 3,
                ..Default::default()
            },
            ..Default::default()
        };
        let out = run_scenario(&config, VariantSpec::Wtmrd, 1, false).unwrap();
        assert_eq!(out.roles.iter().filter(|r| r.is_malicious()).count(), 8);
        assert!(out.report.adr_percent >= 80.0, "{}", out.report.adr_percent);
        assert!(out.report.dsl_percent > 0.0);
        assert!(out.discoveries >= 3, "each flow discovers at least once");
        // Trust rows exist for every completed epoch (5 of 6 fit).
        assert_eq!(out.trust_records.len(), 40 * 5);
    }
}
