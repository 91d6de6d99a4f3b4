//! Scenario configuration, attacker roles and CBR traffic.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::sim::event::FlowId;
use crate::sim::node::{ControlBehavior, NodeId, Role};
use crate::sim::time::SimTime;
use crate::trust::TrustMode;

/// Which packet-dropping attack the malicious fraction mounts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackKind {
    Blackhole,
    Grayhole { p: f64 },
}

impl AttackKind {
    pub fn role(self) -> Role {
        match self {
            AttackKind::Blackhole => Role::Blackhole,
            AttackKind::Grayhole { p } => Role::Grayhole { p },
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackKind::Blackhole => write!(f, "blackhole"),
            AttackKind::Grayhole { p } => write!(f, "grayhole:{p}"),
        }
    }
}

impl FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "blackhole" {
            return Ok(AttackKind::Blackhole);
        }
        if let Some(p) = s.strip_prefix("grayhole:") {
            let p: f64 = p.parse().map_err(|e| format!("grayhole probability: {e}"))?;
            return Ok(AttackKind::Grayhole { p });
        }
        Err(format!(
            "unknown attack {s:?} (expected \"blackhole\" or \"grayhole:<p>\")"
        ))
    }
}

impl Serialize for AttackKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AttackKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Role syntax for per-node overrides: "honest", "blackhole", "grayhole:p".
fn parse_role(s: &str) -> Result<Role, String> {
    if s == "honest" {
        return Ok(Role::Honest);
    }
    Ok(s.parse::<AttackKind>()?.role())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RoleOverride {
    pub node: NodeId,
    /// Same syntax as `attack`, plus "honest".
    pub role: String,
}

/// One constant-bit-rate flow. Packet sequence numbers start at 1.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub id: FlowId,
    pub source: NodeId,
    pub dest: NodeId,
    pub rate_pps: f64,
    pub packet_bytes: u32,
    pub start_ms: u64,
    /// Emit exactly this many packets, then stop (sweep truncation).
    #[serde(default)]
    pub packet_limit: Option<u32>,
}

impl FlowSpec {
    /// Origination times, strictly before `sim_end`.
    pub fn packet_times(&self, sim_end: SimTime) -> Vec<SimTime> {
        let interval = 1000.0 / self.rate_pps;
        let mut times = Vec::new();
        for j in 0u32.. {
            if let Some(limit) = self.packet_limit {
                if j >= limit {
                    break;
                }
            }
            let t = self.start_ms + (j as f64 * interval).round() as u64;
            if t >= sim_end.as_millis() {
                break;
            }
            times.push(SimTime(t));
        }
        times
    }
}

/// Auto-generated flow set: `count` flows between distinct honest endpoints.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FlowPlan {
    pub count: u16,
    pub rate_pps: f64,
    pub packet_bytes: u32,
    /// Truncate the designated flow (flow 0) to exactly this many packets.
    pub designated_packets: Option<u32>,
    /// Fully explicit flows; overrides the auto-generated plan.
    pub explicit: Option<Vec<FlowSpec>>,
}

impl Default for FlowPlan {
    fn default() -> Self {
        FlowPlan {
            count: 5,
            rate_pps: 4.0,
            packet_bytes: 512,
            designated_packets: None,
            explicit: None,
        }
    }
}

/// Complete description of one simulated scenario.
///
/// Everything a run needs apart from the classification variant under test,
/// which is chosen per run so ablations can share a scenario.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub nodes: u16,
    pub arena_side_m: f64,
    pub max_speed_mps: f64,
    pub sim_time_s: u64,
    pub malicious_fraction: f64,
    pub attack: AttackKind,
    pub control: ControlBehavior,
    pub trust_mode: TrustMode,
    pub radio_range_m: f64,
    pub per_hop_ms: u64,
    pub epoch_s: u64,
    pub handshake_timeout_ms: u64,
    pub feature_bins: usize,
    pub path_budget: usize,
    pub max_duplicates: u32,
    pub warmup_fraction: f64,
    pub discovery_window_ms: u64,
    pub retry_backoff_ms: u64,
    pub seed: u64,
    pub runs: u32,
    pub flows: FlowPlan,
    /// Pin node positions (and disable mobility draws for pinned layouts
    /// when `max_speed_mps` is 0); mainly for scripted topologies.
    pub pinned_positions: Option<Vec<(f64, f64)>>,
    pub role_overrides: Vec<RoleOverride>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            nodes: 100,
            arena_side_m: 1200.0,
            max_speed_mps: 20.0,
            sim_time_s: 250,
            malicious_fraction: 0.2,
            attack: AttackKind::Blackhole,
            control: ControlBehavior::Responsive,
            trust_mode: TrustMode::Corrected,
            radio_range_m: 250.0,
            per_hop_ms: 2,
            epoch_s: 10,
            handshake_timeout_ms: 100,
            feature_bins: 4,
            path_budget: 3,
            max_duplicates: 3,
            warmup_fraction: 0.2,
            discovery_window_ms: 40,
            retry_backoff_ms: 500,
            seed: 42,
            runs: 10,
            flows: FlowPlan::default(),
            pinned_positions: None,
            role_overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn sim_end(&self) -> SimTime {
        SimTime::from_secs(self.sim_time_s)
    }

    /// First epoch boundary at or past `warmup_fraction * sim_time`; the
    /// classifier freezes there.
    pub fn freeze_epoch(&self) -> u32 {
        let warmup_ms = (self.sim_time_s as f64 * 1000.0 * self.warmup_fraction).ceil() as u64;
        let epoch_ms = self.epoch_s * 1000;
        (warmup_ms.div_ceil(epoch_ms)).max(1) as u32
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.nodes < 2 {
            return bad(format!("nodes = {} (need at least 2)", self.nodes));
        }
        if !(0.0..0.5).contains(&self.malicious_fraction) {
            return bad(format!(
                "malicious_fraction = {} outside [0, 0.5); attackers must stay \
                 a strict minority",
                self.malicious_fraction
            ));
        }
        if let AttackKind::Grayhole { p } = self.attack {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("grayhole probability {p} outside [0, 1]"));
            }
        }
        if self.sim_time_s == 0 {
            return bad("sim_time_s must be positive".into());
        }
        if self.epoch_s == 0 || self.epoch_s > self.sim_time_s {
            return bad(format!(
                "epoch_s = {} must be in 1..=sim_time_s ({})",
                self.epoch_s, self.sim_time_s
            ));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad(format!(
                "warmup_fraction = {} outside [0, 1)",
                self.warmup_fraction
            ));
        }
        if self.arena_side_m <= 0.0 {
            return bad("arena_side_m must be positive".into());
        }
        if self.max_speed_mps < 0.0 {
            return bad("max_speed_mps must be non-negative".into());
        }
        if self.radio_range_m <= 0.0 {
            return bad("radio_range_m must be positive".into());
        }
        if self.per_hop_ms == 0 {
            return bad("per_hop_ms must be at least 1".into());
        }
        if self.feature_bins == 0 {
            return bad("feature_bins must be at least 1".into());
        }
        if self.path_budget == 0 {
            return bad("path_budget must be at least 1".into());
        }
        if self.max_duplicates == 0 {
            return bad("max_duplicates must be at least 1".into());
        }
        if self.discovery_window_ms == 0 {
            return bad("discovery_window_ms must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        match &self.flows.explicit {
            None => {
                if self.flows.count == 0 {
                    return bad("flows.count must be at least 1".into());
                }
                if self.flows.rate_pps <= 0.0 {
                    return bad("flows.rate_pps must be positive".into());
                }
            }
            Some(explicit) => {
                if explicit.is_empty() {
                    return bad("flows.explicit must list at least one flow".into());
                }
                let mut ids: Vec<FlowId> = explicit.iter().map(|f| f.id).collect();
                ids.sort_unstable();
                ids.dedup();
                if ids.len() != explicit.len() {
                    return bad("flows.explicit contains duplicate flow ids".into());
                }
                for f in explicit {
                    if f.rate_pps <= 0.0 {
                        return bad(format!("flow {} rate_pps must be positive", f.id));
                    }
                }
            }
        }
        if let Some(pins) = &self.pinned_positions {
            if pins.len() != self.nodes as usize {
                return bad(format!(
                    "pinned_positions has {} entries for {} nodes",
                    pins.len(),
                    self.nodes
                ));
            }
        }
        for o in &self.role_overrides {
            if o.node >= self.nodes {
                return bad(format!("role_override for unknown node {}", o.node));
            }
            parse_role(&o.role).map_err(ConfigError::Invalid)?;
        }
        Ok(())
    }
}

/// Assign ground-truth roles: exactly `round(nodes * fraction)` nodes get the
/// attack role, chosen uniformly, then explicit overrides are applied.
pub fn assign_roles<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Vec<Role> {
    let n = config.nodes as usize;
    let count = (n as f64 * config.malicious_fraction).round() as usize;
    let ids: Vec<usize> = (0..n).collect();
    let chosen: Vec<usize> = ids.choose_multiple(rng, count).copied().collect();
    let mut roles = vec![Role::Honest; n];
    for id in chosen {
        roles[id] = config.attack.role();
    }
    for o in &config.role_overrides {
        roles[o.node as usize] = parse_role(&o.role).expect("validated earlier");
    }
    roles
}

/// Build the flow set. Auto-generated flows pick `2 * count` distinct honest
/// endpoints (sources and destinations never attack), with staggered starts.
pub fn generate_traffic<R: Rng>(
    config: &ScenarioConfig,
    roles: &[Role],
    rng: &mut R,
) -> Result<Vec<FlowSpec>, ConfigError> {
    if let Some(explicit) = &config.flows.explicit {
        for f in explicit {
            if f.source == f.dest {
                return Err(ConfigError::Invalid(format!(
                    "flow {} has identical endpoints",
                    f.id
                )));
            }
            for endpoint in [f.source, f.dest] {
                if endpoint as usize >= roles.len() {
                    return Err(ConfigError::Invalid(format!(
                        "flow {} references unknown node {endpoint}",
                        f.id
                    )));
                }
                if roles[endpoint as usize].is_malicious() {
                    return Err(ConfigError::Invalid(format!(
                        "flow {} endpoint {endpoint} is malicious",
                        f.id
                    )));
                }
            }
        }
        return Ok(explicit.clone());
    }

    let honest: Vec<NodeId> = roles
        .iter()
        .enumerate()
        .filter_map(|(i, r)| (!r.is_malicious()).then_some(i as NodeId))
        .collect();
    let needed = config.flows.count as usize * 2;
    if honest.len() < needed {
        return Err(ConfigError::Invalid(format!(
            "{} honest nodes cannot host {} flows (need {})",
            honest.len(),
            config.flows.count,
            needed
        )));
    }
    let endpoints: Vec<NodeId> = honest.choose_multiple(rng, needed).copied().collect();
    Ok((0..config.flows.count)
        .map(|i| FlowSpec {
            id: i,
            source: endpoints[2 * i as usize],
            dest: endpoints[2 * i as usize + 1],
            rate_pps: config.flows.rate_pps,
            packet_bytes: config.flows.packet_bytes,
            start_ms: 1000 + 500 * i as u64,
            packet_limit: (i == 0)
                .then_some(config.flows.designated_packets)
                .flatten(),
        })
        .collect())
}

/// What a relay does with one data packet handed to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayAction {
    Forward,
    Drop,
}

/// Role-dependent data-plane behaviour; grayholes draw from their own stream.
pub fn attacker_action<R: Rng>(role: Role, rng: &mut R) -> RelayAction {
    match role {
        Role::Honest => RelayAction::Forward,
        Role::Blackhole => RelayAction::Drop,
        Role::Grayhole { p } => {
            if rng.gen_bool(p) {
                RelayAction::Drop
            } else {
                RelayAction::Forward
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream, Domain};

    #[test]
    fn attack_syntax_round_trips() {
        for text in ["blackhole", "grayhole:0.5"] {
            let attack: AttackKind = text.parse().unwrap();
            assert_eq!(attack.to_string(), text);
        }
        assert!("greyhole:0.5".parse::<AttackKind>().is_err());
        assert!("grayhole:abc".parse::<AttackKind>().is_err());
    }

    #[test]
    fn role_head_count_is_exact() {
        for (nodes, fraction, expected) in [(100u16, 0.2, 20), (10, 0.25, 3), (50, 0.0, 0)] {
            let config = ScenarioConfig {
                nodes,
                malicious_fraction: fraction,
                ..Default::default()
            };
            let mut rng = stream(1, Domain::Roles, 0);
            let roles = assign_roles(&config, &mut rng);
            let malicious = roles.iter().filter(|r| r.is_malicious()).count();
            assert_eq!(malicious, expected, "nodes={nodes} fraction={fraction}");
        }
    }

    #[test]
    fn role_tables_replay_with_the_seed() {
        let config = ScenarioConfig::default();
        let a = assign_roles(&config, &mut stream(9, Domain::Roles, 0));
        let b = assign_roles(&config, &mut stream(9, Domain::Roles, 0));
        let c = assign_roles(&config, &mut stream(10, Domain::Roles, 0));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn overrides_win_over_random_assignment() {
        let config = ScenarioConfig {
            nodes: 10,
            malicious_fraction: 0.0,
            role_overrides: vec![RoleOverride {
                node: 4,
                role: "grayhole:0.7".into(),
            }],
            ..Default::default()
        };
        let roles = assign_roles(&config, &mut stream(1, Domain::Roles, 0));
        assert_eq!(roles[4], Role::Grayhole { p: 0.7 });
    }

    #[test]
    fn flow_endpoints_are_honest_and_distinct() {
        let config = ScenarioConfig::default();
        let roles = assign_roles(&config, &mut stream(3, Domain::Roles, 0));
        let flows =
            generate_traffic(&config, &roles, &mut stream(3, Domain::Traffic, 0)).unwrap();
        assert_eq!(flows.len(), 5);
        let mut used = std::collections::HashSet::new();
        for f in &flows {
            assert!(!roles[f.source as usize].is_malicious());
            assert!(!roles[f.dest as usize].is_malicious());
            assert!(used.insert(f.source), "endpoint reuse");
            assert!(used.insert(f.dest), "endpoint reuse");
        }
    }

    #[test]
    fn too_few_honest_nodes_is_a_config_error() {
        let config = ScenarioConfig {
            nodes: 8,
            malicious_fraction: 0.5, // 4 honest, but 5 flows need 10
            ..Default::default()
        };
        let roles = assign_roles(&config, &mut stream(0, Domain::Roles, 0));
        let err = generate_traffic(&config, &roles, &mut stream(0, Domain::Traffic, 0));
        assert!(matches!(err, Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn explicit_flows_with_malicious_endpoint_rejected() {
        let config = ScenarioConfig {
            nodes: 4,
            malicious_fraction: 0.0,
            role_overrides: vec![RoleOverride {
                node: 1,
                role: "blackhole".into(),
            }],
            flows: FlowPlan {
                explicit: Some(vec![FlowSpec {
                    id: 0,
                    source: 0,
                    dest: 1,
                    rate_pps: 4.0,
                    packet_bytes: 512,
                    start_ms: 1000,
                    packet_limit: None,
                }]),
                ..Default::default()
            },
            ..Default::default()
        };
        let roles = assign_roles(&config, &mut stream(0, Domain::Roles, 0));
        assert!(generate_traffic(&config, &roles, &mut stream(0, Domain::Traffic, 0)).is_err());
    }

    #[test]
    fn packet_times_honor_rate_start_and_truncation() {
        let flow = FlowSpec {
            id: 0,
            source: 0,
            dest: 1,
            rate_pps: 4.0,
            packet_bytes: 512,
            start_ms: 1000,
            packet_limit: Some(3),
        };
        let times = flow.packet_times(SimTime::from_secs(250));
        assert_eq!(times, vec![SimTime(1000), SimTime(1250), SimTime(1500)]);

        let open_ended = FlowSpec {
            packet_limit: None,
            ..flow
        };
        let times = open_ended.packet_times(SimTime::from_secs(2));
        assert_eq!(times, vec![SimTime(1000), SimTime(1250), SimTime(1500), SimTime(1750)]);
    }

    #[test]
    fn grayhole_drop_frequency_matches_probability() {
        let mut rng = stream(5, Domain::Attack, 3);
        let n = 10_000;
        let drops = (0..n)
            .filter(|_| {
                attacker_action(Role::Grayhole { p: 0.3 }, &mut rng) == RelayAction::Drop
            })
            .count();
        let rate = drops as f64 / n as f64;
        assert!((rate - 0.3).abs() < 0.02, "drop rate {rate}");
    }

    #[test]
    fn honest_and_blackhole_actions_are_degenerate() {
        let mut rng = stream(5, Domain::Attack, 0);
        for _ in 0..100 {
            assert_eq!(attacker_action(Role::Honest, &mut rng), RelayAction::Forward);
            assert_eq!(attacker_action(Role::Blackhole, &mut rng), RelayAction::Drop);
        }
    }

    #[test]
    fn toml_round_trip_preserves_config() {
        let config = ScenarioConfig {
            attack: AttackKind::Grayhole { p: 0.4 },
            flows: FlowPlan {
                designated_packets: Some(50),
                ..Default::default()
            },
            ..Default::default()
        };
        let text = config.to_toml();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = ScenarioConfig::from_toml("nodes = 50\nnodecount = 10\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nodecount"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        for (mutation, needle) in [
            ("nodes = 1", "nodes"),
            ("malicious_fraction = 1.5", "malicious_fraction"),
            ("malicious_fraction = 0.6", "malicious_fraction"),
            ("malicious_fraction = 0.5", "malicious_fraction"),
            ("attack = \"grayhole:1.2\"", "probability"),
            ("warmup_fraction = 1.0", "warmup_fraction"),
            ("epoch_s = 0", "epoch_s"),
            ("runs = 0", "runs"),
        ] {
            let err = ScenarioConfig::from_toml(mutation).unwrap_err();
            assert!(err.to_string().contains(needle), "{mutation}: {err}");
        }
    }

    #[test]
    fn freeze_epoch_is_first_boundary_past_warmup() {
        let config = ScenarioConfig::default(); // 250s, epoch 10s, warmup 0.2
        assert_eq!(config.freeze_epoch(), 5);
        let tight = ScenarioConfig {
            sim_time_s: 95,
            ..Default::default()
        };
        assert_eq!(tight.freeze_epoch(), 2); // 19s of warmup -> epoch 2 at 20s
    }
}
