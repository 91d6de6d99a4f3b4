//! Evaluation metrics: detection rate, detection time, delivery rate of the
//! designated flow, and mean end-to-end delay, all recomputed from run
//! transcripts.
//!
//! Detection time is the one wall-clock-derived quantity (nodes × measured
//! per-node classification time). It lives in its own report fields and CSV
//! columns so reproducibility checks can exclude exactly those columns; the
//! multiplication itself is done on integer [`Duration`]s, never on floats,
//! so `50 × 0.58 ms` is exactly `29 ms`.
//!
//! A packet's expected arrival is its origination time plus hop count times
//! the nominal per-hop latency, so delay measures queueing and rediscovery
//! overhead above an ideal traversal of the path actually taken. Delivery
//! rate is tallied on the designated flow only; delay averages over delivered
//! packets of all flows.

use std::collections::HashMap;
use std::time::Duration;

use thiserror::Error;

use crate::sim::event::FlowId;
use crate::sim::node::{NodeId, Role};
use crate::transcript::TranscriptEvent;
use crate::winnow::Label;

/// Percentage of nodes whose final label matches their ground-truth role.
///
/// Exact for every tally that fits in f64's integer range: the count is
/// scaled by 100 before the single division.
pub fn attack_detection_rate(correct: u64, total: u64) -> f64 {
    assert!(total > 0, "detection rate over an empty scenario");
    assert!(correct <= total, "more correct detections than nodes");
    (correct * 100) as f64 / total as f64
}

/// Total classification time: nodes × measured per-node classify time.
pub fn attack_detection_time(total_nodes: u64, per_node: Duration) -> Duration {
    per_node * u32::try_from(total_nodes).expect("node count fits in u32")
}

/// Percentage of the designated flow's packets that reached the destination.
pub fn data_security_level(delivered: u64, sent: u64) -> f64 {
    assert!(sent > 0, "delivery rate over an empty workload");
    assert!(delivered <= sent, "more deliveries than packets sent");
    (delivered * 100) as f64 / sent as f64
}

/// Per-packet delay above the ideal path traversal, in milliseconds.
pub fn delay(actual_arrival_ms: u64, expected_arrival_ms: u64) -> u64 {
    assert!(
        actual_arrival_ms >= expected_arrival_ms,
        "packet arrived {actual_arrival_ms} ms, before its ideal {expected_arrival_ms} ms"
    );
    actual_arrival_ms - expected_arrival_ms
}

/// Per-run metric report: the four headline numbers plus every raw tally
/// they derive from, so an independent pass over the transcript can verify
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub adr_percent: f64,
    /// Wall-clock-derived; excluded from reproducibility comparisons.
    pub adt_millis: f64,
    pub dsl_percent: f64,
    pub delay_millis: f64,
    /// Nodes whose label matches their role.
    pub correct_detected: u64,
    pub total_nodes: u64,
    /// Designated-flow packets delivered / sent.
    pub delivered: u64,
    pub total_packets: u64,
    /// Measured mean wall-clock time to featurize and classify one node.
    pub per_node_classify: Duration,
    /// Delivered packets across all flows (delay denominator).
    pub delay_packets: u64,
    pub actual_arrival_sum_ms: u64,
    pub expected_arrival_sum_ms: u64,
}

pub const METRICS_HEADER: &str = "variant,adr_percent,dsl_percent,delay_millis,\
correct_detected,total_nodes,delivered,total_packets,delay_packets,\
actual_arrival_sum_ms,expected_arrival_sum_ms,adt_millis,per_node_classify_micros";

/// Wall-clock columns come last so comparisons can strip a fixed suffix.
pub const METRICS_WALL_CLOCK_COLUMNS: usize = 2;

impl MetricsReport {
    pub fn csv_row(&self, variant: &str) -> String {
        format!(
            "{variant},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.adr_percent,
            self.dsl_percent,
            self.delay_millis,
            self.correct_detected,
            self.total_nodes,
            self.delivered,
            self.total_packets,
            self.delay_packets,
            self.actual_arrival_sum_ms,
            self.expected_arrival_sum_ms,
            self.adt_millis,
            self.per_node_classify.as_micros()
        )
    }

    pub fn to_csv(&self, variant: &str) -> String {
        format!("{METRICS_HEADER}\n{}\n", self.csv_row(variant))
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("transcript: {kind} of flow {flow} seq {seq} without origination")]
    MissingOrigination {
        kind: &'static str,
        flow: FlowId,
        seq: u32,
    },
    #[error("transcript: flow {flow} seq {seq} originated twice")]
    DuplicateOrigination { flow: FlowId, seq: u32 },
    #[error("transcript: flow {flow} seq {seq} has two terminal events")]
    DuplicateTerminal { flow: FlowId, seq: u32 },
    #[error(
        "transcript: flow {flow} seq {seq} arrived at {actual_ms} ms, \
         before its ideal {expected_ms} ms"
    )]
    EarlyArrival {
        flow: FlowId,
        seq: u32,
        actual_ms: u64,
        expected_ms: u64,
    },
    #[error("labels cover {labels} nodes but the scenario has {nodes}")]
    LabelMismatch { labels: usize, nodes: usize },
    #[error("designated flow {flow} sent no packets")]
    EmptyWorkload { flow: FlowId },
    #[error("empty scenario: no nodes")]
    EmptyScenario,
}

/// Recompute the full report from a transcript, ground-truth roles and final
/// labels. Pure except for `per_node_classify`, which the caller measures.
pub fn aggregate(
    events: &[TranscriptEvent],
    roles: &[Role],
    labels: &[(NodeId, Label)],
    designated_flow: FlowId,
    per_hop_ms: u64,
    per_node_classify: Duration,
) -> Result<MetricsReport, MetricsError> {
    if roles.is_empty() {
        return Err(MetricsError::EmptyScenario);
    }
    if labels.len() != roles.len() {
        return Err(MetricsError::LabelMismatch {
            labels: labels.len(),
            nodes: roles.len(),
        });
    }

    let correct_detected = labels
        .iter()
        .filter(|&&(node, label)| {
            roles[node as usize].is_malicious() == (label == Label::Malicious)
        })
        .count() as u64;
    let total_nodes = roles.len() as u64;

    // Tally packets in two passes so the result is invariant under row
    // reordering: first originations, then terminals joined against them.
    let mut origination: HashMap<(FlowId, u32), u64> = HashMap::new();
    for e in events {
        if let TranscriptEvent::Originate { t, flow, seq, .. } = e {
            if origination.insert((*flow, *seq), t.as_millis()).is_some() {
                return Err(MetricsError::DuplicateOrigination {
                    flow: *flow,
                    seq: *seq,
                });
            }
        }
    }

    let mut terminal_seen: HashMap<(FlowId, u32), ()> = HashMap::new();
    let mut designated_delivered = 0u64;
    let mut delay_packets = 0u64;
    let mut actual_sum = 0u64;
    let mut expected_sum = 0u64;
    for e in events {
        let (kind, flow, seq) = match e {
            TranscriptEvent::Originate { .. } => continue,
            TranscriptEvent::Deliver { flow, seq, .. } => ("delivery", *flow, *seq),
            TranscriptEvent::Drop { flow, seq, .. } => ("drop", *flow, *seq),
        };
        let Some(&originated_ms) = origination.get(&(flow, seq)) else {
            return Err(MetricsError::MissingOrigination { kind, flow, seq });
        };
        if terminal_seen.insert((flow, seq), ()).is_some() {
            return Err(MetricsError::DuplicateTerminal { flow, seq });
        }
        if let TranscriptEvent::Deliver { t, hops, .. } = e {
            let actual = t.as_millis();
            let expected = originated_ms + u64::from(*hops) * per_hop_ms;
            if actual < expected {
                return Err(MetricsError::EarlyArrival {
                    flow,
                    seq,
                    actual_ms: actual,
                    expected_ms: expected,
                });
            }
            delay_packets += 1;
            actual_sum += actual;
            expected_sum += expected;
            if flow == designated_flow {
                designated_delivered += 1;
            }
        }
    }

    let total_packets = origination
        .keys()
        .filter(|(flow, _)| *flow == designated_flow)
        .count() as u64;
    if total_packets == 0 {
        return Err(MetricsError::EmptyWorkload {
            flow: designated_flow,
        });
    }

    let adt = attack_detection_time(total_nodes, per_node_classify);
    Ok(MetricsReport {
        adr_percent: attack_detection_rate(correct_detected, total_nodes),
        adt_millis: adt.as_secs_f64() * 1000.0,
        dsl_percent: data_security_level(designated_delivered, total_packets),
        delay_millis: if delay_packets == 0 {
            0.0 // nothing delivered anywhere: no delay to report
        } else {
            (actual_sum - expected_sum) as f64 / delay_packets as f64
        },
        correct_detected,
        total_nodes,
        delivered: designated_delivered,
        total_packets,
        per_node_classify,
        delay_packets,
        actual_arrival_sum_ms: actual_sum,
        expected_arrival_sum_ms: expected_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::time::SimTime;
    use crate::transcript::DropReason;

    #[test]
    fn detection_rate_worked_examples_are_exact() {
        assert_eq!(attack_detection_rate(47, 50), 94.0);
        assert_eq!(attack_detection_rate(39, 50), 78.0);
        assert_eq!(attack_detection_rate(36, 50), 72.0);
        assert_eq!(attack_detection_rate(50, 50), 100.0);
        assert_eq!(attack_detection_rate(0, 50), 0.0);
    }

    #[test]
    fn detection_time_worked_examples_are_exact() {
        let cases = [
            (50, Duration::from_micros(400), Duration::from_millis(20)),
            (50, Duration::from_micros(580), Duration::from_millis(29)),
            (50, Duration::from_micros(700), Duration::from_millis(35)),
            (50, Duration::ZERO, Duration::ZERO),
        ];
        for (total, per_node, expected) in cases {
            assert_eq!(attack_detection_time(total, per_node), expected);
        }
    }

    #[test]
    fn delivery_rate_worked_examples_are_exact() {
        assert_eq!(data_security_level(9, 10), 90.0);
        assert_eq!(data_security_level(8, 10), 80.0);
        assert_eq!(data_security_level(7, 10), 70.0);
        assert_eq!(data_security_level(0, 10), 0.0);
        assert_eq!(data_security_level(38, 40), 95.0);
    }

    #[test]
    fn delay_worked_examples_are_exact() {
        assert_eq!(delay(32, 25), 7);
        assert_eq!(delay(37, 25), 12);
        assert_eq!(delay(42, 25), 17);
        assert_eq!(delay(25, 25), 0);
    }

    #[test]
    #[should_panic(expected = "before its ideal")]
    fn early_arrival_panics() {
        delay(24, 25);
    }

    fn originate(t: u64, flow: FlowId, seq: u32) -> TranscriptEvent {
        TranscriptEvent::Originate {
            t: SimTime(t),
            flow,
            seq,
            source: 0,
            dest: 9,
        }
    }

    fn deliver(t: u64, flow: FlowId, seq: u32, hops: u32) -> TranscriptEvent {
        TranscriptEvent::Deliver {
            t: SimTime(t),
            flow,
            seq,
            hops,
        }
    }

    fn two_flow_transcript() -> Vec<TranscriptEvent> {
        vec![
            originate(1000, 0, 1),
            deliver(1006, 0, 1, 3), // ideal 1006: zero delay
            originate(1250, 0, 2),
            TranscriptEvent::Drop {
                t: SimTime(1254),
                flow: 0,
                seq: 2,
                at: 5,
                reason: DropReason::Attack,
            },
            originate(1500, 0, 3),
            deliver(1510, 0, 3, 2), // ideal 1504: 6 ms of queueing
            originate(2000, 1, 1),
            deliver(2004, 1, 1, 2), // ideal 2004: zero delay
        ]
    }

    fn uniform_labels(roles: &[Role], labels: &[Label]) -> Vec<(NodeId, Label)> {
        assert_eq!(roles.len(), labels.len());
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as NodeId, l))
            .collect()
    }

    #[test]
    fn aggregate_tallies_designated_flow_and_all_flow_delay() {
        let roles = vec![Role::Honest, Role::Blackhole, Role::Honest, Role::Honest];
        let labels = uniform_labels(
            &roles,
            &[
                Label::Normal,
                Label::Malicious,
                Label::Normal,
                Label::Malicious, // one honest node wrongly quarantined
            ],
        );
        let report = aggregate(
            &two_flow_transcript(),
            &roles,
            &labels,
            0,
            2,
            Duration::from_micros(400),
        )
        .unwrap();
        assert_eq!(report.adr_percent, 75.0);
        assert_eq!(report.correct_detected, 3);
        assert_eq!(report.dsl_percent, (2 * 100) as f64 / 3.0);
        assert_eq!(report.delivered, 2);
        assert_eq!(report.total_packets, 3);
        assert_eq!(report.delay_packets, 3);
        assert_eq!(report.delay_millis, 2.0); // (0 + 6 + 0) / 3
        assert_eq!(report.adt_millis, 1.6); // 4 nodes x 0.4 ms
    }

    #[test]
    fn aggregate_is_invariant_under_row_reordering() {
        let roles = vec![Role::Honest; 4];
        let labels = uniform_labels(&roles, &[Label::Normal; 4]);
        let mut events = two_flow_transcript();
        let baseline = aggregate(&events, &roles, &labels, 0, 2, Duration::ZERO).unwrap();
        events.reverse();
        let reordered = aggregate(&events, &roles, &labels, 0, 2, Duration::ZERO).unwrap();
        assert_eq!(reordered, baseline);
    }

    #[test]
    fn aggregate_rejects_inconsistent_transcripts() {
        let roles = vec![Role::Honest; 2];
        let labels = uniform_labels(&roles, &[Label::Normal; 2]);
        let check = |events: Vec<TranscriptEvent>| {
            aggregate(&events, &roles, &labels, 0, 2, Duration::ZERO).unwrap_err()
        };

        let err = check(vec![deliver(1006, 0, 1, 3)]);
        assert!(matches!(err, MetricsError::MissingOrigination { .. }), "{err}");

        let err = check(vec![originate(1000, 0, 1), originate(1000, 0, 1)]);
        assert!(matches!(err, MetricsError::DuplicateOrigination { .. }), "{err}");

        let err = check(vec![
            originate(1000, 0, 1),
            deliver(1006, 0, 1, 3),
            deliver(1008, 0, 1, 4),
        ]);
        assert!(matches!(err, MetricsError::DuplicateTerminal { .. }), "{err}");

        let err = check(vec![originate(1000, 0, 1), deliver(1004, 0, 1, 3)]);
        assert!(matches!(err, MetricsError::EarlyArrival { .. }), "{err}");

        let err = check(vec![originate(1000, 1, 1), deliver(1002, 1, 1, 1)]);
        assert!(matches!(err, MetricsError::EmptyWorkload { .. }), "{err}");
    }

    #[test]
    fn aggregate_rejects_label_table_mismatch() {
        let err = aggregate(
            &[originate(0, 0, 1)],
            &[Role::Honest; 3],
            &[(0, Label::Normal)],
            0,
            2,
            Duration::ZERO,
        )
        .unwrap_err();
        assert!(matches!(err, MetricsError::LabelMismatch { .. }));
    }

    #[test]
    fn csv_row_keeps_wall_clock_columns_last() {
        let report = MetricsReport {
            adr_percent: 94.0,
            adt_millis: 20.0,
            dsl_percent: 90.0,
            delay_millis: 7.0,
            correct_detected: 47,
            total_nodes: 50,
            delivered: 9,
            total_packets: 10,
            per_node_classify: Duration::from_micros(400),
            delay_packets: 12,
            actual_arrival_sum_ms: 384,
            expected_arrival_sum_ms: 300,
        };
        let text = report.to_csv("wtmrd");
        let header: Vec<&str> = METRICS_HEADER.split(',').collect();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row.len(), header.len());
        let clock_start = header.len() - METRICS_WALL_CLOCK_COLUMNS;
        assert_eq!(&header[clock_start..], &["adt_millis", "per_node_classify_micros"]);
        assert_eq!(&row[clock_start..], &["20", "400"]);
        assert_eq!(row[0], "wtmrd");
        assert_eq!(row[1], "94");
    }

    #[test]
    fn nothing_delivered_reports_zero_delay() {
        let roles = vec![Role::Honest; 2];
        let labels = uniform_labels(&roles, &[Label::Normal; 2]);
        let events = vec![
            originate(1000, 0, 1),
            TranscriptEvent::Drop {
                t: SimTime(1002),
                flow: 0,
                seq: 1,
                at: 1,
                reason: DropReason::Attack,
            },
        ];
        let report = aggregate(&events, &roles, &labels, 0, 2, Duration::ZERO).unwrap();
        assert_eq!(report.dsl_percent, 0.0);
        assert_eq!(report.delay_millis, 0.0);
        assert_eq!(report.delay_packets, 0);
    }
}
