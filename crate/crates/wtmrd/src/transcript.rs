//! Run transcripts: typed packet events and the stable CSV formats every run
//! emits (`transcript.csv`, `trust.csv`, `labels.csv`, `discovery.csv`).
//!
//! The writers are the reproducibility surface: two runs with the same
//! configuration and seed must produce byte-identical files, so all numbers
//! are written with `Display` (shortest round-trippable form for floats) and
//! rows follow event order. Readers exist so reports can be recomputed from
//! saved transcripts by an independent pass.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::routing::DiscoveryEvent;
use crate::sim::event::FlowId;
use crate::sim::node::{NodeId, Role};
use crate::sim::time::SimTime;
use crate::trust::{TrustMode, TrustRecord};
use crate::winnow::Label;

/// Why a data packet terminated short of its destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// A malicious relay discarded it.
    Attack,
    /// The next hop had moved out of radio range.
    RouteBreak,
    /// No usable route existed when the send window closed.
    NoRoute,
    /// The next hop was quarantined after the route was installed.
    Security,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::Attack => "attack",
            DropReason::RouteBreak => "route_break",
            DropReason::NoRoute => "no_route",
            DropReason::Security => "security",
        })
    }
}

impl FromStr for DropReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "attack" => Ok(DropReason::Attack),
            "route_break" => Ok(DropReason::RouteBreak),
            "no_route" => Ok(DropReason::NoRoute),
            "security" => Ok(DropReason::Security),
            other => Err(format!("unknown drop reason {other:?}")),
        }
    }
}

/// One row of `transcript.csv`. Every data packet produces exactly one
/// `Originate` row and at most one terminal (`Deliver` or `Drop`) row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptEvent {
    Originate {
        t: SimTime,
        flow: FlowId,
        seq: u32,
        source: NodeId,
        dest: NodeId,
    },
    Deliver {
        t: SimTime,
        flow: FlowId,
        seq: u32,
        /// Hop count of the path the packet actually traversed.
        hops: u32,
    },
    Drop {
        t: SimTime,
        flow: FlowId,
        seq: u32,
        at: NodeId,
        reason: DropReason,
    },
}

impl TranscriptEvent {
    pub fn time(&self) -> SimTime {
        match self {
            TranscriptEvent::Originate { t, .. }
            | TranscriptEvent::Deliver { t, .. }
            | TranscriptEvent::Drop { t, .. } => *t,
        }
    }
}

#[derive(Debug, Error)]
#[error("{file} line {line}: {msg}")]
pub struct CsvError {
    pub file: &'static str,
    pub line: usize,
    pub msg: String,
}

fn field<T: FromStr>(
    file: &'static str,
    line: usize,
    name: &str,
    raw: &str,
) -> Result<T, CsvError>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e| CsvError {
        file,
        line,
        msg: format!("{name} {raw:?}: {e}"),
    })
}

pub const TRANSCRIPT_HEADER: &str = "time_ms,event,flow,seq,source,dest,at,hops,reason";

pub fn write_transcript_csv(events: &[TranscriptEvent]) -> String {
    let mut out = String::from(TRANSCRIPT_HEADER);
    out.push('\n');
    for e in events {
        match e {
            TranscriptEvent::Originate {
                t,
                flow,
                seq,
                source,
                dest,
            } => {
                out.push_str(&format!(
                    "{},originate,{flow},{seq},{source},{dest},,,\n",
                    t.as_millis()
                ));
            }
            TranscriptEvent::Deliver { t, flow, seq, hops } => {
                out.push_str(&format!(
                    "{},deliver,{flow},{seq},,,,{hops},\n",
                    t.as_millis()
                ));
            }
            TranscriptEvent::Drop {
                t,
                flow,
                seq,
                at,
                reason,
            } => {
                out.push_str(&format!(
                    "{},drop,{flow},{seq},,,{at},,{reason}\n",
                    t.as_millis()
                ));
            }
        }
    }
    out
}

pub fn read_transcript_csv(text: &str) -> Result<Vec<TranscriptEvent>, CsvError> {
    const FILE: &str = "transcript.csv";
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRANSCRIPT_HEADER => {}
        other => {
            return Err(CsvError {
                file: FILE,
                line: 1,
                msg: format!("bad header {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    let mut events = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 9 {
            return Err(CsvError {
                file: FILE,
                line,
                msg: format!("expected 9 columns, found {}", cols.len()),
            });
        }
        let t = SimTime(field(FILE, line, "time_ms", cols[0])?);
        let flow: FlowId = field(FILE, line, "flow", cols[2])?;
        let seq: u32 = field(FILE, line, "seq", cols[3])?;
        let event = match cols[1] {
            "originate" => TranscriptEvent::Originate {
                t,
                flow,
                seq,
                source: field(FILE, line, "source", cols[4])?,
                dest: field(FILE, line, "dest", cols[5])?,
            },
            "deliver" => TranscriptEvent::Deliver {
                t,
                flow,
                seq,
                hops: field(FILE, line, "hops", cols[7])?,
            },
            "drop" => TranscriptEvent::Drop {
                t,
                flow,
                seq,
                at: field(FILE, line, "at", cols[6])?,
                reason: field(FILE, line, "reason", cols[8])?,
            },
            other => {
                return Err(CsvError {
                    file: FILE,
                    line,
                    msg: format!("unknown event {other:?}"),
                })
            }
        };
        events.push(event);
    }
    Ok(events)
}

/// Role syntax shared with config overrides: honest | blackhole | grayhole:p.
pub fn role_string(role: Role) -> String {
    match role {
        Role::Honest => "honest".into(),
        Role::Blackhole => "blackhole".into(),
        Role::Grayhole { p } => format!("grayhole:{p}"),
    }
}

pub fn parse_role_string(s: &str) -> Result<Role, String> {
    match s {
        "honest" => Ok(Role::Honest),
        "blackhole" => Ok(Role::Blackhole),
        other => match other.strip_prefix("grayhole:") {
            Some(p) => Ok(Role::Grayhole {
                p: p.parse().map_err(|e| format!("grayhole probability: {e}"))?,
            }),
            None => Err(format!("unknown role {other:?}")),
        },
    }
}

pub const LABELS_HEADER: &str = "node,role,label,correct";

/// `labels.csv`: final classifier verdict against ground truth, one node per
/// row. `correct` means the verdict matches the role (malicious roles should
/// be labelled malicious, honest ones normal).
pub fn write_labels_csv(roles: &[Role], labels: &[(NodeId, Label)]) -> String {
    assert_eq!(roles.len(), labels.len(), "one label per node");
    let mut out = String::from(LABELS_HEADER);
    out.push('\n');
    for &(node, label) in labels {
        let role = roles[node as usize];
        let verdict = match label {
            Label::Normal => "normal",
            Label::Malicious => "malicious",
        };
        let correct = role.is_malicious() == (label == Label::Malicious);
        out.push_str(&format!(
            "{node},{},{verdict},{correct}\n",
            role_string(role)
        ));
    }
    out
}

pub fn read_labels_csv(text: &str) -> Result<Vec<(NodeId, Role, Label)>, CsvError> {
    const FILE: &str = "labels.csv";
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == LABELS_HEADER => {}
        other => {
            return Err(CsvError {
                file: FILE,
                line: 1,
                msg: format!("bad header {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 4 {
            return Err(CsvError {
                file: FILE,
                line,
                msg: format!("expected 4 columns, found {}", cols.len()),
            });
        }
        let node: NodeId = field(FILE, line, "node", cols[0])?;
        let role = parse_role_string(cols[1]).map_err(|msg| CsvError {
            file: FILE,
            line,
            msg,
        })?;
        let label = match cols[2] {
            "normal" => Label::Normal,
            "malicious" => Label::Malicious,
            other => {
                return Err(CsvError {
                    file: FILE,
                    line,
                    msg: format!("unknown label {other:?}"),
                })
            }
        };
        rows.push((node, role, label));
    }
    Ok(rows)
}

pub const TRUST_HEADER: &str = "epoch,node,alpha,alpha_norm,beta,gamma,tau,mode";

/// `trust.csv`: one row per node per epoch with the raw trust components and
/// the combined value under the active combination mode.
pub fn write_trust_csv(records: &[TrustRecord]) -> String {
    let mut out = String::from(TRUST_HEADER);
    out.push('\n');
    for r in records {
        let mode = match r.mode {
            TrustMode::Faithful => "faithful",
            TrustMode::Corrected => "corrected",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{mode}\n",
            r.epoch, r.node, r.alpha, r.alpha_norm, r.beta, r.gamma, r.tau
        ));
    }
    out
}

pub const DISCOVERY_HEADER: &str = "time_ms,event,from,to,reply_id,hops,at,unreachable";

/// `discovery.csv`: per-hop control-plane trace of every route discovery.
/// Costly at scale, so sweeps leave it off.
pub fn write_discovery_csv(events: &[DiscoveryEvent]) -> String {
    let mut out = String::from(DISCOVERY_HEADER);
    out.push('\n');
    for e in events {
        match *e {
            DiscoveryEvent::RreqHop { t, from, to } => {
                out.push_str(&format!("{},rreq_hop,{from},{to},,,,\n", t.as_millis()));
            }
            DiscoveryEvent::RrepHop { t, from, to, reply_id } => {
                out.push_str(&format!(
                    "{},rrep_hop,{from},{to},{reply_id},,,\n",
                    t.as_millis()
                ));
            }
            DiscoveryEvent::ReplyArrived { t, reply_id, hops } => {
                out.push_str(&format!(
                    "{},reply_arrived,,,{reply_id},{hops},,\n",
                    t.as_millis()
                ));
            }
            DiscoveryEvent::RrepBreak {
                t,
                at,
                unreachable,
                reply_id,
            } => {
                out.push_str(&format!(
                    "{},rrep_break,,,{reply_id},,{at},{unreachable}\n",
                    t.as_millis()
                ));
            }
        }
    }
    out
}
