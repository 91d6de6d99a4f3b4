//! Classification variants under comparison.
//!
//! Every run screens relays through one of three mechanisms:
//!
//! * `wtmrd` — the full pipeline: an online multiplicative-weight classifier
//!   trained on trust features during the warm-up epochs (ground-truth roles
//!   supervise, as in any detection-evaluation harness), frozen at the first
//!   epoch boundary past warm-up and applied for the rest of the run;
//! * `threshold:<tau>` — a fixed cut on the combined trust value, the
//!   conventional trust-routing baseline;
//! * `noclass` — no screening at all, the undefended baseline.
//!
//! All variants share the same gating discipline so ablations differ in the
//! classifier only: no node is quarantined before the freeze epoch, and a
//! malicious verdict is sticky — once quarantined a node stays quarantined,
//! since an excluded node carries no traffic and would otherwise look clean
//! again one epoch later.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::sim::node::{NodeId, Role};
use crate::trust::TrustRecord;
use crate::winnow::{featurize, Label, WinnowModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantSpec {
    Wtmrd,
    NoClassification,
    FixedThreshold { tau: f64 },
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariantSpec::Wtmrd => write!(f, "wtmrd"),
            VariantSpec::NoClassification => write!(f, "noclass"),
            VariantSpec::FixedThreshold { tau } => write!(f, "threshold:{tau}"),
        }
    }
}

impl FromStr for VariantSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wtmrd" => Ok(VariantSpec::Wtmrd),
            "noclass" => Ok(VariantSpec::NoClassification),
            other => match other.strip_prefix("threshold:") {
                Some(tau) => Ok(VariantSpec::FixedThreshold {
                    tau: tau
                        .parse()
                        .map_err(|e| format!("threshold value: {e}"))?,
                }),
                None => Err(format!(
                    "unknown variant {other:?} (expected \"wtmrd\", \"noclass\" \
                     or \"threshold:<tau>\")"
                )),
            },
        }
    }
}

impl Serialize for VariantSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for VariantSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn truth_label(role: Role) -> Label {
    if role.is_malicious() {
        Label::Malicious
    } else {
        Label::Normal
    }
}

/// Epoch-driven node screen: trains (where applicable) during warm-up,
/// produces labels afterwards, and maintains the sticky quarantine set that
/// route discovery consults.
pub struct Classifier {
    spec: VariantSpec,
    bins: usize,
    /// Epoch whose boundary ends warm-up: training stops, labelling starts.
    freeze_epoch: u32,
    /// Ground truth, used exclusively to supervise warm-up training.
    roles: Vec<Role>,
    model: Option<WinnowModel>,
    quarantined: Vec<bool>,
    labels: Vec<Label>,
    classify_time: Duration,
    classified_nodes: u64,
}

impl Classifier {
    pub fn new(spec: VariantSpec, bins: usize, freeze_epoch: u32, roles: &[Role]) -> Self {
        assert!(freeze_epoch >= 1, "freeze epoch is 1-based");
        let model = match spec {
            VariantSpec::Wtmrd => Some(WinnowModel::new(3 * bins)),
            _ => None,
        };
        Classifier {
            spec,
            bins,
            freeze_epoch,
            roles: roles.to_vec(),
            model,
            quarantined: vec![false; roles.len()],
            labels: vec![Label::Normal; roles.len()],
            classify_time: Duration::ZERO,
            classified_nodes: 0,
        }
    }

    pub fn spec(&self) -> VariantSpec {
        self.spec
    }

    pub fn model(&self) -> Option<&WinnowModel> {
        self.model.as_ref()
    }

    /// May `node` take part in route discovery and forwarding?
    pub fn is_eligible(&self, node: NodeId) -> bool {
        !self.quarantined[node as usize]
    }

    pub fn eligibility(&self) -> Vec<bool> {
        self.quarantined.iter().map(|q| !q).collect()
    }

    /// Current effective labels (fresh verdicts merged with the quarantine).
    pub fn labels(&self) -> Vec<(NodeId, Label)> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as NodeId, l))
            .collect()
    }

    /// Mean measured wall-clock time to label one node; zero before the
    /// first labelling pass.
    pub fn per_node_classify(&self) -> Duration {
        if self.classified_nodes == 0 {
            Duration::ZERO
        } else {
            self.classify_time / u32::try_from(self.classified_nodes).expect("node count")
        }
    }

    /// Digest one epoch's trust records. `epoch` is 1-based (records computed
    /// at the first boundary belong to epoch 1); `active[n]` says whether
    /// node `n` relayed any data this window — idle nodes carry no
    /// behavioural evidence and are excluded from training. Returns the nodes
    /// quarantined for the first time by this epoch.
    pub fn observe_epoch(
        &mut self,
        epoch: u32,
        records: &[TrustRecord],
        active: &[bool],
    ) -> Vec<NodeId> {
        assert_eq!(records.len(), self.labels.len(), "one record per node");
        assert_eq!(active.len(), self.labels.len(), "one activity flag per node");
        if epoch <= self.freeze_epoch {
            if let Some(model) = &mut self.model {
                let examples: Vec<_> = records
                    .iter()
                    .filter(|r| active[r.node as usize])
                    .map(|r| (featurize(r, self.bins), truth_label(self.roles[r.node as usize])))
                    .collect();
                model.train(examples.iter().map(|(x, y)| (x, *y)));
            }
        }
        if epoch == self.freeze_epoch {
            if let Some(model) = &mut self.model {
                model.freeze();
            }
        }
        let mut newly_quarantined = Vec::new();
        if epoch >= self.freeze_epoch {
            let started = Instant::now();
            let fresh = self.fresh_labels(records);
            self.classify_time += started.elapsed();
            self.classified_nodes += records.len() as u64;
            for (node, label) in fresh {
                let i = node as usize;
                if label == Label::Malicious && !self.quarantined[i] {
                    self.quarantined[i] = true;
                    newly_quarantined.push(node);
                }
                self.labels[i] = if self.quarantined[i] {
                    Label::Malicious
                } else {
                    label
                };
            }
        }
        newly_quarantined
    }

    fn fresh_labels(&self, records: &[TrustRecord]) -> Vec<(NodeId, Label)> {
        match self.spec {
            VariantSpec::Wtmrd => {
                let model = self.model.as_ref().expect("wtmrd carries a model");
                crate::winnow::classify_network(model, records, self.bins)
            }
            VariantSpec::NoClassification => {
                records.iter().map(|r| (r.node, Label::Normal)).collect()
            }
            VariantSpec::FixedThreshold { tau } => records
                .iter()
                .map(|r| {
                    let label = if r.tau >= tau {
                        Label::Normal
                    } else {
                        Label::Malicious
                    };
                    (r.node, label)
                })
                .collect(),
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trust::TrustMode;

    #[test]
    fn variant_syntax_round_trips() {
        for text in ["wtmrd", "noclass", "threshold:1", "threshold:0.75"] {
            let v: VariantSpec = text.parse().unwrap();
            assert_eq!(v.to_string(), text);
        }
        assert!("winnow".parse::<VariantSpec>().is_err());
        assert!("threshold:x".parse::<VariantSpec>().is_err());
    }

    /// One epoch record. Honest relays forward everything; active blackholes
    /// drop everything; idle nodes have no forwarding evidence.
    fn record(node: NodeId, beta: f64, gamma: f64) -> TrustRecord {
        TrustRecord {
            epoch: 0,
            node,
            alpha: 4,
            alpha_norm: 1.0,
            beta,
            gamma,
            tau: (1.0 + beta - gamma).max(0.0),
            mode: TrustMode::Corrected,
        }
    }

    /// Roles: 0-1 honest, 2 blackhole. Active epoch: everyone relays.
    fn active_epoch() -> (Vec<Role>, Vec<TrustRecord>, Vec<bool>) {
        let roles = vec![Role::Honest, Role::Honest, Role::Blackhole];
        let records = vec![
            record(0, 1.0, 0.0),
            record(1, 1.0, 0.0),
            record(2, 0.0, 1.0),
        ];
        (roles, records, vec![true; 3])
    }

    /// Idle epoch: nobody relayed anything this window.
    fn idle_epoch() -> (Vec<TrustRecord>, Vec<bool>) {
        let records = vec![
            record(0, 0.0, 0.0),
            record(1, 0.0, 0.0),
            record(2, 0.0, 0.0),
        ];
        (records, vec![false; 3])
    }

    #[test]
    fn nothing_is_quarantined_during_warmup() {
        let (roles, records, active) = active_epoch();
        for spec in [
            VariantSpec::Wtmrd,
            VariantSpec::FixedThreshold { tau: 1.0 },
            VariantSpec::NoClassification,
        ] {
            let mut c = Classifier::new(spec, 4, 3, &roles);
            c.observe_epoch(1, &records, &active);
            c.observe_epoch(2, &records, &active);
            assert!(c.eligibility().iter().all(|&e| e), "{spec}: warmup gates");
            assert!(c.labels().iter().all(|&(_, l)| l == Label::Normal));
        }
    }

    #[test]
    fn clean_separation_trains_without_mistakes() {
        let (roles, records, active) = active_epoch();
        let mut c = Classifier::new(VariantSpec::Wtmrd, 4, 3, &roles);
        for epoch in 1..=3 {
            c.observe_epoch(epoch, &records, &active);
        }
        let model = c.model().unwrap();
        assert!(model.is_frozen());
        assert_eq!(model.mistakes(), 0, "structural separation needs no updates");
        assert_eq!(c.labels()[2], (2, Label::Malicious));
        assert_eq!(c.labels()[0], (0, Label::Normal));
        assert!(!c.is_eligible(2));
        assert!(c.is_eligible(0));
    }

    #[test]
    fn quarantine_is_sticky_across_idle_epochs() {
        let (roles, records, active) = active_epoch();
        let mut c = Classifier::new(VariantSpec::Wtmrd, 4, 1, &roles);
        c.observe_epoch(1, &records, &active);
        assert!(!c.is_eligible(2), "active blackhole caught at freeze");

        // Quarantined, the blackhole relays nothing and looks clean; the
        // verdict must not regress.
        let (idle_records, idle_active) = idle_epoch();
        c.observe_epoch(2, &idle_records, &idle_active);
        assert_eq!(c.labels()[2], (2, Label::Malicious));
        assert!(!c.is_eligible(2));
        // Honest idles stay normal: no false quarantine from inactivity.
        assert_eq!(c.labels()[0], (0, Label::Normal));
        assert!(c.is_eligible(0));
    }

    #[test]
    fn threshold_variant_cuts_on_combined_trust() {
        let (roles, records, active) = active_epoch();
        let mut c = Classifier::new(VariantSpec::FixedThreshold { tau: 1.0 }, 4, 1, &roles);
        c.observe_epoch(1, &records, &active);
        assert_eq!(c.labels()[2], (2, Label::Malicious)); // tau = 0 < 1
        assert_eq!(c.labels()[0], (0, Label::Normal)); // tau = 2 >= 1

        // Idle honest node sits exactly on the cut (tau = alpha_norm = 1.0)
        // and must stay normal.
        let (idle_records, idle_active) = idle_epoch();
        c.observe_epoch(2, &idle_records, &idle_active);
        assert_eq!(c.labels()[0], (0, Label::Normal));
    }

    #[test]
    fn no_classification_never_gates() {
        let (roles, records, active) = active_epoch();
        let mut c = Classifier::new(VariantSpec::NoClassification, 4, 1, &roles);
        for epoch in 1..=4 {
            c.observe_epoch(epoch, &records, &active);
        }
        assert!(c.eligibility().iter().all(|&e| e));
        assert!(c.model().is_none());
    }

    #[test]
    fn learned_and_threshold_screens_agree_on_structural_cases() {
        let (roles, records, active) = active_epoch();
        let mut learned = Classifier::new(VariantSpec::Wtmrd, 4, 2, &roles);
        let mut cut = Classifier::new(VariantSpec::FixedThreshold { tau: 1.0 }, 4, 2, &roles);
        let (idle_records, idle_active) = idle_epoch();
        for epoch in 1..=4 {
            // Alternate busy and quiet windows.
            let (r, a) = if epoch % 2 == 1 {
                (&records, &active)
            } else {
                (&idle_records, &idle_active)
            };
            learned.observe_epoch(epoch, r, a);
            cut.observe_epoch(epoch, r, a);
            assert_eq!(learned.labels(), cut.labels(), "epoch {epoch}");
        }
    }

    #[test]
    fn classify_timing_is_tracked_after_freeze() {
        let (roles, records, active) = active_epoch();
        let mut c = Classifier::new(VariantSpec::Wtmrd, 4, 1, &roles);
        assert_eq!(c.per_node_classify(), Duration::ZERO);
        c.observe_epoch(1, &records, &active);
        c.observe_epoch(2, &records, &active);
        assert_eq!(c.classified_nodes, 6);
    }
}
