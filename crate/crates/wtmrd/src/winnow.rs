//! Online Winnow classifier over binarized trust features.
//!
//! A trust record is reduced to three components in `[0, 1]` — cooperative
//! norm, forwarding rate, and one-minus-drop-rate, so every component reads
//! "higher is better" — and each component is thermometer-encoded into `B`
//! bits: bit `k` is set iff the component reaches `(k+1)/B`. With the default
//! `B = 4` a record becomes 12 bits, and the prediction threshold is half the
//! bit count.
//!
//! Prediction is a weighted vote of the active bits: strictly above the
//! threshold means normal (+1), anything else — including a tie — means
//! malicious (-1), biasing errors toward quarantine. Training is
//! mistake-driven: promote (double) the active weights on a missed normal,
//! demote (halve) them on a missed malicious. Weights therefore stay exact
//! powers of two, and for a target expressible as a k-literal monotone
//! disjunction the total number of training mistakes is bounded by
//! `8k(1 + log2 n)` regardless of stream length.

use crate::sim::node::NodeId;
use crate::trust::TrustRecord;

/// Classifier verdict for one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Normal,
    Malicious,
}

impl Label {
    pub fn is_malicious(self) -> bool {
        self == Label::Malicious
    }
}

/// Binarized trust features; `bits[k]` is the k-th thermometer bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    bits: Vec<bool>,
}

impl FeatureVector {
    pub fn new(bits: Vec<bool>) -> Self {
        FeatureVector { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Indices of active bits.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}

/// Thermometer-encode one component into `bins` bits.
fn encode_component(value: f64, bins: usize, out: &mut Vec<bool>) {
    assert!(
        (0.0..=1.0).contains(&value),
        "feature component {value} outside [0,1]"
    );
    for k in 0..bins {
        out.push(value >= (k + 1) as f64 / bins as f64);
    }
}

/// Binarize a trust record: cooperative norm, forwarding rate, then
/// one-minus-drop-rate, each into `bins` thermometer bits.
pub fn featurize(record: &TrustRecord, bins: usize) -> FeatureVector {
    assert!(bins > 0, "bin count must be positive");
    let mut bits = Vec::with_capacity(3 * bins);
    encode_component(record.alpha_norm, bins, &mut bits);
    encode_component(record.beta, bins, &mut bits);
    encode_component(1.0 - record.gamma, bins, &mut bits);
    FeatureVector::new(bits)
}

/// Winnow model: positive weights, fixed threshold, mistake counter.
#[derive(Debug, Clone, PartialEq)]
pub struct WinnowModel {
    weights: Vec<f64>,
    theta: f64,
    mistakes: u64,
    frozen: bool,
}

impl WinnowModel {
    /// Fresh model over `n_features` bits: all weights 1, threshold n/2.
    pub fn new(n_features: usize) -> Self {
        assert!(n_features > 0, "model needs at least one feature");
        WinnowModel {
            weights: vec![1.0; n_features],
            theta: n_features as f64 / 2.0,
            mistakes: 0,
            frozen: false,
        }
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mistakes(&self) -> u64 {
        self.mistakes
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Weighted vote of active bits; strictly above threshold means normal,
    /// ties go to malicious.
    pub fn predict(&self, x: &FeatureVector) -> Label {
        assert_eq!(
            x.len(),
            self.weights.len(),
            "feature width {} does not match model width {}",
            x.len(),
            self.weights.len()
        );
        let score: f64 = x.ones().map(|i| self.weights[i]).sum();
        if score > self.theta {
            Label::Normal
        } else {
            Label::Malicious
        }
    }

    /// One mistake-driven step; returns whether the example was misclassified.
    ///
    /// Only the weights on *active* bits move: doubled when a normal example
    /// was missed, halved when a malicious one slipped through.
    pub fn update(&mut self, x: &FeatureVector, truth: Label) -> bool {
        assert!(!self.frozen, "update on a frozen model");
        let predicted = self.predict(x);
        if predicted == truth {
            return false;
        }
        self.mistakes += 1;
        match truth {
            Label::Normal => {
                for i in x.ones() {
                    self.weights[i] *= 2.0;
                }
            }
            Label::Malicious => {
                for i in x.ones() {
                    self.weights[i] /= 2.0;
                }
            }
        }
        true
    }

    /// Feed a labelled stream in order; returns mistakes made on it.
    pub fn train<'a, I>(&mut self, stream: I) -> u64
    where
        I: IntoIterator<Item = (&'a FeatureVector, Label)>,
    {
        let mut mistakes = 0;
        for (x, truth) in stream {
            if self.update(x, truth) {
                mistakes += 1;
            }
        }
        mistakes
    }

    /// Stop learning; the model becomes read-only.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Serialise to the snapshot format: metadata rows, then one row per bit.
    pub fn snapshot_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("theta,{}\n", self.theta));
        out.push_str(&format!("mistakes,{}\n", self.mistakes));
        out.push_str(&format!("frozen,{}\n", self.frozen));
        out.push_str("bit_index,weight\n");
        for (i, w) in self.weights.iter().enumerate() {
            out.push_str(&format!("{i},{w}\n"));
        }
        out
    }

    /// Parse a snapshot produced by [`snapshot_csv`](Self::snapshot_csv).
    pub fn from_snapshot_csv(text: &str) -> Result<Self, String> {
        let mut theta = None;
        let mut mistakes = None;
        let mut frozen = None;
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line == "bit_index,weight" {
                continue;
            }
            let (key, value) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected key,value", lineno + 1))?;
            let bad = |e: std::num::ParseFloatError| format!("line {}: {e}", lineno + 1);
            match key {
                "theta" => theta = Some(value.parse().map_err(bad)?),
                "mistakes" => {
                    mistakes = Some(
                        value
                            .parse::<u64>()
                            .map_err(|e| format!("line {}: {e}", lineno + 1))?,
                    )
                }
                "frozen" => {
                    frozen = Some(
                        value
                            .parse::<bool>()
                            .map_err(|e| format!("line {}: {e}", lineno + 1))?,
                    )
                }
                _ => weights.push(value.parse().map_err(bad)?),
            }
        }
        if weights.is_empty() {
            return Err("snapshot has no weight rows".into());
        }
        Ok(WinnowModel {
            weights,
            theta: theta.ok_or("missing theta row")?,
            mistakes: mistakes.ok_or("missing mistakes row")?,
            frozen: frozen.ok_or("missing frozen row")?,
        })
    }
}

/// Label every record with a frozen model. Panics if the model still learns,
/// so training can never leak past the freeze point.
pub fn classify_network(
    model: &WinnowModel,
    records: &[TrustRecord],
    bins: usize,
) -> Vec<(NodeId, Label)> {
    assert!(model.is_frozen(), "classify_network requires a frozen model");
    records
        .iter()
        .map(|r| (r.node, model.predict(&featurize(r, bins))))
        .collect()
}
