use serde::{Deserialize, Serialize};

/// Q-values at or below this are treated as hopeless.
const Q_FLOOR: f64 = 1e-6;

/// Maps a value estimate to an estimated probability of winning:
/// `clamp(1 + log10(q), 0, 1)`. With a victory reward of 1, `q = 1` gives
/// full confidence and `q <= 0.1` none.
pub fn introspective_confidence(q: f64) -> f64 {
    (1.0 + q.max(Q_FLOOR).log10()).clamp(0.0, 1.0)
}

/// Per-action confidences of one agent across a match or game.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceTrace {
    values: Vec<f64>,
}

impl ConfidenceTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the confidence of an action whose value estimate is `q`.
    pub fn record_q(&mut self, q: f64) {
        self.values.push(introspective_confidence(q));
    }

    /// Records an already-computed confidence; it is clamped to `[0, 1]`.
    pub fn record(&mut self, ic: f64) {
        self.values.push(ic.clamp(0.0, 1.0));
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_actions(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<f64> for ConfidenceTrace {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut trace = Self::new();
        for ic in iter {
            trace.record(ic);
        }
        trace
    }
}
