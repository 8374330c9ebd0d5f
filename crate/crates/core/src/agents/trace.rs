use serde::{Deserialize, Serialize};

use crate::env::MatchRecord;

/// Per-turn value trace of one seat over one match: the highest masked
/// Q-value for value learners, best-action probability times state value for
/// policy learners.
pub fn qvalue_trace(record: &MatchRecord, seat: usize) -> Vec<f32> {
    record
        .seat_plies(seat)
        .map(|p| p.trace.unwrap_or(f32::NAN))
        .collect()
}

/// One exported trace row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub game: usize,
    #[serde(rename = "match")]
    pub match_index: usize,
    pub turn: usize,
    /// Turn position scaled to `[0, 1]` within the match.
    pub progress: f32,
    pub value: f32,
}

/// Traces of one agent, match by match.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub agent: String,
    pub matches: Vec<(usize, usize, Vec<f32>)>,
}

impl TraceSet {
    pub fn new(agent: impl Into<String>) -> Self {
        Self {
            agent: agent.into(),
            matches: Vec::new(),
        }
    }

    pub fn push(&mut self, game: usize, match_index: usize, trace: Vec<f32>) {
        self.matches.push((game, match_index, trace));
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn points(&self) -> Vec<TracePoint> {
        let mut out = Vec::new();
        for (game, m, trace) in &self.matches {
            let denom = (trace.len().max(2) - 1) as f32;
            for (turn, &value) in trace.iter().enumerate() {
                out.push(TracePoint {
                    game: *game,
                    match_index: *m,
                    turn,
                    progress: turn as f32 / denom,
                    value,
                });
            }
        }
        out
    }

    /// Mean value over the first and last quarter of every match's turns.
    pub fn early_late_means(&self) -> (f32, f32) {
        let (mut early, mut late) = ((0.0f64, 0usize), (0.0f64, 0usize));
        for p in self.points() {
            if p.progress <= 0.25 {
                early.0 += p.value as f64;
                early.1 += 1;
            } else if p.progress >= 0.75 {
                late.0 += p.value as f64;
                late.1 += 1;
            }
        }
        let mean = |(s, n): (f64, usize)| if n == 0 { f32::NAN } else { (s / n as f64) as f32 };
        (mean(early), mean(late))
    }

    /// CSV text: `agent,game,match,turn,progress,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("agent,game,match,turn,progress,value\n");
        for p in self.points() {
            out.push_str(&format!(
                "{},{},{},{},{:.4},{}\n",
                self.agent, p.game, p.match_index, p.turn, p.progress, p.value
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn early_late_split() {
        let mut set = TraceSet::new("x");
        set.push(0, 0, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let (e, l) = set.early_late_means();
        assert_eq!(e, 1.5);
        assert_eq!(l, 4.5);
        assert!(set.to_csv().starts_with("agent,game,match,turn,progress,value\nx,0,0,0,0.0000,1\n"));
    }

    #[test]
    fn empty_set() {
        let set = TraceSet::new("x");
        assert!(set.points().is_empty());
        assert!(set.early_late_means().0.is_nan());
    }
}
