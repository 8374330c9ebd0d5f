use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TraitError;
use crate::env::{Observation, OBS_DIM};
use crate::game::NUM_ACTIONS;
use crate::rivalry::TraitVector;

pub const FEATURE_DIM: usize = NUM_ACTIONS + OBS_DIM;

/// Mean one-hot action histogram followed by the mean observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EpisodeFeatures(Vec<f64>);

impl EpisodeFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn histogram(&self) -> &[f64] {
        &self.0[..NUM_ACTIONS]
    }

    pub fn mean_observation(&self) -> &[f64] {
        &self.0[NUM_ACTIONS..]
    }
}

impl TryFrom<Vec<f64>> for EpisodeFeatures {
    type Error = TraitError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        if v.len() != FEATURE_DIM {
            return Err(TraitError::FeatureWidth(v.len()));
        }
        Ok(Self(v))
    }
}

impl From<EpisodeFeatures> for Vec<f64> {
    fn from(f: EpisodeFeatures) -> Self {
        f.0
    }
}

/// Features of one player's moves, given as (observation, action index).
pub fn featurize_episode(moves: &[(Observation, usize)]) -> Result<EpisodeFeatures, TraitError> {
    if moves.is_empty() {
        return Err(TraitError::EmptyEpisode);
    }
    let n = moves.len() as f64;
    let mut out = vec![0.0; FEATURE_DIM];
    for (obs, action) in moves {
        out[*action] += 1.0;
        for (slot, &x) in out[NUM_ACTIONS..].iter_mut().zip(obs.as_slice()) {
            *slot += x as f64;
        }
    }
    out.iter_mut().for_each(|x| *x /= n);
    Ok(EpisodeFeatures(out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraitRecord {
    pub features: EpisodeFeatures,
    pub label: TraitVector,
    pub source: String,
}

/// Labelled episodes; stored as one JSON record per line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraitDataset {
    pub records: Vec<TraitRecord>,
    pub split_seed: u64,
}

impl TraitDataset {
    pub fn new(split_seed: u64) -> Self {
        Self {
            records: Vec::new(),
            split_seed,
        }
    }

    pub fn push(&mut self, record: TraitRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Train and validation indices; a pure function of the split seed.
    /// At least one record is held out whenever there are two or more.
    pub fn split(&self, validation_fraction: f64) -> (Vec<usize>, Vec<usize>) {
        let mut idx: Vec<usize> = (0..self.records.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(self.split_seed));
        let mut n_val = (self.records.len() as f64 * validation_fraction).round() as usize;
        if self.records.len() >= 2 {
            n_val = n_val.clamp(1, self.records.len() - 1);
        } else {
            n_val = 0;
        }
        let train = idx.split_off(n_val);
        (train, idx)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), TraitError> {
        for r in &self.records {
            let line = serde_json::to_string(r).expect("records serialize");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, split_seed: u64) -> Result<Self, TraitError> {
        let mut data = Self::new(split_seed);
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).map_err(|e| TraitError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            data.push(record);
        }
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PASS_INDEX;
    use rand::Rng;

    fn obs(x: f32) -> Observation {
        Observation([x; OBS_DIM])
    }

    #[test]
    fn single_pass_is_one_hot() {
        let f = featurize_episode(&[(obs(0.5), PASS_INDEX)]).unwrap();
        for (i, &h) in f.histogram().iter().enumerate() {
            assert_eq!(h, if i == PASS_INDEX { 1.0 } else { 0.0 });
        }
        assert!(f.mean_observation().iter().all(|&x| x == 0.5));
    }

    #[test]
    fn duplicated_moves_give_same_features() {
        let one = featurize_episode(&[(obs(0.25), 3)]).unwrap();
        let two = featurize_episode(&[(obs(0.25), 3), (obs(0.25), 3)]).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn histogram_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let moves: Vec<_> = (0..20)
            .map(|_| (obs(rng.gen()), rng.gen_range(0..NUM_ACTIONS)))
            .collect();
        let f = featurize_episode(&moves).unwrap();
        assert!((f.histogram().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_episode_rejected() {
        assert!(matches!(featurize_episode(&[]), Err(TraitError::EmptyEpisode)));
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let mut d = TraitDataset::new(9);
        for i in 0..10 {
            d.push(TraitRecord {
                features: featurize_episode(&[(obs(0.0), i)]).unwrap(),
                label: TraitVector::new(1.0, 2.0, 3.0).unwrap(),
                source: format!("ep{i}"),
            });
        }
        let (train, val) = d.split(0.2);
        assert_eq!((train.len(), val.len()), (8, 2));
        assert_eq!(d.split(0.2), (train.clone(), val.clone()));
        assert!(val.iter().all(|v| !train.contains(v)));
    }

    #[test]
    fn jsonl_round_trip() {
        let mut d = TraitDataset::new(1);
        d.push(TraitRecord {
            features: featurize_episode(&[(obs(0.1), 7), (obs(0.3), PASS_INDEX)]).unwrap(),
            label: TraitVector::new(4.5, 4.0, 1.5).unwrap(),
            source: "s1".into(),
        });
        let mut buf = Vec::new();
        d.write_jsonl(&mut buf).unwrap();
        let back = TraitDataset::read_jsonl(buf.as_slice(), 1).unwrap();
        assert_eq!(back, d);
        assert!(TraitDataset::read_jsonl("{\"x\":1}\n".as_bytes(), 1).is_err());
    }
}
