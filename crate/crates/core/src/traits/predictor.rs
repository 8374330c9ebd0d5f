use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{featurize_episode, EpisodeFeatures, TraitDataset, FEATURE_DIM};
use super::TraitError;
use crate::agents::checkpoint::{load_nets, save_nets, CheckpointKind};
use crate::agents::AgentError;
use crate::env::Observation;
use crate::nn::{Adam, Mlp};
use crate::rivalry::{TraitVector, SCALE_MAX};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictorConfig {
    pub hidden: usize,
    pub learning_rate: f32,
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Regressor from episode features to a trait vector. The network predicts
/// traits divided by the scale maximum; outputs are clamped to the scale.
#[derive(Clone, Debug)]
pub struct TraitPredictor {
    pub net: Mlp<f32>,
}

impl TraitPredictor {
    pub fn new(hidden: usize, seed: u64) -> Result<Self, TraitError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::new(&[FEATURE_DIM, hidden, 3], &mut rng).map_err(AgentError::from)?;
        Ok(Self { net })
    }

    pub fn predict(&self, features: &EpisodeFeatures) -> TraitVector {
        let x: Vec<f32> = features.as_slice().iter().map(|&v| v as f32).collect();
        let y = self.net.forward_one(&x).expect("feature width is fixed");
        TraitVector::clamped([
            y[0] as f64 * SCALE_MAX,
            y[1] as f64 * SCALE_MAX,
            y[2] as f64 * SCALE_MAX,
        ])
    }

    pub fn save(&self, path: &Path) -> Result<(), TraitError> {
        Ok(save_nets(path, CheckpointKind::TraitPredictor, &[&self.net])?)
    }

    pub fn load(path: &Path) -> Result<Self, TraitError> {
        match load_nets(path)? {
            (CheckpointKind::TraitPredictor, mut nets) if nets.len() == 1 => Ok(Self {
                net: nets.remove(0),
            }),
            (kind, _) => Err(AgentError::BadCheckpoint(format!(
                "{kind:?} checkpoint is not a trait predictor"
            ))
            .into()),
        }
    }
}

/// Prediction from the moves observed so far.
pub fn predict_traits(
    model: &TraitPredictor,
    moves: &[(Observation, usize)],
) -> Result<TraitVector, TraitError> {
    Ok(model.predict(&featurize_episode(moves)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorReport {
    /// Mean absolute error per component on the validation split.
    pub validation_mae: f64,
    /// Same error for always predicting the training-label mean.
    pub baseline_mae: f64,
    pub train_records: usize,
    pub validation_records: usize,
    /// Every label was identical; the fit is a constant.
    pub degenerate: bool,
}

fn mae(pred: &[TraitVector], labels: &[TraitVector]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    let total: f64 = pred
        .iter()
        .zip(labels)
        .map(|(p, l)| {
            p.to_array()
                .iter()
                .zip(l.to_array())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        })
        .sum();
    total / (3 * pred.len()) as f64
}

pub fn train_trait_predictor(
    data: &TraitDataset,
    config: &PredictorConfig,
) -> Result<(TraitPredictor, PredictorReport), TraitError> {
    if data.is_empty() {
        return Err(TraitError::EmptyDataset);
    }
    let first = data.records[0].label;
    let degenerate = data.records.iter().all(|r| r.label == first);
    let (train, val) = data.split(config.validation_fraction);
    let mut model = TraitPredictor::new(config.hidden, config.seed)?;
    let mut opt = Adam::new(&model.net, config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5EED);
    let row = |i: usize| data.records[i].features.as_slice().iter().map(|&v| v as f32);
    let target = |i: usize| data.records[i].label.to_array().map(|v| (v / SCALE_MAX) as f32);

    if degenerate {
        // Nothing to separate: the fit is the constant itself.
        let last = model.net.layers_mut().last_mut().expect("two layers");
        last.weights.fill(0.0);
        for (b, v) in last.bias.iter_mut().zip(first.to_array()) {
            *b = (v / SCALE_MAX) as f32;
        }
    }
    let mut order = train.clone();
    for _ in 0..if degenerate { 0 } else { config.epochs } {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size.max(1)) {
            let x = Array2::from_shape_vec(
                (chunk.len(), FEATURE_DIM),
                chunk.iter().flat_map(|&i| row(i)).collect(),
            )
            .expect("feature rows");
            let cache = model.net.forward_cached(x.view()).map_err(AgentError::from)?;
            // d/dy of mean over batch and outputs of (y - t)^2.
            let scale = 2.0 / (chunk.len() * 3) as f32;
            let mut up = cache.output.clone();
            for (r, &i) in chunk.iter().enumerate() {
                let t = target(i);
                for c in 0..3 {
                    up[[r, c]] = scale * (up[[r, c]] - t[c]);
                }
            }
            let grads = model.net.backward(&cache, up.view()).map_err(AgentError::from)?;
            opt.step(&mut model.net, &grads);
        }
    }

    let labels: Vec<TraitVector> = val.iter().map(|&i| data.records[i].label).collect();
    let preds: Vec<TraitVector> = val
        .iter()
        .map(|&i| model.predict(&data.records[i].features))
        .collect();
    let mut mean = [0.0; 3];
    for &i in &train {
        for (m, v) in mean.iter_mut().zip(data.records[i].label.to_array()) {
            *m += v / train.len() as f64;
        }
    }
    let baseline = vec![TraitVector::clamped(mean); val.len()];
    let report = PredictorReport {
        validation_mae: mae(&preds, &labels),
        baseline_mae: mae(&baseline, &labels),
        train_records: train.len(),
        validation_records: val.len(),
        degenerate,
    };
    Ok((model, report))
}
