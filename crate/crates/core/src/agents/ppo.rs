//! Proximal policy optimisation with a clipped surrogate, GAE(lambda)
//! advantages, a separate critic network and an entropy bonus.

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::env::{Choice, Decision, Policy, Transition, OBS_DIM};
use crate::game::{ActionMask, NUM_ACTIONS};
use crate::nn::{Adam, Mlp};

/// Guard for the advantage standard deviation.
pub const ADV_STD_FLOOR: f32 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub hidden: Vec<usize>,
    pub gamma: f32,
    pub gae_lambda: f32,
    pub clip_eps: f32,
    pub epochs: usize,
    pub lr: f32,
    pub entropy_coef: f32,
    pub value_coef: f32,
    pub minibatch_size: usize,
    /// Complete episodes gathered before each update.
    pub episodes_per_update: usize,
    pub max_grad_norm: f32,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256],
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_eps: 0.2,
            epochs: 4,
            lr: 3e-4,
            entropy_coef: 0.01,
            value_coef: 0.5,
            minibatch_size: 256,
            episodes_per_update: 32,
            max_grad_norm: 0.5,
        }
    }
}

impl PpoConfig {
    pub fn policy_sizes(&self) -> Vec<usize> {
        let mut s = vec![OBS_DIM];
        s.extend(&self.hidden);
        s.push(NUM_ACTIONS);
        s
    }

    pub fn value_sizes(&self) -> Vec<usize> {
        let mut s = vec![OBS_DIM];
        s.extend(&self.hidden);
        s.push(1);
        s
    }
}

/// Softmax restricted to legal entries; illegal entries get probability 0.
pub fn masked_softmax(logits: &[f32], mask: &ActionMask) -> Result<Vec<f32>, AgentError> {
    let max = mask
        .legal_indices()
        .map(|i| logits[i])
        .fold(f32::NEG_INFINITY, f32::max);
    if max == f32::NEG_INFINITY {
        return Err(AgentError::EmptyMask);
    }
    let mut probs = vec![0.0f32; logits.len()];
    let mut sum = 0.0f32;
    for i in mask.legal_indices() {
        let e = (logits[i] - max).exp();
        probs[i] = e;
        sum += e;
    }
    for p in &mut probs {
        *p /= sum;
    }
    Ok(probs)
}

/// Log-probabilities over legal entries (`-inf` elsewhere).
pub fn masked_log_softmax(logits: &[f32], mask: &ActionMask) -> Result<Vec<f32>, AgentError> {
    let max = mask
        .legal_indices()
        .map(|i| logits[i])
        .fold(f32::NEG_INFINITY, f32::max);
    if max == f32::NEG_INFINITY {
        return Err(AgentError::EmptyMask);
    }
    let lse = max
        + mask
            .legal_indices()
            .map(|i| (logits[i] - max).exp())
            .sum::<f32>()
            .ln();
    Ok((0..logits.len())
        .map(|i| {
            if mask.is_legal(i) {
                logits[i] - lse
            } else {
                f32::NEG_INFINITY
            }
        })
        .collect())
}

fn sample_index<R: Rng + ?Sized>(probs: &[f32], mask: &ActionMask, rng: &mut R) -> usize {
    let u: f32 = rng.gen();
    let mut acc = 0.0f32;
    let mut last = 0;
    for i in mask.legal_indices() {
        acc += probs[i];
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Samples from the masked policy; returns `(action, log_prob, value)`.
pub fn ppo_select<R: Rng + ?Sized>(
    policy: &Mlp<f32>,
    value: &Mlp<f32>,
    obs: &[f32],
    mask: &ActionMask,
    rng: &mut R,
) -> Result<(usize, f32, f32), AgentError> {
    let logits = policy.forward_one(obs)?;
    let logp = masked_log_softmax(&logits, mask)?;
    let probs: Vec<f32> = logp.iter().map(|l| l.exp()).collect();
    let action = sample_index(&probs, mask, rng);
    let v = value.forward_one(obs)?[0];
    Ok((action, logp[action], v))
}

/// GAE over one complete episode. `values[t]` estimates `V(s_t)`; the value
/// after the final step is zero. Returns `(advantages, returns)`.
pub fn compute_gae(rewards: &[f32], values: &[f32], gamma: f32, lambda: f32) -> (Vec<f32>, Vec<f32>) {
    let n = rewards.len();
    let mut adv = vec![0.0f32; n];
    let mut running = 0.0f32;
    for t in (0..n).rev() {
        let next_v = if t + 1 < n { values[t + 1] } else { 0.0 };
        let delta = rewards[t] + gamma * next_v - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Zero mean, unit variance (population), with the deviation floored.
pub fn normalize_advantages(adv: &mut [f32]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f32;
    let mean = adv.iter().sum::<f32>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f32>() / n;
    let std = var.sqrt().max(ADV_STD_FLOOR);
    for a in adv {
        *a = (*a - mean) / std;
    }
}

/// `min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)`.
pub fn clipped_surrogate(ratio: f32, adv: f32, clip_eps: f32) -> f32 {
    (ratio * adv).min(ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * adv)
}

/// Derivative of [`clipped_surrogate`] with respect to the new
/// log-probability: `rho * A` while the unclipped branch is active, else 0.
pub fn surrogate_grad_logp(ratio: f32, adv: f32, clip_eps: f32) -> f32 {
    let unclipped = ratio * adv;
    let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * adv;
    if unclipped <= clipped {
        unclipped
    } else {
        0.0
    }
}

/// One sample prepared for an update.
#[derive(Clone, Debug)]
pub struct PpoSample<'a> {
    pub transition: &'a Transition,
    pub advantage: f32,
    pub ret: f32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PpoLosses {
    /// Negative mean clipped surrogate.
    pub policy: f32,
    pub value: f32,
    pub entropy: f32,
    pub clip_fraction: f32,
}

/// Turns complete episodes into normalised-advantage samples.
pub fn prepare_samples<'a>(
    episodes: &'a [Vec<Transition>],
    gamma: f32,
    lambda: f32,
) -> Result<Vec<PpoSample<'a>>, AgentError> {
    let mut samples = Vec::new();
    for ep in episodes {
        let rewards: Vec<f32> = ep.iter().map(|t| t.reward).collect();
        let values = ep
            .iter()
            .map(|t| t.value.ok_or(AgentError::MissingValue))
            .collect::<Result<Vec<f32>, _>>()?;
        let (adv, ret) = compute_gae(&rewards, &values, gamma, lambda);
        samples.extend(ep.iter().zip(adv).zip(ret).map(|((t, a), r)| PpoSample {
            transition: t,
            advantage: a,
            ret: r,
        }));
    }
    let mut adv: Vec<f32> = samples.iter().map(|s| s.advantage).collect();
    normalize_advantages(&mut adv);
    for (s, a) in samples.iter_mut().zip(adv) {
        s.advantage = a;
    }
    Ok(samples)
}

fn obs_matrix(samples: &[&PpoSample<'_>]) -> Array2<f32> {
    let mut x = Array2::<f32>::zeros((samples.len(), OBS_DIM));
    for (row, s) in samples.iter().enumerate() {
        x.row_mut(row)
            .assign(&ArrayView1::from(s.transition.obs.as_slice()));
    }
    x
}

#[derive(Clone, Debug)]
pub struct PpoAgent {
    pub config: PpoConfig,
    pub policy: Mlp<f32>,
    pub value: Mlp<f32>,
    policy_opt: Adam<f32>,
    value_opt: Adam<f32>,
    rng: ChaCha8Rng,
    pub updates: u64,
}

impl PpoAgent {
    pub fn new(config: PpoConfig, seed: u64) -> Result<Self, AgentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut policy = Mlp::new(&config.policy_sizes(), &mut rng)?;
        // Small final layer so the initial policy is close to uniform.
        for w in policy.layers_mut().last_mut().unwrap().weights.iter_mut() {
            *w *= 0.01;
        }
        let value = Mlp::new(&config.value_sizes(), &mut rng)?;
        Ok(Self::from_nets(config, policy, value, seed))
    }

    pub fn from_nets(config: PpoConfig, policy: Mlp<f32>, value: Mlp<f32>, seed: u64) -> Self {
        Self {
            policy_opt: Adam::new(&policy, config.lr),
            value_opt: Adam::new(&value, config.lr),
            policy,
            value,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9E37),
            config,
            updates: 0,
        }
    }

    pub fn set_learning_rate(&mut self, lr: f32) {
        self.policy_opt.lr = lr;
        self.value_opt.lr = lr;
    }

    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    /// Losses on `samples` at the current parameters, without updating.
    pub fn losses(&self, samples: &[PpoSample<'_>]) -> Result<PpoLosses, AgentError> {
        let refs: Vec<&PpoSample<'_>> = samples.iter().collect();
        let (losses, _, _) = self.minibatch_gradients(&refs)?;
        Ok(losses)
    }

    #[allow(clippy::type_complexity)]
    fn minibatch_gradients(
        &self,
        batch: &[&PpoSample<'_>],
    ) -> Result<(PpoLosses, crate::nn::Gradients<f32>, crate::nn::Gradients<f32>), AgentError> {
        let n = batch.len() as f32;
        let c = &self.config;
        let x = obs_matrix(batch);
        let pcache = self.policy.forward_cached(x.view())?;
        let vcache = self.value.forward_cached(x.view())?;
        let mut pup = Array2::<f32>::zeros(pcache.output.raw_dim());
        let mut vup = Array2::<f32>::zeros(vcache.output.raw_dim());
        let mut losses = PpoLosses::default();
        for (row, s) in batch.iter().enumerate() {
            let t = s.transition;
            let logits = pcache.output.row(row);
            let logp = masked_log_softmax(logits.as_slice().expect("contiguous"), &t.mask)?;
            let ratio = (logp[t.action] - t.log_prob).exp();
            losses.policy -= clipped_surrogate(ratio, s.advantage, c.clip_eps) / n;
            if (ratio - 1.0).abs() > c.clip_eps {
                losses.clip_fraction += 1.0 / n;
            }
            let entropy: f32 = t
                .mask
                .legal_indices()
                .map(|k| -logp[k].exp() * logp[k])
                .sum();
            losses.entropy += entropy / n;
            let g_logp = -surrogate_grad_logp(ratio, s.advantage, c.clip_eps) / n;
            for k in t.mask.legal_indices() {
                let pk = logp[k].exp();
                let onehot = if k == t.action { 1.0 } else { 0.0 };
                // d(-c * H)/dz_k = c * p_k * (log p_k + H)
                pup[[row, k]] = g_logp * (onehot - pk) + c.entropy_coef / n * pk * (logp[k] + entropy);
            }
            let err = vcache.output[[row, 0]] - s.ret;
            losses.value += err * err / n;
            vup[[row, 0]] = c.value_coef * 2.0 * err / n;
        }
        let mut pg = self.policy.backward(&pcache, pup.view())?;
        let mut vg = self.value.backward(&vcache, vup.view())?;
        pg.clip_norm(c.max_grad_norm);
        vg.clip_norm(c.max_grad_norm);
        Ok((losses, pg, vg))
    }

    /// Several epochs of shuffled minibatch updates over complete episodes.
    /// Returns the losses averaged over all minibatches.
    pub fn update(&mut self, episodes: &[Vec<Transition>]) -> Result<PpoLosses, AgentError> {
        let samples = prepare_samples(episodes, self.config.gamma, self.config.gae_lambda)?;
        if samples.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut total = PpoLosses::default();
        let mut batches = 0usize;
        for _ in 0..self.config.epochs {
            order.shuffle(&mut self.rng);
            for chunk in order.chunks(self.config.minibatch_size.max(1)) {
                let batch: Vec<&PpoSample<'_>> = chunk.iter().map(|&i| &samples[i]).collect();
                let (l, pg, vg) = self.minibatch_gradients(&batch)?;
                self.policy_opt.step(&mut self.policy, &pg);
                self.value_opt.step(&mut self.value, &vg);
                total.policy += l.policy;
                total.value += l.value;
                total.entropy += l.entropy;
                total.clip_fraction += l.clip_fraction;
                batches += 1;
            }
        }
        self.updates += 1;
        let k = batches as f32;
        Ok(PpoLosses {
            policy: total.policy / k,
            value: total.value / k,
            entropy: total.entropy / k,
            clip_fraction: total.clip_fraction / k,
        })
    }

    pub fn state_value(&self, obs: &[f32]) -> Result<f32, AgentError> {
        Ok(self.value.forward_one(obs)?[0])
    }

    pub fn action_probs(&self, obs: &[f32], mask: &ActionMask) -> Result<Vec<f32>, AgentError> {
        masked_softmax(&self.policy.forward_one(obs)?, mask)
    }
}

/// Samples from the policy; reports the critic value and, as the trace,
/// the most likely action's probability times that value.
impl Policy for PpoAgent {
    fn act(&mut self, d: &Decision<'_>) -> Choice {
        let obs = d.obs.as_slice();
        let logits = self.policy.forward_one(obs).expect("observation width");
        let logp = masked_log_softmax(&logits, d.mask).expect("pass is always legal");
        let probs: Vec<f32> = logp.iter().map(|l| l.exp()).collect();
        let action = sample_index(&probs, d.mask, &mut self.rng);
        let v = self.state_value(obs).expect("observation width");
        let pmax = d.mask.legal_indices().map(|i| probs[i]).fold(0.0, f32::max);
        Choice {
            action,
            log_prob: logp[action],
            value: Some(v),
            trace: Some(pmax * v),
        }
    }

    fn name(&self) -> &str {
        "ppo"
    }
}
