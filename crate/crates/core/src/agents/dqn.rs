//! Deep Q-learning with a hard-copied target network.

use ndarray::Array2;
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::env::{Choice, Decision, Policy, Transition, OBS_DIM};
use crate::game::{ActionMask, NUM_ACTIONS};
use crate::nn::{Adam, Mlp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub gamma: f32,
    pub lr: f32,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Hard copy online -> target every this many updates.
    pub target_sync: u64,
    pub epsilon_start: f32,
    pub epsilon_end: f32,
    /// Environment steps over which epsilon decays linearly.
    pub epsilon_decay_steps: u64,
    /// Environment steps between gradient updates.
    pub train_every: u64,
    /// Transitions collected before the first update.
    pub warmup: usize,
    pub max_grad_norm: f32,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256],
            gamma: 0.99,
            lr: 1e-4,
            buffer_capacity: 50_000,
            batch_size: 128,
            target_sync: 1_000,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 100_000,
            train_every: 4,
            warmup: 1_000,
            max_grad_norm: 10.0,
        }
    }
}

impl DqnConfig {
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![OBS_DIM];
        sizes.extend(&self.hidden);
        sizes.push(NUM_ACTIONS);
        sizes
    }

    pub fn epsilon_at(&self, step: u64) -> f32 {
        if step >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let frac = step as f32 / self.epsilon_decay_steps as f32;
        self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
    }
}

/// Index of the highest masked value; ties go to the lowest index.
pub fn masked_argmax(values: &[f32], mask: &ActionMask) -> Result<usize, AgentError> {
    let mut best: Option<(usize, f32)> = None;
    for i in mask.legal_indices() {
        match best {
            Some((_, v)) if values[i] <= v => {}
            _ => best = Some((i, values[i])),
        }
    }
    best.map(|(i, _)| i).ok_or(AgentError::EmptyMask)
}

/// Epsilon-greedy selection over legal actions.
pub fn dqn_select<R: Rng + ?Sized>(
    net: &Mlp<f32>,
    obs: &[f32],
    mask: &ActionMask,
    epsilon: f32,
    rng: &mut R,
) -> Result<usize, AgentError> {
    if mask.is_empty() {
        return Err(AgentError::EmptyMask);
    }
    let explore = rng.gen::<f32>() < epsilon;
    if explore {
        return mask.legal_indices().choose(rng).ok_or(AgentError::EmptyMask);
    }
    let q = net.forward_one(obs)?;
    masked_argmax(&q, mask)
}

/// Bootstrapped targets `r + gamma * max_legal Q_target(s', a')`, with no
/// bootstrap on terminal transitions.
pub fn dqn_targets(target: &Mlp<f32>, batch: &[&Transition], gamma: f32) -> Result<Vec<f32>, AgentError> {
    let live: Vec<usize> = (0..batch.len()).filter(|&i| !batch[i].done).collect();
    let mut next_max = vec![0.0f32; batch.len()];
    if !live.is_empty() {
        let mut x = Array2::<f32>::zeros((live.len(), OBS_DIM));
        for (row, &i) in live.iter().enumerate() {
            x.row_mut(row)
                .assign(&ndarray::ArrayView1::from(batch[i].next_obs.as_slice()));
        }
        let q = target.forward(x.view())?;
        for (row, &i) in live.iter().enumerate() {
            let qrow = q.row(row);
            let qs = qrow.as_slice().expect("contiguous row");
            next_max[i] = qs[masked_argmax(qs, &batch[i].next_mask)?];
        }
    }
    Ok(batch
        .iter()
        .zip(next_max)
        .map(|(t, m)| t.reward + if t.done { 0.0 } else { gamma * m })
        .collect())
}

/// One gradient step on the mean squared TD error of the taken actions.
/// Returns the loss before the step.
pub fn dqn_update(
    net: &mut Mlp<f32>,
    opt: &mut Adam<f32>,
    target: &Mlp<f32>,
    batch: &[&Transition],
    gamma: f32,
    max_grad_norm: f32,
) -> Result<f32, AgentError> {
    if batch.is_empty() {
        return Err(AgentError::EmptyBatch);
    }
    let targets = dqn_targets(target, batch, gamma)?;
    let n = batch.len();
    let mut x = Array2::<f32>::zeros((n, OBS_DIM));
    for (row, t) in batch.iter().enumerate() {
        x.row_mut(row).assign(&ndarray::ArrayView1::from(t.obs.as_slice()));
    }
    let cache = net.forward_cached(x.view())?;
    let mut upstream = Array2::<f32>::zeros(cache.output.raw_dim());
    let mut loss = 0.0f32;
    for (row, (t, y)) in batch.iter().zip(&targets).enumerate() {
        let err = cache.output[[row, t.action]] - y;
        loss += err * err;
        upstream[[row, t.action]] = 2.0 * err / n as f32;
    }
    let mut grads = net.backward(&cache, upstream.view())?;
    grads.clip_norm(max_grad_norm);
    opt.step(net, &grads);
    Ok(loss / n as f32)
}

/// A Deep Q-learning agent: online and target networks plus its optimiser.
#[derive(Clone, Debug)]
pub struct DqnAgent {
    pub config: DqnConfig,
    pub online: Mlp<f32>,
    pub target: Mlp<f32>,
    opt: Adam<f32>,
    rng: ChaCha8Rng,
    /// Exploration rate used when acting.
    pub epsilon: f32,
    pub env_steps: u64,
    pub updates: u64,
}

impl DqnAgent {
    pub fn new(config: DqnConfig, seed: u64) -> Result<Self, AgentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let online = Mlp::new(&config.layer_sizes(), &mut rng)?;
        Ok(Self::from_net(config, online, seed))
    }

    pub fn from_net(config: DqnConfig, online: Mlp<f32>, seed: u64) -> Self {
        let opt = Adam::new(&online, config.lr);
        Self {
            epsilon: config.epsilon_start,
            target: online.clone(),
            online,
            opt,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5EED),
            config,
            env_steps: 0,
            updates: 0,
        }
    }

    pub fn set_learning_rate(&mut self, lr: f32) {
        self.opt.lr = lr;
    }

    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    /// Gradient step on `batch`; syncs the target every `target_sync` updates.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<f32, AgentError> {
        let loss = dqn_update(
            &mut self.online,
            &mut self.opt,
            &self.target,
            batch,
            self.config.gamma,
            self.config.max_grad_norm,
        )?;
        self.updates += 1;
        if self.updates.is_multiple_of(self.config.target_sync) {
            self.sync_target();
        }
        Ok(loss)
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    pub fn q_values(&self, obs: &[f32]) -> Result<Vec<f32>, AgentError> {
        Ok(self.online.forward_one(obs)?)
    }
}

/// Chooses with the agent's current epsilon and reports Q of the chosen
/// action and the highest legal Q.
impl Policy for DqnAgent {
    fn act(&mut self, d: &Decision<'_>) -> Choice {
        let q = self
            .online
            .forward_one(d.obs.as_slice())
            .expect("observation width matches network");
        let explore = self.rng.gen::<f32>() < self.epsilon;
        let best = masked_argmax(&q, d.mask).expect("pass is always legal");
        let action = if explore {
            d.mask.legal_indices().choose(&mut self.rng).expect("non-empty mask")
        } else {
            best
        };
        Choice {
            action,
            log_prob: 0.0,
            value: Some(q[action]),
            trace: Some(q[best]),
        }
    }

    fn name(&self) -> &str {
        "dql"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Observation;

    fn net_with_output_bias(bias: &[f32]) -> Mlp<f32> {
        let mut net = Mlp::zeros(&[OBS_DIM, NUM_ACTIONS]).unwrap();
        net.layers_mut()[0].bias = ndarray::Array1::from(bias.to_vec());
        net
    }

    #[test]
    fn greedy_picks_unique_legal_max() {
        let mut bias = vec![0.0; NUM_ACTIONS];
        bias[12] = 2.0;
        bias[50] = 5.0;
        let net = net_with_output_bias(&bias);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mask = ActionMask::from_indices([3, 12, 199]);
        assert_eq!(dqn_select(&net, &[0.0; OBS_DIM], &mask, 0.0, &mut rng).unwrap(), 12);
        // Global max 50 is illegal.
        let mask = ActionMask::from_indices([3, 199]);
        let mut bias2 = bias.clone();
        bias2[3] = 1.0;
        let net = net_with_output_bias(&bias2);
        assert_eq!(dqn_select(&net, &[0.0; OBS_DIM], &mask, 0.0, &mut rng).unwrap(), 3);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let net = Mlp::zeros(&[OBS_DIM, NUM_ACTIONS]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mask = ActionMask::from_indices([40, 7, 199]);
        assert_eq!(dqn_select(&net, &[0.0; OBS_DIM], &mask, 0.0, &mut rng).unwrap(), 7);
    }

    #[test]
    fn empty_mask_errors() {
        let net = Mlp::zeros(&[OBS_DIM, NUM_ACTIONS]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            dqn_select(&net, &[0.0; OBS_DIM], &ActionMask::none(), 0.0, &mut rng),
            Err(AgentError::EmptyMask)
        ));
    }

    #[test]
    fn full_exploration_is_uniform() {
        let net = Mlp::zeros(&[OBS_DIM, NUM_ACTIONS]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let legal = [5usize, 17, 90, 199];
        let mask = ActionMask::from_indices(legal);
        let mut counts = [0usize; NUM_ACTIONS];
        for _ in 0..10_000 {
            counts[dqn_select(&net, &[0.0; OBS_DIM], &mask, 1.0, &mut rng).unwrap()] += 1;
        }
        for a in legal {
            assert!((counts[a] as i64 - 2500).abs() <= 150, "{a}: {}", counts[a]);
        }
    }

    fn terminal(reward: f32) -> Transition {
        Transition {
            obs: Observation::zeros(),
            action: 0,
            mask: ActionMask::from_indices([0]),
            reward,
            next_obs: Observation::zeros(),
            next_mask: ActionMask::none(),
            done: true,
            log_prob: 0.0,
            value: None,
        }
    }

    #[test]
    fn terminal_targets_do_not_bootstrap() {
        let mut bias = vec![0.0; NUM_ACTIONS];
        bias[0] = 100.0;
        let target = net_with_output_bias(&bias);
        let ts = vec![terminal(-0.01); 4];
        let refs: Vec<&Transition> = ts.iter().collect();
        assert_eq!(dqn_targets(&target, &refs, 0.99).unwrap(), vec![-0.01; 4]);
    }

    #[test]
    fn zero_lr_keeps_params_and_target() {
        let mut agent = DqnAgent::new(
            DqnConfig {
                hidden: vec![8],
                lr: 0.0,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        let before = agent.online.clone();
        let target_before = agent.target.clone();
        let t = terminal(1.0);
        let loss = agent.update(&[&t]).unwrap();
        assert!(loss.is_finite());
        assert_eq!(agent.online, before);
        assert_eq!(agent.target, target_before);
    }

    #[test]
    fn target_syncs_on_schedule() {
        let mut agent = DqnAgent::new(
            DqnConfig {
                hidden: vec![8],
                lr: 1e-2,
                target_sync: 3,
                ..Default::default()
            },
            2,
        )
        .unwrap();
        let t = terminal(1.0);
        let initial = agent.target.clone();
        agent.update(&[&t]).unwrap();
        agent.update(&[&t]).unwrap();
        assert_eq!(agent.target, initial);
        agent.update(&[&t]).unwrap();
        assert_eq!(agent.target, agent.online);
    }

    #[test]
    fn epsilon_schedule_is_linear() {
        let c = DqnConfig::default();
        assert_eq!(c.epsilon_at(0), 1.0);
        assert!((c.epsilon_at(50_000) - 0.525).abs() < 1e-6);
        assert_eq!(c.epsilon_at(200_000), 0.05);
    }
}
