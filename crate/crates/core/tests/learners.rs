mod common;

use chefs_hat::agents::{masked_softmax, ppo_select, DqnAgent, DqnConfig};
use chefs_hat::env::{Observation, Transition, OBS_DIM};
use chefs_hat::game::ActionMask;
use chefs_hat::nn::Mlp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn one_hot(slot: usize) -> Observation {
    let mut o = Observation::zeros();
    o.0[slot] = 1.0;
    o
}

fn two_actions() -> ActionMask {
    let mut m = ActionMask::none();
    m.set(0, true);
    m.set(1, true);
    m
}

fn step(from: &Observation, action: usize, reward: f32, to: Option<&Observation>) -> Transition {
    Transition {
        obs: *from,
        action,
        mask: two_actions(),
        reward,
        next_obs: to.copied().unwrap_or(*from),
        next_mask: if to.is_some() { two_actions() } else { ActionMask::none() },
        done: to.is_none(),
        log_prob: 0.0,
        value: None,
    }
}

/// Two states, two actions, deterministic transitions:
/// A -0-> B (r 0), A -1-> end (r 0.5), B -0-> end (r 1), B -1-> A (r 0).
/// Value iteration with gamma 0.9 gives Q(B,0)=1, Q(A,0)=0.9, Q(B,1)=0.81,
/// Q(A,1)=0.5.
#[test]
fn dql_matches_value_iteration_on_a_toy_mdp() {
    let gamma = 0.9f64;
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..200 {
        let max = |s: usize, q: &[[f64; 2]; 2]| q[s][0].max(q[s][1]);
        q = [
            [gamma * max(1, &q), 0.5],
            [1.0, gamma * max(0, &q)],
        ];
    }
    let expected = [[0.9, 0.5], [1.0, 0.81]];
    for s in 0..2 {
        for a in 0..2 {
            assert!((q[s][a] - expected[s][a]).abs() < 1e-12);
        }
    }

    let (a, b) = (one_hot(0), one_hot(1));
    let data = [
        step(&a, 0, 0.0, Some(&b)),
        step(&a, 1, 0.5, None),
        step(&b, 0, 1.0, None),
        step(&b, 1, 0.0, Some(&a)),
    ];
    let batch: Vec<&Transition> = data.iter().collect();
    let config = DqnConfig {
        hidden: vec![32],
        gamma: gamma as f32,
        lr: 1e-3,
        target_sync: 50,
        ..DqnConfig::default()
    };
    let mut agent = DqnAgent::new(config, 3).unwrap();
    for _ in 0..6000 {
        agent.update(&batch).unwrap();
    }
    for (s, obs) in [a, b].iter().enumerate() {
        let learned = agent.q_values(obs.as_slice()).unwrap();
        for act in 0..2 {
            let err = (learned[act] as f64 - q[s][act]).abs();
            assert!(err < 1e-2, "Q({s},{act}) = {} vs {}", learned[act], q[s][act]);
        }
    }
}

#[test]
fn ppo_sampling_follows_the_masked_softmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let policy: Mlp<f32> = Mlp::new(&[OBS_DIM, 16, 200], &mut rng).unwrap();
    let value: Mlp<f32> = Mlp::new(&[OBS_DIM, 16, 1], &mut rng).unwrap();
    let obs: Vec<f32> = (0..OBS_DIM).map(|_| rng.gen_range(0.0..1.0)).collect();
    let mut mask = ActionMask::none();
    for i in [0, 3, 17, 40, 41, 90, 150, 198, 199] {
        mask.set(i, true);
    }
    let logits = policy.forward_one(&obs).unwrap();
    let probs = masked_softmax(&logits, &mask).unwrap();
    let draws = 100_000;
    let mut counts = vec![0usize; 200];
    for _ in 0..draws {
        let (action, log_prob, _) = ppo_select(&policy, &value, &obs, &mask, &mut rng).unwrap();
        assert!(mask.is_legal(action));
        assert!((log_prob - probs[action].ln()).abs() < 1e-4);
        counts[action] += 1;
    }
    let tv: f64 = 0.5
        * (0..200)
            .map(|i| (counts[i] as f64 / draws as f64 - probs[i] as f64).abs())
            .sum::<f64>();
    assert!(tv < 0.01, "total variation {tv}");
}

#[test]
fn backprop_matches_finite_differences() {
    for seed in 0..5 {
        let err = common::oracle::gradient_check_max_error(seed);
        assert!(err < 1e-4, "seed {seed}: max relative error {err}");
    }
}
