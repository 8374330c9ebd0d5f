//! Independent reference implementations used by the property tests.

use chefs_hat::game::{ActionMask, Card, MatchState, Role, NUM_PLAYERS};
use chefs_hat::nn::Mlp;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Legal moves of the seat to act, by enumerating every multiset the hand
/// can put down and mapping it to its catalog position.
pub fn brute_force_legal(state: &MatchState) -> [bool; 200] {
    let hand = &state.hands[state.turn];
    let jokers = hand.jokers().min(2);
    let fresh = state.board.quantity == 0;
    let mut legal = [false; 200];
    let mut offset = 0;
    for face in 1..=11u8 {
        let held = hand.count(Card::Face(face));
        for q in 1..=face {
            for j in 0..=2u8 {
                let beats = fresh || (face < state.board.face && q + j >= state.board.quantity);
                if q <= held && j <= jokers && beats {
                    legal[offset] = true;
                }
                offset += 1;
            }
        }
    }
    assert_eq!(offset, 198);
    legal[198] = fresh && jokers >= 1;
    legal[199] = true;
    legal
}

pub fn mask_array(mask: &ActionMask) -> [bool; 200] {
    std::array::from_fn(|i| mask.is_legal(i))
}

/// A reachable mid-match state: a deal followed by a random number of
/// uniformly random legal plies.
pub fn random_state(seed: u64) -> MatchState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roles = if rng.gen_bool(0.5) {
        let mut r = Role::BY_FINISH;
        r.shuffle(&mut rng);
        Some(r)
    } else {
        None
    };
    let mut state = MatchState::deal(rng.gen(), roles);
    let plies = rng.gen_range(0..120);
    for _ in 0..plies {
        if state.is_over() {
            break;
        }
        let mask = state.legal_actions(state.turn).expect("turn seat may act");
        let legal: Vec<usize> = mask.legal_indices().collect();
        let action = *legal.choose(&mut rng).expect("pass is always legal");
        state = state.apply_index(state.turn, action).expect("legal move applies");
    }
    if state.is_over() {
        random_state(seed.wrapping_add(0x9E37_79B9))
    } else {
        state
    }
}

pub fn card_multiset(state: &MatchState) -> [usize; 12] {
    let mut counts = [0usize; 12];
    let mut add = |c: &Card| match c {
        Card::Face(f) => counts[*f as usize - 1] += 1,
        Card::Joker => counts[11] += 1,
    };
    for p in 0..NUM_PLAYERS {
        state.hands[p].cards().iter().for_each(&mut add);
    }
    state.board.pile.iter().for_each(&mut add);
    state.cleared.iter().for_each(&mut add);
    counts
}

fn rel_err(a: f64, n: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale < 1e-9 {
        0.0
    } else {
        (a - n).abs() / scale
    }
}

/// Largest relative error between backpropagated and central-difference
/// gradients over every parameter, for a linear, a squared-error and a
/// masked cross-entropy loss.
pub fn gradient_check_max_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = [6, 9, 7, 5];
    let net: Mlp<f64> = Mlp::new(&sizes, &mut rng).unwrap();
    let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let u: Vec<f64> = (0..sizes[3]).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let t: Vec<f64> = (0..sizes[3]).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let legal = [true, false, true, true, false];
    let target = 2;

    let linear = |y: &[f64]| y.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
    let mse = |y: &[f64]| 0.5 * y.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let xent = |y: &[f64]| {
        let m = (0..5).filter(|&i| legal[i]).map(|i| y[i]).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = (0..5).filter(|&i| legal[i]).map(|i| (y[i] - m).exp()).sum();
        -(y[target] - m - z.ln())
    };
    let xent_grad = |y: &[f64]| {
        let m = (0..5).filter(|&i| legal[i]).map(|i| y[i]).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = (0..5).filter(|&i| legal[i]).map(|i| (y[i] - m).exp()).sum();
        (0..5)
            .map(|i| {
                if !legal[i] {
                    0.0
                } else {
                    (y[i] - m).exp() / z - (i == target) as u8 as f64
                }
            })
            .collect::<Vec<f64>>()
    };

    let y0 = net.forward_one(&x).unwrap();
    let losses: [(&dyn Fn(&[f64]) -> f64, Vec<f64>); 3] = [
        (&linear, u.clone()),
        (&mse, y0.iter().zip(&t).map(|(a, b)| a - b).collect()),
        (&xent, xent_grad(&y0)),
    ];
    let params = net.flatten();
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for (loss, upstream) in losses {
        let analytic = net.gradients(&x, &upstream).unwrap().flatten();
        assert_eq!(analytic.len(), params.len());
        for k in 0..params.len() {
            let mut probe = net.clone();
            let mut p = params.clone();
            p[k] += eps;
            probe.set_flat(&p).unwrap();
            let up = loss(&probe.forward_one(&x).unwrap());
            p[k] -= 2.0 * eps;
            probe.set_flat(&p).unwrap();
            let down = loss(&probe.forward_one(&x).unwrap());
            let numeric = (up - down) / (2.0 * eps);
            worst = worst.max(rel_err(analytic[k], numeric));
        }
    }
    worst
}
