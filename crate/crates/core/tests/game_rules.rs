mod common;

use chefs_hat::env::{play_and_settle, ChefsHatEnv, Policy, RandomPolicy, STEP_REWARD, WIN_REWARD};
use chefs_hat::game::{action_catalog, GameState, MATCH_POINTS, NUM_ACTIONS, NUM_PLAYERS, WINNING_POINTS};
use common::oracle::{brute_force_legal, card_multiset, mask_array, random_state};
use proptest::prelude::*;

const FULL_DECK: [usize; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 2];

#[test]
fn catalog_has_two_hundred_entries() {
    assert_eq!(action_catalog().len(), 200);
    assert_eq!(NUM_ACTIONS, 200);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn legal_actions_match_brute_force(seed in any::<u64>()) {
        let state = random_state(seed);
        let mask = state.legal_actions(state.turn).unwrap();
        prop_assert_eq!(mask_array(&mask), brute_force_legal(&state));
    }

    #[test]
    fn only_the_turn_seat_may_act(seed in any::<u64>(), offset in 1usize..4) {
        let state = random_state(seed);
        let other = (state.turn + offset) % NUM_PLAYERS;
        prop_assert!(state.legal_actions(other).is_err());
    }

    #[test]
    fn every_legal_move_conserves_cards(seed in any::<u64>()) {
        let state = random_state(seed);
        let mask = state.legal_actions(state.turn).unwrap();
        for i in mask.legal_indices() {
            let next = state.apply_index(state.turn, i).unwrap();
            prop_assert_eq!(card_multiset(&next), FULL_DECK);
        }
    }
}

fn randoms(seed: u64) -> [RandomPolicy; NUM_PLAYERS] {
    std::array::from_fn(|i| RandomPolicy::new(seed.wrapping_mul(31).wrapping_add(i as u64)))
}

#[test]
fn random_games_conserve_cards_and_score_by_finish() {
    for seed in 0..300u64 {
        let mut game = GameState::new(seed);
        let mut pols = randoms(seed);
        let [a, b, c, d] = &mut pols;
        let mut seats: [&mut dyn Policy; NUM_PLAYERS] = [a, b, c, d];
        let mut previous = [0u32; NUM_PLAYERS];
        loop {
            assert_eq!(card_multiset(&game.current), FULL_DECK);
            let (record, settlement) = play_and_settle(&mut game, &mut seats).unwrap();
            assert!(record.plies.len() < 1000);
            assert_eq!(card_multiset(&record.final_state), FULL_DECK);
            let mut awarded = settlement.awarded;
            awarded.sort_unstable_by(|x, y| y.cmp(x));
            assert_eq!(awarded, MATCH_POINTS);
            for p in 0..NUM_PLAYERS {
                assert_eq!(game.scores.points[p], previous[p] + settlement.awarded[p]);
            }
            previous = game.scores.points;
            let reached = previous.iter().any(|&s| s >= WINNING_POINTS);
            assert_eq!(game.is_over(), reached);
            if reached {
                let w = game.scores.game_winner.expect("a finished game has a winner");
                assert!(previous[w] >= WINNING_POINTS);
                assert_eq!(previous[w], *previous.iter().max().unwrap());
                break;
            }
        }
    }
}

#[test]
fn episode_rewards_are_win_bonus_plus_step_costs() {
    for seed in 0..300u64 {
        let learner = (seed % 4) as usize;
        let opponents: Vec<Box<dyn Policy>> = (0..3)
            .map(|i| Box::new(RandomPolicy::new(seed * 7 + i)) as Box<dyn Policy>)
            .collect();
        let mut env = ChefsHatEnv::new(learner, opponents);
        let mut policy = RandomPolicy::new(seed ^ 0xABCD);
        let (mut obs, mut mask) = env.reset(seed).unwrap();
        let (mut total, mut moves) = (0.0f64, 0usize);
        let mut won = false;
        while !env.is_done() {
            let hand = env.game().unwrap().current.hands[learner];
            let board = env.game().unwrap().current.board.clone();
            let choice = policy.act(&chefs_hat::env::Decision {
                player: learner,
                obs: &obs,
                mask: &mask,
                hand: &hand,
                board: &board,
            });
            let t = env.step(choice.action).unwrap();
            total += t.reward as f64;
            moves += 1;
            won |= t.reward == WIN_REWARD;
            obs = t.next_obs;
            mask = t.next_mask;
        }
        let settlement = env.last_settlement().unwrap();
        assert_eq!(won, settlement.finish[0] == learner);
        let expected = if won { WIN_REWARD as f64 } else { 0.0 } + STEP_REWARD as f64 * (moves - won as usize) as f64;
        assert!((total - expected).abs() < 1e-4, "seed {seed}: {total} vs {expected}");
    }
}
