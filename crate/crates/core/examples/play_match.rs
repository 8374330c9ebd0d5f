//! Deals one match between four random agents and prints every move.
//!
//! cargo run --example play_match -- 42

use chefs_hat::env::{play_and_settle, Policy, RandomPolicy};
use chefs_hat::game::{move_at, GameState, NUM_PLAYERS};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let mut game = GameState::new(seed);
    for (p, hand) in game.current.hands.iter().enumerate() {
        let cards: Vec<String> = hand.cards_desc().iter().map(|c| c.to_string()).collect();
        println!("seat {p}: {}", cards.join(" "));
    }
    let mut pols: [RandomPolicy; NUM_PLAYERS] = std::array::from_fn(|i| RandomPolicy::new(seed + i as u64));
    let [a, b, c, d] = &mut pols;
    let mut seats: [&mut dyn Policy; NUM_PLAYERS] = [a, b, c, d];
    let (record, settlement) = play_and_settle(&mut game, &mut seats)?;
    for (n, ply) in record.plies.iter().enumerate() {
        println!("{n:>3} seat {} {}", ply.player, move_at(ply.action)?);
    }
    println!("finish order {:?}, points {:?}", settlement.finish, settlement.awarded);
    Ok(())
}
