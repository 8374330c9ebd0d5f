//! Full 15-point games between DQL, PPO and two random agents with rotating
//! seats.
//!
//! cargo run --release --example tournament -- [games]

use chefs_hat::harness::{tournament, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let mut config = ExperimentConfig::default();
    if let Some(g) = std::env::args().nth(1) {
        config.tournament.games = g.parse()?;
    }
    let report = tournament(&config)?;
    for s in &report.stats {
        let name = s.kind.map_or_else(|| "human".to_string(), |k| k.to_string());
        println!(
            "{name:<7} game wins {:>4}/{:<4} match wins {:>5}/{:<5} points {}",
            s.game_wins, s.seat_games, s.match_wins, s.matches, s.points
        );
    }
    Ok(())
}
