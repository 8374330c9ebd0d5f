//! Rebuilds a session from its event log and prints the final scoreboard.
//!
//! cargo run --example replay_log -- runs/sessions/<id>/events.log

use chefs_hat::session::{read_log, replay};

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).ok_or_else(|| anyhow::anyhow!("usage: replay_log <events.log>"))?;
    let events = read_log(std::path::Path::new(&path))?;
    let replayed = replay(&events)?;
    println!("{} events", events.len());
    println!("scores {:?}, winner {:?}", replayed.scores.points, replayed.scores.game_winner);
    println!("match {} turn {}", replayed.game.match_index, replayed.state.turn);
    Ok(())
}
