//! Scenario 1: a synthetic human plays full games against DQL, PPO and a
//! random agent; prints the per-game rivalry toward each seat.
//!
//! cargo run --release --example scenario1 -- [aggressive|conservative|erratic] [games]

use chefs_hat::harness::{load_opponents, load_predictor, scenario1_run, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut config = ExperimentConfig::default();
    if let Some(a) = args.next() {
        config.scenario1.archetype = a.parse()?;
    }
    if let Some(g) = args.next() {
        config.scenario1.games = g.parse()?;
    }
    let opponents = load_opponents(&config)?;
    let predictor = load_predictor(&config).ok();
    let run = scenario1_run(&config, &opponents, predictor.as_ref(), config.seed)?;
    println!("archetype {}; seats {:?}", config.scenario1.archetype, &config.seats[1..]);
    for g in &run.games {
        let parts: Vec<String> = g
            .per_game
            .iter()
            .zip(&g.assessments)
            .map(|(r, a)| format!("R={:+.3} (assessed {:?})", r.rivalry, a.to_array()))
            .collect();
        println!("game {:>2} scores {:?}: {}", g.game, g.scores, parts.join(", "));
    }
    println!("{} labelled trait records collected", run.dataset.len());
    Ok(())
}
