//! Per-turn value traces of the DQL and PPO checkpoints against random
//! agents, written as CSV, with early and late means.
//!
//! cargo run --release --example value_traces -- [games] [out_dir]

use std::path::PathBuf;

use chefs_hat::harness::{export_traces, load_opponent, ExperimentConfig, Opponent, SeatKind};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let games: usize = args.next().map(|g| g.parse()).transpose()?.unwrap_or(7);
    let out = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let config = ExperimentConfig::default();
    std::fs::create_dir_all(&out)?;
    for kind in [SeatKind::Dql, SeatKind::Ppo] {
        let Opponent::Agent(agent) = load_opponent(&config, kind, 1)? else {
            unreachable!("learned seat")
        };
        let set = export_traces(&agent, games, config.seed)?;
        let (early, late) = set.early_late_means();
        let path = out.join(format!("traces_{}.csv", agent.kind()));
        std::fs::write(&path, set.to_csv())?;
        println!("{}: early {early:.4}, late {late:.4} -> {}", agent.kind(), path.display());
    }
    Ok(())
}
