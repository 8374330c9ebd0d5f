//! Trains a DQL or PPO agent through the full curriculum and writes the
//! checkpoint plus its learning curve.
//!
//! cargo run --release --example train_agents -- dql checkpoints/dql.ckpt

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use chefs_hat::agents::{AgentKind, DqnConfig, PpoConfig};
use chefs_hat::harness::{train_agent, CurriculumConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: AgentKind = args
        .next()
        .unwrap_or_else(|| "dql".into())
        .parse()
        .map_err(anyhow::Error::msg)?;
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("{kind}.ckpt")));
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let start = Instant::now();
    let outcome = train_agent(
        kind,
        &DqnConfig::default(),
        &PpoConfig::default(),
        &CurriculumConfig::default(),
        seed,
        |p| {
            println!(
                "{:>6} {:<9} win_rate={:.3} loss={:.4} t={:.0}s",
                p.episodes,
                p.phase,
                p.win_rate,
                p.mean_loss,
                start.elapsed().as_secs_f64()
            )
        },
    )?;
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir)?;
    }
    outcome.agent.save(&out).context("saving checkpoint")?;
    let curve = out.with_extension("curve.json");
    std::fs::write(&curve, serde_json::to_string_pretty(&outcome.curve)?)?;
    println!(
        "kept the agent from episode {}; wrote {} and {}",
        outcome.episodes,
        out.display(),
        curve.display()
    );
    Ok(())
}
