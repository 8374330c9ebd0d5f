//! Scenario 2: the agents adapt after every match with a reward shaped by
//! their predicted rivalry. Compares the rivalry trends of the conditions
//! over paired seeds.
//!
//! cargo run --release --example scenario2 -- [seeds] [matches] [lambda]

use chefs_hat::harness::{load_opponents, load_predictor, scenario2, ExperimentConfig};
use chefs_hat::rivalry::ShapingCondition;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut config = ExperimentConfig::default();
    if let Some(s) = args.next() {
        config.scenario2.seeds = s.parse()?;
    }
    if let Some(m) = args.next() {
        config.scenario2.matches = m.parse()?;
    }
    if let Some(l) = args.next() {
        config.shaping.lambda = l.parse()?;
    }
    let opponents = load_opponents(&config)?;
    let predictor = load_predictor(&config)?;
    let conditions = [ShapingCondition::Increase, ShapingCondition::Maintain, ShapingCondition::Decrease];
    let report = scenario2(&config, &opponents, &predictor, &conditions, |run| {
        println!("seed {:>20} {:<9} trend {:+.5} ({} updates)", run.seed, run.condition, run.trend, run.updates)
    })?;
    for t in &report.tests {
        println!("{} > {}: {}/{} seeds, sign test p = {:.4}", t.greater, t.lesser, t.wins, t.seeds, t.p_value);
    }
    Ok(())
}
