use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use chefs_hat::agents::{Agent, AgentKind};
use chefs_hat::harness::{
    archetype_dataset, export_traces, load_opponent, load_opponents, load_predictor, scenario1_run,
    scenario2, tournament, train_agent, ExperimentConfig, SeatKind,
};
use chefs_hat::rivalry::ShapingCondition;
use chefs_hat::seed::derive_seed;
use chefs_hat::session::{http, ServiceConfig, SessionManager};
use chefs_hat::traits::train_trait_predictor;

#[derive(Parser)]
#[command(name = "chefs-hat", version, about = "Chef's Hat agents, experiments and session server")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML). Relative paths inside resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: the config's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Shaping condition; scenario2 runs all four when omitted.
    #[arg(long, global = true)]
    condition: Option<ShapingCondition>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Print the resolved config as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Dql,
    Ppo,
    Traits,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent through the curriculum, or the trait predictor.
    Train {
        #[arg(value_enum)]
        target: Target,
    },
    /// Synthetic humans against the configured seats.
    Scenario1,
    /// Rivalry-shaped adaptation over paired seeds, with sign tests.
    Scenario2,
    /// Full games between the configured lineup.
    Tournament,
    /// Per-turn value traces of DQL and PPO against random opponents.
    ExportTraces,
    /// HTTP session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

fn resolve(common: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let mut c = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
            c.rebase(path.parent().unwrap_or(Path::new(".")));
            c
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if let Some(c) = common.condition {
        config.shaping.condition = c;
    }
    if let Some(l) = common.lambda {
        config.shaping.lambda = l;
    }
    config.validate()?;
    Ok(config)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn train(config: &ExperimentConfig, target: Target) -> anyhow::Result<()> {
    let start = Instant::now();
    let kind = match target {
        Target::Dql => AgentKind::Dql,
        Target::Ppo => AgentKind::Ppo,
        Target::Traits => return train_traits(config),
    };
    let outcome = train_agent(kind, &config.dqn, &config.ppo, &config.curriculum, config.seed, |p| {
        println!(
            "{:>6} {:<9} win_rate={:.3} loss={:.4} t={:.0}s",
            p.episodes,
            p.phase,
            p.win_rate,
            p.mean_loss,
            start.elapsed().as_secs_f64()
        )
    })?;
    let path = config.out_dir.join(format!("{kind}.ckpt"));
    std::fs::create_dir_all(&config.out_dir)?;
    outcome.agent.save(&path)?;
    println!("kept the agent from episode {}; wrote {}", outcome.episodes, path.display());
    write_json(&config.out_dir, &format!("{kind}.curve.json"), &outcome.curve)?;
    Ok(())
}

fn train_traits(config: &ExperimentConfig) -> anyhow::Result<()> {
    let opponents = load_opponents(config)?;
    let data = archetype_dataset(config, &opponents, config.seed)?;
    let (model, report) = train_trait_predictor(&data, &config.predictor)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let path = config.out_dir.join("traits.ckpt");
    model.save(&path)?;
    println!(
        "validation MAE {:.3} (mean-label baseline {:.3}) on {} records",
        report.validation_mae, report.baseline_mae, report.validation_records
    );
    println!("wrote {}", path.display());
    write_json(&config.out_dir, "traits.report.json", &report)?;
    Ok(())
}

fn run_scenario1(config: &ExperimentConfig) -> anyhow::Result<()> {
    let opponents = load_opponents(config)?;
    let predictor = load_predictor(config).ok();
    let run = scenario1_run(config, &opponents, predictor.as_ref(), config.seed)?;
    for g in &run.games {
        let r: Vec<String> = g.per_game.iter().map(|r| format!("{:+.3}", r.rivalry)).collect();
        println!("game {:>3} scores {:?} rivalry {}", g.game, g.scores, r.join(" "));
    }
    write_json(&config.out_dir, "scenario1.json", &run.games)?;
    let path = config.out_dir.join("scenario1.dataset.jsonl");
    run.dataset.write_jsonl(std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_scenario2(config: &ExperimentConfig, only: Option<ShapingCondition>) -> anyhow::Result<()> {
    let opponents = load_opponents(config)?;
    let predictor = load_predictor(config)?;
    let conditions = match only {
        Some(c) => vec![c],
        None => vec![
            ShapingCondition::Increase,
            ShapingCondition::Maintain,
            ShapingCondition::Decrease,
            ShapingCondition::None,
        ],
    };
    let report = scenario2(config, &opponents, &predictor, &conditions, |run| {
        println!("seed {:>20} {:<9} trend {:+.5}", run.seed, run.condition, run.trend)
    })?;
    for t in &report.tests {
        println!(
            "{} > {}: {}/{} seeds, p = {:.4}",
            t.greater, t.lesser, t.wins, t.seeds, t.p_value
        );
    }
    write_json(&config.out_dir, "scenario2.json", &report)?;
    Ok(())
}

fn run_tournament(config: &ExperimentConfig) -> anyhow::Result<()> {
    let report = tournament(config)?;
    for s in &report.stats {
        let name = s.kind.map_or("random".to_string(), |k| k.to_string());
        println!(
            "{:<7} games won {:>4}/{:<4} matches won {:>5}/{:<5}",
            name, s.game_wins, s.seat_games, s.match_wins, s.matches
        );
    }
    write_json(&config.out_dir, "tournament.json", &report)?;
    Ok(())
}

fn run_export_traces(config: &ExperimentConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&config.out_dir)?;
    for (i, kind) in [SeatKind::Dql, SeatKind::Ppo].into_iter().enumerate() {
        let agent: Agent = match load_opponent(config, kind, derive_seed(config.seed, i as u64))? {
            chefs_hat::harness::Opponent::Agent(a) => a,
            chefs_hat::harness::Opponent::Random(_) => bail!("{kind:?} is not a learned agent"),
        };
        let set = export_traces(&agent, config.traces.games, config.seed)?;
        let (early, late) = set.early_late_means();
        println!("{}: early mean {early:.4}, late mean {late:.4}", agent.kind());
        let path = config.out_dir.join(format!("traces_{}.csv", agent.kind()));
        std::fs::write(&path, set.to_csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_serve(config: &ExperimentConfig, addr: SocketAddr) -> anyhow::Result<()> {
    let manager = Arc::new(SessionManager::new(ServiceConfig {
        root: Some(config.out_dir.join("sessions")),
        experiment: config.clone(),
        ..ServiceConfig::default()
    }));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(http::serve(
        manager,
        addr,
        |bound| println!("listening on http://{bound}"),
        async {
            let _ = tokio::signal::ctrl_c().await;
        },
    ))?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let config = resolve(&cli.common)?;
    if cli.common.print_config {
        print!("{}", config.to_toml());
        return Ok(());
    }
    match cli.command {
        Command::Train { target } => train(&config, target),
        Command::Scenario1 => run_scenario1(&config),
        Command::Scenario2 => run_scenario2(&config, cli.common.condition),
        Command::Tournament => run_tournament(&config),
        Command::ExportTraces => run_export_traces(&config),
        Command::Serve { addr } => run_serve(&config, addr),
    }
}
