//! Builds a labelled dataset from the three synthetic archetypes, trains the
//! trait predictor and reports its error against the mean-label baseline.
//!
//! cargo run --release --example trait_predictor -- [out.ckpt] [config.toml]
//!
//! Without checkpoints on disk the archetypes play against random seats.

use std::path::{Path, PathBuf};

use chefs_hat::harness::{archetype_dataset, load_opponents, nearest_label_accuracy, ExperimentConfig, SeatKind};
use chefs_hat::traits::{train_trait_predictor, Archetype};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "traits.ckpt".into()));
    let mut config = match args.next() {
        Some(p) => {
            let mut c = ExperimentConfig::load(Path::new(&p))?;
            c.rebase(Path::new(&p).parent().unwrap_or(Path::new(".")));
            c
        }
        None => ExperimentConfig::default(),
    };
    let opponents = match load_opponents(&config) {
        Ok(o) => o,
        Err(e) => {
            println!("{e}; using random seats");
            config.seats = [SeatKind::Human, SeatKind::Random, SeatKind::Random, SeatKind::Random];
            load_opponents(&config)?
        }
    };
    let data = archetype_dataset(&config, &opponents, config.seed)?;
    let (model, report) = train_trait_predictor(&data, &config.predictor)?;
    let (_, validation) = data.split(config.predictor.validation_fraction);
    let labels: Vec<_> = Archetype::ALL.iter().map(|a| a.label()).collect();
    let acc = nearest_label_accuracy(&model, &data, &validation, &labels);
    println!(
        "{} records; validation MAE {:.3} (baseline {:.3}); nearest-label accuracy {:.1}%",
        data.len(),
        report.validation_mae,
        report.baseline_mae,
        acc * 100.0
    );
    model.save(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
