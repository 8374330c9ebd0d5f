//! Scenario 1 (data collection against DQL, PPO and random), Scenario 2
//! (per-match rivalry-shaped adaptation), tournaments, value-trace export and
//! synthetic trait data.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use super::config::{ExperimentConfig, SeatKind};
use super::table::{Adaptation, MatchOutcome, Opponent, Table, TableSetup, HUMAN_SEAT};
use super::HarnessError;
use crate::agents::{qvalue_trace, Agent, AgentKind, TraceSet};
use crate::env::{play_and_settle, Policy, RandomPolicy};
use crate::game::{GameState, NUM_PLAYERS};
use crate::rivalry::{PredictedRivalryReport, RivalryReport, ShapingCondition, TraitVector};
use crate::seed::derive_seed;
use crate::traits::{
    assess_agent, featurize_episode, Archetype, SyntheticHuman, TraitDataset, TraitPredictor,
    TraitRecord,
};

const HUMAN_STREAM: u64 = 0x4855_4D41;
const TABLE_STREAM: u64 = 0x7AB1_E000;

/// Loads the agent behind a seat kind. Random seats get a fresh policy.
pub fn load_opponent(config: &ExperimentConfig, kind: SeatKind, seed: u64) -> Result<Opponent, HarnessError> {
    let path = match kind {
        SeatKind::Dql => &config.checkpoints.dql,
        SeatKind::Ppo => &config.checkpoints.ppo,
        SeatKind::Random => return Ok(Opponent::Random(RandomPolicy::new(seed))),
        SeatKind::Human => return Err(HarnessError::Config("a human seat has no agent".into())),
    };
    Ok(Opponent::Agent(Agent::load(path, &config.dqn, &config.ppo, seed)?))
}

pub fn load_opponents(config: &ExperimentConfig) -> Result<[Opponent; NUM_PLAYERS - 1], HarnessError> {
    let mut out = Vec::with_capacity(NUM_PLAYERS - 1);
    for (i, &kind) in config.seats[1..].iter().enumerate() {
        out.push(load_opponent(config, kind, derive_seed(config.seed, i as u64))?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!("three computer seats")))
}

pub fn load_predictor(config: &ExperimentConfig) -> Result<TraitPredictor, HarnessError> {
    TraitPredictor::load(&config.checkpoints.predictor).map_err(|e| {
        HarnessError::MissingPredictor(format!("{}: {e}", config.checkpoints.predictor.display()))
    })
}

fn agent_traits(config: &ExperimentConfig, opponents: &[Opponent; NUM_PLAYERS - 1]) -> [TraitVector; NUM_PLAYERS - 1] {
    std::array::from_fn(|i| config.agent_traits.get(opponents[i].kind()))
}

fn table_for(
    config: &ExperimentConfig,
    opponents: &[Opponent; NUM_PLAYERS - 1],
    predictor: Option<&TraitPredictor>,
    adaptation: Option<Adaptation>,
    run_seed: u64,
) -> Table {
    Table::new(TableSetup {
        opponents: opponents.clone(),
        agent_traits: agent_traits(config, opponents),
        predictor: predictor.cloned(),
        adaptation,
        seed: derive_seed(run_seed, TABLE_STREAM),
    })
}

fn human_for(archetype: Archetype, run_seed: u64) -> SyntheticHuman {
    SyntheticHuman::new(archetype, derive_seed(run_seed, HUMAN_STREAM))
}

/// Human-perspective rivalry toward each computer seat over one game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameRivalry {
    pub game: usize,
    pub scores: [u32; NUM_PLAYERS],
    /// Post-game assessment of seats 1..=3.
    pub assessments: [TraitVector; NUM_PLAYERS - 1],
    /// One report per seat after every match, with that match's running totals.
    pub per_match: Vec<[RivalryReport; NUM_PLAYERS - 1]>,
    pub per_game: [RivalryReport; NUM_PLAYERS - 1],
}

#[derive(Clone, Debug)]
pub struct Scenario1Run {
    pub outcomes: Vec<MatchOutcome>,
    pub games: Vec<GameRivalry>,
    pub dataset: TraitDataset,
}

impl Scenario1Run {
    /// Every seat's actions, match by match.
    pub fn decisions(&self) -> Vec<Vec<(usize, usize)>> {
        self.outcomes
            .iter()
            .map(|o| o.record.plies.iter().map(|p| (p.player, p.action)).collect())
            .collect()
    }
}

fn game_rivalry(
    config: &ExperimentConfig,
    archetype: Archetype,
    game: usize,
    outcomes: &[MatchOutcome],
) -> GameRivalry {
    let human = archetype.profile();
    let last = outcomes.last().expect("a game has at least one match");
    let matches = outcomes.len() as u32;
    let assessments: [TraitVector; NUM_PLAYERS - 1] = std::array::from_fn(|i| {
        let seat = i + 1;
        let plies: Vec<_> = outcomes.iter().flat_map(|o| o.record.seat_plies(seat)).collect();
        assess_agent(&plies, last.scores[seat], matches)
    });
    let report = |scores: &[u32; NUM_PLAYERS], i: usize| {
        RivalryReport::compute(
            &human,
            &assessments[i],
            scores[HUMAN_SEAT],
            scores[i + 1],
            config.shaping.rivalry_scale,
        )
    };
    GameRivalry {
        game,
        scores: last.scores,
        assessments,
        per_match: outcomes
            .iter()
            .map(|o| std::array::from_fn(|i| report(&o.scores, i)))
            .collect(),
        per_game: std::array::from_fn(|i| report(&last.scores, i)),
    }
}

/// Scenario 1 with one seed: full games of a synthetic human against the
/// configured seats, with post-game assessments and rivalry reports. The
/// human's moves in every match become labelled trait records.
pub fn scenario1_run(
    config: &ExperimentConfig,
    opponents: &[Opponent; NUM_PLAYERS - 1],
    predictor: Option<&TraitPredictor>,
    run_seed: u64,
) -> Result<Scenario1Run, HarnessError> {
    let archetype = config.scenario1.archetype;
    let mut table = table_for(config, opponents, predictor, None, run_seed);
    let mut human = human_for(archetype, run_seed);
    let mut outcomes = Vec::new();
    let mut games = Vec::new();
    let mut dataset = TraitDataset::new(run_seed);
    for g in 0..config.scenario1.games {
        if g > 0 {
            table.new_game();
        }
        let first = outcomes.len();
        while !table.game_over() {
            let outcome = table.play_match_with(&mut human)?;
            let moves: Vec<_> = outcome
                .record
                .seat_plies(HUMAN_SEAT)
                .map(|p| (p.obs, p.action))
                .collect();
            if let Ok(features) = featurize_episode(&moves) {
                dataset.push(TraitRecord {
                    features,
                    label: archetype.label(),
                    source: format!("scenario1/{run_seed}/g{g}/m{}", outcome.match_index),
                });
            }
            outcomes.push(outcome);
        }
        games.push(game_rivalry(config, archetype, g, &outcomes[first..]));
    }
    Ok(Scenario1Run {
        outcomes,
        games,
        dataset,
    })
}

/// Predicted rivalry of one Scenario 2 run, match by match.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario2Run {
    pub condition: ShapingCondition,
    pub seed: u64,
    /// Per match, the predicted rivalry report of each computer seat.
    pub per_seat: Vec<[Option<PredictedRivalryReport>; NUM_PLAYERS - 1]>,
    /// Per match, the mean over seats with a prediction.
    pub rivalry: Vec<f64>,
    /// Least-squares slope of `rivalry` against the match number.
    pub trend: f64,
    pub updates: usize,
    #[serde(skip)]
    pub decisions: Vec<Vec<(usize, usize)>>,
}

/// Least-squares slope of `ys` against `0, 1, 2, ...`.
pub fn ols_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Scenario 2 with one seed and condition: the synthetic human plays
/// `matches` matches; after each one the learning seats are updated with the
/// shaped final reward.
pub fn scenario2_run(
    config: &ExperimentConfig,
    opponents: &[Opponent; NUM_PLAYERS - 1],
    predictor: &TraitPredictor,
    condition: ShapingCondition,
    run_seed: u64,
) -> Result<(Scenario2Run, Table), HarnessError> {
    let adaptation = Adaptation {
        condition,
        lambda: config.shaping.lambda,
        learning_rate: config.shaping.adapt_learning_rate,
        passes: config.shaping.adapt_passes,
    };
    let mut table = table_for(config, opponents, Some(predictor), Some(adaptation), run_seed);
    let mut human = human_for(config.scenario2.archetype, run_seed);
    let mut per_seat = Vec::new();
    let mut rivalry = Vec::new();
    let mut decisions = Vec::new();
    for _ in 0..config.scenario2.matches {
        if table.game_over() {
            table.new_game();
        }
        let outcome = table.play_match_with(&mut human)?;
        let values: [Option<f64>; NUM_PLAYERS - 1] = outcome.predicted.map(|p| p.map(|r| r.rivalry));
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        rivalry.push(if present.is_empty() {
            f64::NAN
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        });
        per_seat.push(outcome.predicted);
        decisions.push(outcome.record.plies.iter().map(|p| (p.player, p.action)).collect());
    }
    let run = Scenario2Run {
        condition,
        seed: run_seed,
        trend: ols_slope(&rivalry),
        per_seat,
        rivalry,
        updates: table.updates(),
        decisions,
    };
    Ok((run, table))
}

/// One-sided sign test that `a` exceeds `b` across paired seeds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignTest {
    pub greater: ShapingCondition,
    pub lesser: ShapingCondition,
    /// Seeds where the trend under `greater` is strictly above `lesser`.
    pub wins: usize,
    pub seeds: usize,
    pub p_value: f64,
}

/// `P(X >= wins)` for `X ~ Binomial(n, 1/2)`.
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    if wins == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n as u64).expect("valid binomial");
    b.sf(wins as u64 - 1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario2Report {
    pub runs: Vec<Scenario2Run>,
    pub tests: Vec<SignTest>,
}

impl Scenario2Report {
    pub fn trends(&self, condition: ShapingCondition) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.condition == condition)
            .map(|r| r.trend)
            .collect()
    }

    pub fn test(&self, greater: ShapingCondition, lesser: ShapingCondition) -> Option<&SignTest> {
        self.tests
            .iter()
            .find(|t| t.greater == greater && t.lesser == lesser)
    }
}

/// Runs every condition over `scenario2.seeds` paired seeds and compares the
/// trends: increase against maintain and maintain against decrease.
pub fn scenario2(
    config: &ExperimentConfig,
    opponents: &[Opponent; NUM_PLAYERS - 1],
    predictor: &TraitPredictor,
    conditions: &[ShapingCondition],
    mut progress: impl FnMut(&Scenario2Run),
) -> Result<Scenario2Report, HarnessError> {
    let mut runs = Vec::new();
    for s in 0..config.scenario2.seeds {
        let run_seed = derive_seed(config.seed, s as u64);
        for &c in conditions {
            let (run, _) = scenario2_run(config, opponents, predictor, c, run_seed)?;
            progress(&run);
            runs.push(run);
        }
    }
    let mut report = Scenario2Report {
        runs,
        tests: Vec::new(),
    };
    use ShapingCondition::{Decrease, Increase, Maintain};
    for (greater, lesser) in [(Increase, Maintain), (Maintain, Decrease)] {
        let (a, b) = (report.trends(greater), report.trends(lesser));
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let wins = a.iter().zip(&b).filter(|(x, y)| x > y).count();
        report.tests.push(SignTest {
            greater,
            lesser,
            wins,
            seeds: a.len(),
            p_value: sign_test_p(wins, a.len()),
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct KindStats {
    pub kind: Option<AgentKind>,
    pub seat_games: usize,
    pub game_wins: usize,
    pub matches: usize,
    pub match_wins: usize,
    pub points: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TournamentReport {
    pub games: usize,
    pub stats: Vec<KindStats>,
}

/// Full games between the configured lineup; seating rotates every game.
pub fn tournament(config: &ExperimentConfig) -> Result<TournamentReport, HarnessError> {
    let lineup = config.tournament.lineup;
    let mut players: Vec<Box<dyn Policy>> = Vec::new();
    for (i, &kind) in lineup.iter().enumerate() {
        players.push(match load_opponent(config, kind, derive_seed(config.seed, 0x70 + i as u64))? {
            Opponent::Agent(a) => Box::new(a),
            Opponent::Random(r) => Box::new(r),
        });
    }
    let mut stats: Vec<KindStats> = Vec::new();
    let slot = |kind: SeatKind, stats: &mut Vec<KindStats>| -> usize {
        let k = kind.agent_kind();
        if let Some(i) = stats.iter().position(|s| s.kind == k) {
            return i;
        }
        stats.push(KindStats {
            kind: k,
            ..KindStats::default()
        });
        stats.len() - 1
    };
    for g in 0..config.tournament.games {
        // Seat s is taken by lineup entry (s + g) mod 4.
        let mut game = GameState::new(derive_seed(config.seed, 0x7000_0000 + g as u64));
        let order: [usize; NUM_PLAYERS] = std::array::from_fn(|s| (s + g) % NUM_PLAYERS);
        let mut taken: Vec<Option<&mut Box<dyn Policy>>> = players.iter_mut().map(Some).collect();
        let mut seats: Vec<&mut dyn Policy> = Vec::with_capacity(NUM_PLAYERS);
        for &p in &order {
            seats.push(taken[p].take().expect("each player seated once").as_mut());
        }
        let mut seats: [&mut dyn Policy; NUM_PLAYERS] =
            seats.try_into().unwrap_or_else(|_| unreachable!("four seats"));
        let mut match_firsts = Vec::new();
        while !game.is_over() {
            let (_, settlement) = play_and_settle(&mut game, &mut seats)?;
            match_firsts.push(settlement.finish[0]);
        }
        for (seat, &p) in order.iter().enumerate() {
            let i = slot(lineup[p], &mut stats);
            let s = &mut stats[i];
            s.seat_games += 1;
            s.game_wins += (game.scores.game_winner == Some(seat)) as usize;
            s.matches += match_firsts.len();
            s.match_wins += match_firsts.iter().filter(|&&f| f == seat).count();
            s.points += game.scores.points[seat] as u64;
        }
    }
    Ok(TournamentReport {
        games: config.tournament.games,
        stats,
    })
}

/// Per-turn value traces of `agent` at seat 0 against three random agents
/// over `games` full games.
pub fn export_traces(agent: &Agent, games: usize, seed: u64) -> Result<TraceSet, HarnessError> {
    let mut player = agent.clone();
    player.reseed(derive_seed(seed, 0x77));
    let mut randoms: Vec<RandomPolicy> = (1..NUM_PLAYERS as u64)
        .map(|i| RandomPolicy::new(derive_seed(seed, 0x78 + i)))
        .collect();
    let mut set = TraceSet::new(agent.kind().to_string());
    for g in 0..games {
        let mut game = GameState::new(derive_seed(seed, 0x7ACE_0000 + g as u64));
        while !game.is_over() {
            let [r1, r2, r3] = &mut randoms[..] else { unreachable!("three randoms") };
            let mut seats: [&mut dyn Policy; NUM_PLAYERS] = [&mut player, r1, r2, r3];
            let m = game.match_index as usize;
            let (record, _) = play_and_settle(&mut game, &mut seats)?;
            set.push(g, m, qvalue_trace(&record, 0));
        }
    }
    Ok(set)
}

/// Labelled episodes of every archetype: each match a synthetic human plays
/// at seat 0 against `opponents` becomes one record.
pub fn archetype_dataset(
    config: &ExperimentConfig,
    opponents: &[Opponent; NUM_PLAYERS - 1],
    seed: u64,
) -> Result<TraitDataset, HarnessError> {
    let mut data = TraitDataset::new(seed);
    for (k, archetype) in Archetype::ALL.into_iter().enumerate() {
        let run_seed = derive_seed(seed, k as u64);
        let mut table = table_for(config, opponents, None, None, run_seed);
        let mut human = human_for(archetype, run_seed);
        for m in 0..config.dataset.matches_per_archetype {
            if table.game_over() {
                table.new_game();
            }
            let outcome = table.play_match_with(&mut human)?;
            let moves: Vec<_> = outcome
                .record
                .seat_plies(HUMAN_SEAT)
                .map(|p| (p.obs, p.action))
                .collect();
            if let Ok(features) = featurize_episode(&moves) {
                data.push(TraitRecord {
                    features,
                    label: archetype.label(),
                    source: format!("{archetype}/{seed}/m{m}"),
                });
            }
        }
    }
    Ok(data)
}

/// Share of the given records whose prediction is closer to their own label
/// than to any other label in `labels`.
pub fn nearest_label_accuracy(
    model: &TraitPredictor,
    data: &TraitDataset,
    indices: &[usize],
    labels: &[TraitVector],
) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let hits = indices
        .iter()
        .filter(|&&i| {
            let r = &data.records[i];
            let p = model.predict(&r.features);
            let nearest = labels
                .iter()
                .min_by(|a, b| {
                    crate::rivalry::similarity(&p, a).total_cmp(&crate::rivalry::similarity(&p, b))
                })
                .expect("labels");
            *nearest == r.label
        })
        .count();
    hits as f64 / indices.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_line() {
        assert!((ols_slope(&[1.0, 3.0, 5.0, 7.0]) - 2.0).abs() < 1e-12);
        assert_eq!(ols_slope(&[4.0]), 0.0);
        assert!(ols_slope(&[2.0, 2.0, 2.0]).abs() < 1e-12);
    }

    #[test]
    fn sign_test_tail() {
        assert!((sign_test_p(10, 10) - 1.0 / 1024.0).abs() < 1e-12);
        assert!((sign_test_p(9, 10) - 11.0 / 1024.0).abs() < 1e-12);
        assert!((sign_test_p(8, 10) - 56.0 / 1024.0).abs() < 1e-12);
        assert_eq!(sign_test_p(0, 10), 1.0);
    }
}
