//! Starts the session service on a loopback port, plays one session over
//! HTTP as a synthetic human, then replays the event log and checks it
//! reproduces the final state.
//!
//! cargo run --release --example session_client -- [aggressive|conservative|erratic]
//!
//! Uses random computer seats so it runs without checkpoints.

use std::sync::Arc;

use chefs_hat::env::{Decision, Observation};
use chefs_hat::game::{BoardState, Hand};
use chefs_hat::harness::SeatKind;
use chefs_hat::session::{
    http, read_log, replay, CreateRequest, CreatedSession, HumanView, Phase, QuestionnaireAnswers,
    ServiceConfig, SessionManager, TraitAnswers,
};
use chefs_hat::traits::{Archetype, SyntheticHuman};

async fn post<T: serde::Serialize>(client: &reqwest::Client, url: String, body: &T) -> anyhow::Result<HumanView> {
    Ok(client.post(url).json(body).send().await?.error_for_status()?.json().await?)
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let archetype: Archetype = std::env::args().nth(1).unwrap_or_else(|| "aggressive".into()).parse()?;
    let dir = tempfile::tempdir()?;
    let mut config = ServiceConfig {
        root: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    };
    config.experiment.seats = [SeatKind::Human, SeatKind::Random, SeatKind::Random, SeatKind::Random];
    let manager = Arc::new(SessionManager::new(config));
    let (tx, rx) = tokio::sync::oneshot::channel();
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(http::serve(
        manager.clone(),
        "127.0.0.1:0".parse()?,
        move |addr| {
            let _ = tx.send(addr);
        },
        async {
            let _ = stop_rx.await;
        },
    ));
    let base = format!("http://{}", rx.await?);
    let client = reqwest::Client::new();

    let created: CreatedSession = client
        .post(format!("{base}/sessions"))
        .json(&CreateRequest::default())
        .send()
        .await?
        .json()
        .await?;
    let id = created.session_id;
    println!("session {id}");
    let p = archetype.profile();
    let pre = QuestionnaireAnswers::Pre {
        agency: p.traits.agency(),
        competence: p.traits.competence(),
        communion: p.traits.communion(),
        competitiveness: p.competitiveness(),
    };
    let mut view = post(&client, format!("{base}/sessions/{id}/questionnaire"), &pre).await?;
    let mut human = SyntheticHuman::new(archetype, 1);
    let mut actions = 0;
    while view.phase == Phase::Playing {
        let obs = Observation::zeros();
        let hand = Hand::from_cards(view.hand.iter().copied());
        let board = BoardState::fresh();
        let action = human.choose(&Decision {
            player: 0,
            obs: &obs,
            mask: &view.legal_mask,
            hand: &hand,
            board: &board,
        });
        view = post(&client, format!("{base}/sessions/{id}/actions"), &serde_json::json!({ "action": action })).await?;
        actions += 1;
    }
    let neutral = TraitAnswers {
        agency: 2.5,
        competence: 2.5,
        communion: 2.5,
    };
    let post_answers = QuestionnaireAnswers::Post {
        assessments: [neutral; 3],
    };
    view = post(&client, format!("{base}/sessions/{id}/questionnaire"), &post_answers).await?;
    println!("{actions} human actions; final scores {:?}; phase {:?}", view.scores, view.phase);
    if let Some(rivalry) = &view.rivalry {
        for (i, r) in rivalry.iter().enumerate() {
            println!("rivalry toward seat {}: {:+.3}", i + 1, r.rivalry);
        }
    }

    let (path, live) = manager.with(&id, |s| Ok((s.log_path().map(|p| p.to_path_buf()), s.game().clone())))?;
    let path = path.expect("file-backed log");
    let replayed = replay(&read_log(&path)?)?;
    println!(
        "replay of {} reproduces the scoreboard: {}, the match state: {}",
        path.display(),
        replayed.scores == live.scores,
        replayed.state == live.current
    );
    let _ = stop_tx.send(());
    server.await??;
    Ok(())
}
