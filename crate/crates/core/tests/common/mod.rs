#![allow(dead_code)]

pub mod oracle;

use std::net::SocketAddr;
use std::sync::Arc;

use chefs_hat::env::{Decision, Observation};
use chefs_hat::game::{BoardState, Hand};
use chefs_hat::session::{
    http, CreateRequest, CreatedSession, HumanView, Phase, QuestionnaireAnswers, ServiceConfig,
    SessionManager, TraitAnswers,
};
use chefs_hat::traits::{Archetype, SyntheticHuman};
use tokio::sync::oneshot;

pub struct Server {
    pub base: String,
    pub manager: Arc<SessionManager>,
    stop: Option<oneshot::Sender<()>>,
    handle: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl Server {
    pub async fn start(config: ServiceConfig) -> Self {
        let manager = Arc::new(SessionManager::new(config));
        let (stop, stopped) = oneshot::channel::<()>();
        let (bound_tx, bound_rx) = oneshot::channel::<SocketAddr>();
        let m = manager.clone();
        let handle = tokio::spawn(async move {
            http::serve(
                m,
                "127.0.0.1:0".parse().unwrap(),
                move |addr| {
                    let _ = bound_tx.send(addr);
                },
                async {
                    let _ = stopped.await;
                },
            )
            .await
        });
        let addr = bound_rx.await.expect("server bound");
        Self {
            base: format!("http://{addr}"),
            manager,
            stop: Some(stop),
            handle: Some(handle),
        }
    }

    pub async fn shutdown(mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(h) = self.handle.take() {
            h.await.expect("server task").expect("server io");
        }
    }
}

pub fn pre_answers(archetype: Archetype) -> QuestionnaireAnswers {
    let p = archetype.profile();
    QuestionnaireAnswers::Pre {
        agency: p.traits.agency(),
        competence: p.traits.competence(),
        communion: p.traits.communion(),
        competitiveness: p.competitiveness(),
    }
}

pub fn post_answers() -> QuestionnaireAnswers {
    let a = TraitAnswers {
        agency: 2.5,
        competence: 3.0,
        communion: 2.0,
    };
    QuestionnaireAnswers::Post { assessments: [a; 3] }
}

/// The synthetic human's move given only what the client sees.
pub fn client_move(human: &mut SyntheticHuman, view: &HumanView) -> usize {
    let obs = Observation::zeros();
    let hand = Hand::from_cards(view.hand.iter().copied());
    let board = BoardState::fresh();
    human.choose(&Decision {
        player: 0,
        obs: &obs,
        mask: &view.legal_mask,
        hand: &hand,
        board: &board,
    })
}

/// Plays one full session as a synthetic human over HTTP and returns its id
/// plus the final view.
pub async fn play_session(
    client: &reqwest::Client,
    base: &str,
    req: &CreateRequest,
    archetype: Archetype,
    human_seed: u64,
) -> (String, HumanView) {
    let created: CreatedSession = client
        .post(format!("{base}/sessions"))
        .json(req)
        .send()
        .await
        .unwrap()
        .error_for_status()
        .unwrap()
        .json()
        .await
        .unwrap();
    let id = created.session_id;
    let mut human = SyntheticHuman::new(archetype, human_seed);
    let mut view: HumanView = post_json(client, &format!("{base}/sessions/{id}/questionnaire"), &pre_answers(archetype)).await;
    loop {
        view = match view.phase {
            Phase::Playing => {
                assert!(view.your_turn, "playing view hands control back only on the human's turn");
                let action = client_move(&mut human, &view);
                post_json(
                    client,
                    &format!("{base}/sessions/{id}/actions"),
                    &serde_json::json!({ "action": action }),
                )
                .await
            }
            Phase::AwaitingPostQuestionnaire => {
                post_json(client, &format!("{base}/sessions/{id}/questionnaire"), &post_answers()).await
            }
            Phase::Closed => return (id, view),
            Phase::AwaitingPreQuestionnaire => unreachable!("pre questionnaire already answered"),
        };
    }
}

pub async fn post_json<T: serde::Serialize + ?Sized>(client: &reqwest::Client, url: &str, body: &T) -> HumanView {
    let resp = client.post(url).json(body).send().await.unwrap();
    let status = resp.status();
    if !status.is_success() {
        panic!("{url}: {status} {}", resp.text().await.unwrap_or_default());
    }
    resp.json().await.unwrap()
}

pub fn random_seats_config() -> ServiceConfig {
    let mut config = ServiceConfig::default();
    config.experiment.seats = [
        chefs_hat::harness::SeatKind::Human,
        chefs_hat::harness::SeatKind::Random,
        chefs_hat::harness::SeatKind::Random,
        chefs_hat::harness::SeatKind::Random,
    ];
    config
}
