mod common;

use std::time::{Duration, Instant};

use chefs_hat::session::{read_log, replay, CreateRequest, EventPayload, HumanView, Phase, SessionEvent};
use chefs_hat::traits::Archetype;
use common::{play_session, post_answers, pre_answers, random_seats_config, Server};
use serde_json::Value;

fn with_root(dir: &tempfile::TempDir) -> chefs_hat::session::ServiceConfig {
    let mut config = random_seats_config();
    config.root = Some(dir.path().to_path_buf());
    config
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn full_session_replays_from_its_log() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(with_root(&dir)).await;
    let client = reqwest::Client::new();
    let req = CreateRequest {
        seed: Some(11),
        ..CreateRequest::default()
    };
    let (id, view) = play_session(&client, &server.base, &req, Archetype::Aggressive, 5).await;
    assert_eq!(view.phase, Phase::Closed);
    assert!(view.game_over);
    assert!(view.scores.iter().any(|&s| s >= 15));
    assert!(view.rivalry.is_some());

    let (path, live_game) = server
        .manager
        .with(&id, |s| Ok((s.log_path().unwrap().to_path_buf(), s.game().clone())))
        .unwrap();
    let events = read_log(&path).unwrap();
    let replayed = replay(&events).unwrap();
    assert_eq!(replayed.scores, live_game.scores);
    assert_eq!(replayed.state, live_game.current);
    assert_eq!(replayed.game, live_game);
    let kinds: Vec<_> = events.iter().map(|e| e.payload.kind()).collect();
    assert_eq!(kinds.first(), Some(&"session_created"));
    assert_eq!(kinds.last(), Some(&"session_closed"));
    assert!(kinds.contains(&"rivalry_report"));
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn client_events_hide_seeds_and_other_hands() {
    let server = Server::start(random_seats_config()).await;
    let client = reqwest::Client::new();
    let req = CreateRequest {
        seed: Some(3),
        ..CreateRequest::default()
    };
    let (id, _) = play_session(&client, &server.base, &req, Archetype::Erratic, 9).await;
    let events: Vec<SessionEvent> = client
        .get(format!("{}/sessions/{id}/events?since=0", server.base))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert!(!events.is_empty());
    let mut exchanges = 0;
    for e in &events {
        match &e.payload {
            EventPayload::SessionCreated { table_seed, .. } => assert_eq!(*table_seed, None),
            EventPayload::Deal { match_seed, hands, .. } => {
                assert_eq!(*match_seed, None);
                assert!(hands[0].is_some());
                assert!(hands[1..].iter().all(Option::is_none));
            }
            EventPayload::Exchange { transfers, .. } => {
                exchanges += 1;
                assert!(transfers.iter().all(|t| t.from == 0 || t.to == 0));
            }
            _ => {}
        }
    }
    assert!(exchanges > 0, "a full game has at least one exchange");
    let tail: Vec<SessionEvent> = client
        .get(format!("{}/sessions/{id}/events?since={}", server.base, events.len() - 2))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(tail.len(), 2);
    assert_eq!(tail[1].seq, events.len() as u64);

    // The state view never carries other seats' cards.
    let state: Value = client
        .get(format!("{}/sessions/{id}/state", server.base))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    for seat in state["seats"].as_array().unwrap() {
        assert!(seat.get("hand").is_none());
        assert!(seat["cards_left"].is_u64());
    }
    server.shutdown().await;
}

async fn error_of(resp: reqwest::Response) -> (u16, String) {
    let status = resp.status().as_u16();
    let body: Value = resp.json().await.unwrap();
    (status, body["error"].as_str().unwrap().to_string())
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn errors_map_to_status_codes() {
    let server = Server::start(random_seats_config()).await;
    let client = reqwest::Client::new();
    let base = &server.base;

    let r = client.get(format!("{base}/sessions/nope/state")).send().await.unwrap();
    assert_eq!(error_of(r).await, (404, "not_found".into()));

    let created: Value = client
        .post(format!("{base}/sessions"))
        .json(&CreateRequest::default())
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let id = created["session_id"].as_str().unwrap().to_string();
    assert_eq!(created["questionnaire"]["items"].as_array().unwrap().len(), 4);

    let r = client
        .post(format!("{base}/sessions/{id}/actions"))
        .json(&serde_json::json!({"action": 199}))
        .send()
        .await
        .unwrap();
    assert_eq!(error_of(r).await, (409, "wrong_phase".into()));

    let r = client
        .post(format!("{base}/sessions/{id}/questionnaire"))
        .json(&serde_json::json!({"phase": "pre", "answers": {"agency": 7.0, "competence": 1.0, "communion": 1.0, "competitiveness": 1.0}}))
        .send()
        .await
        .unwrap();
    assert_eq!(error_of(r).await, (422, "out_of_range".into()));

    let r = client
        .post(format!("{base}/sessions/{id}/questionnaire"))
        .json(&post_answers())
        .send()
        .await
        .unwrap();
    assert_eq!(error_of(r).await, (409, "wrong_phase".into()));

    let view: HumanView = common::post_json(&client, &format!("{base}/sessions/{id}/questionnaire"), &pre_answers(Archetype::Conservative)).await;
    assert_eq!(view.phase, Phase::Playing);
    assert!(view.your_turn);
    let illegal = (0..200).find(|&i| !view.legal_mask.is_legal(i)).unwrap();
    let r = client
        .post(format!("{base}/sessions/{id}/actions"))
        .json(&serde_json::json!({"action": illegal}))
        .send()
        .await
        .unwrap();
    assert_eq!(error_of(r).await, (422, "illegal_move".into()));
    let r = client
        .post(format!("{base}/sessions/{id}/actions"))
        .json(&serde_json::json!({"action": 5000}))
        .send()
        .await
        .unwrap();
    assert_eq!(error_of(r).await, (422, "illegal_move".into()));

    let r = client
        .post(format!("{base}/sessions/{id}/actions"))
        .body("not json")
        .header("content-type", "application/json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 400);

    let missing = CreateRequest {
        dql_checkpoint: Some("/nonexistent/dql.ckpt".into()),
        ..CreateRequest::default()
    };
    let mut dql_config = random_seats_config();
    dql_config.experiment.seats[1] = chefs_hat::harness::SeatKind::Dql;
    let dql_server = Server::start(dql_config).await;
    let r = client
        .post(format!("{}/sessions", dql_server.base))
        .json(&missing)
        .send()
        .await
        .unwrap();
    assert_eq!(error_of(r).await, (404, "missing_checkpoint".into()));
    dql_server.shutdown().await;
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn idle_sessions_suspend_and_resume() {
    let server = Server::start(random_seats_config()).await;
    let client = reqwest::Client::new();
    let base = &server.base;
    let created: Value = client
        .post(format!("{base}/sessions"))
        .json(&CreateRequest::default())
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let id = created["session_id"].as_str().unwrap().to_string();
    assert_eq!(server.manager.sweep(Instant::now()), 0);
    assert_eq!(server.manager.sweep(Instant::now() + Duration::from_secs(11 * 60)), 1);
    let view: HumanView = client
        .get(format!("{base}/sessions/{id}/state"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert!(view.suspended);
    assert_eq!(view.phase, Phase::AwaitingPreQuestionnaire);
    let view = common::post_json(&client, &format!("{base}/sessions/{id}/questionnaire"), &pre_answers(Archetype::Aggressive)).await;
    assert!(!view.suspended);
    assert_eq!(view.phase, Phase::Playing);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn stream_pushes_events() {
    let server = Server::start(random_seats_config()).await;
    let client = reqwest::Client::new();
    let base = server.base.clone();
    let created: Value = client
        .post(format!("{base}/sessions"))
        .json(&CreateRequest::default())
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let id = created["session_id"].as_str().unwrap().to_string();
    let mut stream = client.get(format!("{base}/sessions/{id}/stream")).send().await.unwrap();
    assert!(stream.status().is_success());
    let _: HumanView = common::post_json(&client, &format!("{base}/sessions/{id}/questionnaire"), &pre_answers(Archetype::Aggressive)).await;
    let mut text = String::new();
    while !text.contains("event: deal") {
        let chunk = tokio::time::timeout(Duration::from_secs(10), stream.chunk())
            .await
            .expect("stream delivers within 10 s")
            .unwrap()
            .expect("stream stays open");
        text.push_str(&String::from_utf8_lossy(&chunk));
    }
    assert!(text.contains("event: questionnaire_pre"));
    assert!(text.contains("\"match_seed\":null"));
    drop(stream);
    server.shutdown().await;
}
