//! Chef's Hat: the four-seat card game, deep Q-learning and PPO agents,
//! rivalry metrics between a human and each computer seat, a trait
//! predictor, rivalry-shaped online adaptation and a live session service.
//!
//! ## Modules
//!
//! - [`game`]: cards, the 200-entry action catalog, legality, rounds, the
//!   role exchange and scoring.
//! - [`env`]: observations, rewards, policies and the single-learner
//!   environment.
//! - [`nn`]: dense networks with hand-written backpropagation and Adam.
//! - [`agents`]: DQL, PPO, introspective confidence, value traces and
//!   checkpoint files.
//! - [`rivalry`]: similarity, relative performance, rivalry scores and
//!   reward shaping.
//! - [`traits`]: episode features, the trait predictor and synthetic humans.
//! - [`harness`]: experiment config, training curriculum, both scenarios,
//!   tournaments and trace export.
//! - [`session`]: the HTTP session service, its event log and replay.
//!
//! ## Examples
//!
//! ```text
//! play_match        one match between four random agents, move by move
//! train_agents      full curriculum for DQL or PPO, writes a checkpoint
//! rivalry_report    human-side and agent-side rivalry, shaped rewards
//! trait_predictor   archetype dataset, predictor training and accuracy
//! scenario1         synthetic human vs DQL, PPO and random, rivalry per game
//! scenario2         rivalry-shaped adaptation and the paired sign tests
//! tournament        full games between the learned agents and randoms
//! value_traces      per-turn value traces of DQL and PPO as CSV
//! session_client    one session over loopback HTTP, then log replay
//! replay_log        rebuild a session from its event log file
//! ```

pub mod agents;
pub mod env;
pub mod game;
pub mod harness;
pub mod rivalry;
pub mod nn;
pub mod seed;
pub mod session;
pub mod traits;
