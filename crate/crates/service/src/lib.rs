//! Backend for the tweezer game: user registration with experiment cells,
//! play storage in an append-only log, unlock tree, badges, leaderboards,
//! engagement metrics, and the `/v1` HTTP API.

pub mod events;
pub mod http;
pub mod leaderboard;
pub mod metrics;
pub mod model;
pub mod progression;
mod service;

pub use events::{read_events, Event, EventLog};
pub use metrics::{engagement_metrics, LevelFunnel, Metrics, OriginActivity, UserActivity};
pub use model::{
    Badge, BadgeKind, BadgesMode, ExperimentCell, LeaderboardEntry, LevelsMode, Origin, UserProfile,
};
pub use progression::Tree;
pub use service::{
    system_clock, AuditMismatch, Clock, GameService, PlayOutcome, Replay, ReplayFrame, StoredPlay,
};

use thiserror::Error;

use qmoves_core::control::PathError;
use qmoves_core::level::LevelError;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("name {0:?} is already taken")]
    Conflict(String),
    #[error("{kind} {id:?} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("level {level:?} is locked; complete {missing:?} first")]
    Locked { level: String, missing: Vec<String> },
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("event log: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt event log at line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

impl ServiceError {
    pub(crate) fn not_found(kind: &'static str, id: &str) -> Self {
        ServiceError::NotFound {
            kind,
            id: id.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ServiceError>;
