use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// How a player found the game, as declared at registration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    ForcedByTalk,
    VoluntaryByTalk,
    OnlineMedia,
    Unknown,
}

impl Origin {
    pub const ALL: [Origin; 4] = [
        Origin::ForcedByTalk,
        Origin::VoluntaryByTalk,
        Origin::OnlineMedia,
        Origin::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::ForcedByTalk => "forced_by_talk",
            Origin::VoluntaryByTalk => "voluntary_by_talk",
            Origin::OnlineMedia => "online_media",
            Origin::Unknown => "unknown",
        }
    }
}

impl FromStr for Origin {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, ServiceError> {
        Origin::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| ServiceError::Invalid(format!("unknown origin {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelsMode {
    /// Levels open up along the progression tree.
    Locked,
    /// Every level is playable from the start.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BadgesMode {
    On,
    Off,
}

/// One of the four conditions of the levels × badges experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub levels: LevelsMode,
    pub badges: BadgesMode,
}

impl ExperimentCell {
    pub const ALL: [ExperimentCell; 4] = [
        ExperimentCell {
            levels: LevelsMode::Locked,
            badges: BadgesMode::On,
        },
        ExperimentCell {
            levels: LevelsMode::Locked,
            badges: BadgesMode::Off,
        },
        ExperimentCell {
            levels: LevelsMode::Open,
            badges: BadgesMode::On,
        },
        ExperimentCell {
            levels: LevelsMode::Open,
            badges: BadgesMode::Off,
        },
    ];

    pub fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|c| *c == self)
            .expect("all four cells are listed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BadgeKind {
    Performance,
    Engagement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Badge {
    pub id: String,
    pub title: String,
    pub kind: BadgeKind,
    pub awarded_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub name: String,
    pub registered_ms: i64,
    pub origin: Origin,
    pub cell: ExperimentCell,
    pub badges: Vec<Badge>,
    pub unlocked: BTreeSet<String>,
    pub play_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub level_id: String,
    pub user_id: String,
    pub best_score: i64,
    pub play_count: u64,
    pub rank: usize,
}
