//! Engagement metrics recomputed from the raw event log.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use qmoves_core::level::{catalog, Stage};

use crate::events::Event;
use crate::model::Origin;
use crate::progression::COMPLETION_STARS;

const DAY_MS: i64 = 86_400_000;

/// UTC calendar day number of a millisecond timestamp.
pub fn utc_day(timestamp_ms: i64) -> i64 {
    timestamp_ms.div_euclid(DAY_MS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFunnel {
    pub level_id: String,
    /// Players with at least one play.
    pub tried: usize,
    /// Players with at least one completing play.
    pub completed: usize,
    pub completion_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserActivity {
    pub user_id: String,
    pub origin: Origin,
    pub plays: usize,
    pub active_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginActivity {
    pub origin: Origin,
    pub registrants: usize,
    pub active_users: usize,
    /// Mean over active users of plays per active day.
    pub plays_per_active_day: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub registrants: usize,
    pub active_users: usize,
    pub total_plays: usize,
    /// Share of registrants who completed every tutorial level.
    pub tutorial_completion_rate: f64,
    pub levels: Vec<LevelFunnel>,
    pub users: Vec<UserActivity>,
    pub by_origin: Vec<OriginActivity>,
    /// `retention[n - 1]` players were active on at least `n` days.
    pub retention: Vec<usize>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Default)]
struct Tally {
    plays: usize,
    days: BTreeSet<i64>,
}

pub fn engagement_metrics(events: &[Event]) -> Metrics {
    let mut origins: BTreeMap<&str, Origin> = BTreeMap::new();
    let mut tally: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut tried: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut completed: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut total_plays = 0;
    for e in events {
        match e {
            Event::UserRegistered {
                user_id, origin, ..
            } => {
                origins.insert(user_id, *origin);
            }
            Event::PlaySubmitted { record, .. } => {
                total_plays += 1;
                let user = record.user_id.as_str();
                let level = record.level_id.as_str();
                let t = tally.entry(user).or_default();
                t.plays += 1;
                t.days.insert(utc_day(record.timestamp_ms));
                tried.entry(level).or_default().insert(user);
                if record.score.stars >= COMPLETION_STARS {
                    completed.entry(level).or_default().insert(user);
                }
            }
        }
    }

    let mut level_ids: Vec<&str> = catalog().iter().map(|e| e.id).collect();
    let extra: BTreeSet<&str> = tried
        .keys()
        .copied()
        .filter(|id| !level_ids.contains(id))
        .collect();
    level_ids.extend(extra);
    let levels = level_ids
        .iter()
        .map(|&id| {
            let t = tried.get(id).map_or(0, BTreeSet::len);
            let c = completed.get(id).map_or(0, BTreeSet::len);
            LevelFunnel {
                level_id: id.to_string(),
                tried: t,
                completed: c,
                completion_ratio: ratio(c, t),
            }
        })
        .collect();

    let tutorials: Vec<&str> = catalog()
        .iter()
        .filter(|e| matches!(e.stage(), Stage::Tutorial { .. }))
        .map(|e| e.id)
        .collect();
    let finished_tutorial = origins
        .keys()
        .filter(|u| {
            tutorials
                .iter()
                .all(|l| completed.get(l).is_some_and(|s| s.contains(*u)))
        })
        .count();

    let users: Vec<UserActivity> = tally
        .iter()
        .map(|(u, t)| UserActivity {
            user_id: u.to_string(),
            origin: origins.get(u).copied().unwrap_or(Origin::Unknown),
            plays: t.plays,
            active_days: t.days.len(),
        })
        .collect();

    let by_origin = Origin::ALL
        .into_iter()
        .map(|o| {
            let active: Vec<&UserActivity> = users.iter().filter(|u| u.origin == o).collect();
            let mean = if active.is_empty() {
                0.0
            } else {
                active
                    .iter()
                    .map(|u| ratio(u.plays, u.active_days))
                    .sum::<f64>()
                    / active.len() as f64
            };
            OriginActivity {
                origin: o,
                registrants: origins.values().filter(|x| **x == o).count(),
                active_users: active.len(),
                plays_per_active_day: mean,
            }
        })
        .collect();

    let max_days = users.iter().map(|u| u.active_days).max().unwrap_or(0);
    let retention = (1..=max_days)
        .map(|n| users.iter().filter(|u| u.active_days >= n).count())
        .collect();

    Metrics {
        registrants: origins.len(),
        active_users: users.len(),
        total_plays,
        tutorial_completion_rate: ratio(finished_tutorial, origins.len()),
        levels,
        users,
        by_origin,
        retention,
    }
}
