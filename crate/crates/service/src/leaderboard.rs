use std::collections::HashMap;

use crate::model::LeaderboardEntry;

#[derive(Debug, Clone)]
struct Standing {
    best_score: i64,
    achieved_ms: i64,
    /// Log position of the play that set the best, the final tie-break.
    achieved_seq: u64,
    play_count: u64,
}

/// Personal bests on one level.
#[derive(Debug, Clone, Default)]
pub struct Board {
    standings: HashMap<String, Standing>,
}

impl Board {
    /// Counts a play and returns whether it is a new personal best.
    pub fn record(&mut self, user_id: &str, score: i64, timestamp_ms: i64, seq: u64) -> bool {
        match self.standings.get_mut(user_id) {
            Some(s) => {
                s.play_count += 1;
                if score > s.best_score {
                    s.best_score = score;
                    s.achieved_ms = timestamp_ms;
                    s.achieved_seq = seq;
                    true
                } else {
                    false
                }
            }
            None => {
                self.standings.insert(
                    user_id.to_string(),
                    Standing {
                        best_score: score,
                        achieved_ms: timestamp_ms,
                        achieved_seq: seq,
                        play_count: 1,
                    },
                );
                true
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.standings.is_empty()
    }

    /// Best score first; ties go to whoever got there earlier.
    pub fn ranked(&self, level_id: &str) -> Vec<LeaderboardEntry> {
        let mut rows: Vec<(&String, &Standing)> = self.standings.iter().collect();
        rows.sort_by(|a, b| {
            b.1.best_score
                .cmp(&a.1.best_score)
                .then(a.1.achieved_ms.cmp(&b.1.achieved_ms))
                .then(a.1.achieved_seq.cmp(&b.1.achieved_seq))
        });
        rows.into_iter()
            .enumerate()
            .map(|(i, (user, s))| LeaderboardEntry {
                level_id: level_id.to_string(),
                user_id: user.clone(),
                best_score: s.best_score,
                play_count: s.play_count,
                rank: i + 1,
            })
            .collect()
    }
}

/// `size` consecutive ranks centred on `center` (1-based), shifted to stay
/// inside `1..=len`; the top `size` when there is no centre.
pub fn window_range(len: usize, center: Option<usize>, size: usize) -> std::ops::Range<usize> {
    let size = size.min(len);
    let start = match center {
        Some(rank) => rank
            .saturating_sub(1)
            .saturating_sub((size.saturating_sub(1)) / 2)
            .min(len - size),
        None => 0,
    };
    start..start + size
}
