use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use qmoves_core::control::{ControlPath, PlayRecord};
use qmoves_core::level::{builtin_level, Level, PreparedLevel, ScoreOptions, ScoreReport};

use crate::events::{Event, EventLog};
use crate::leaderboard::{window_range, Board};
use crate::metrics::{engagement_metrics, Metrics};
use crate::model::{
    Badge, BadgesMode, ExperimentCell, LeaderboardEntry, LevelsMode, Origin, UserProfile,
};
use crate::progression::Tree;
use crate::{Result, ServiceError};

/// Milliseconds since the Unix epoch.
pub type Clock = Arc<dyn Fn() -> i64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as i64)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayOutcome {
    pub play_id: u64,
    pub report: ScoreReport,
    pub personal_best: bool,
    pub new_unlocks: Vec<String>,
    pub new_badges: Vec<Badge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredPlay {
    pub play_id: u64,
    pub record: PlayRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFrame {
    pub t: f64,
    pub x0: f64,
    pub depth: f64,
    pub density: Vec<f64>,
}

/// Density snapshots for drawing a play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    /// `None` for a preview of an unsaved path.
    pub play_id: Option<u64>,
    pub level_id: String,
    pub positions: Vec<f64>,
    pub frames: Vec<ReplayFrame>,
    pub report: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditMismatch {
    pub play_id: u64,
    pub stored: i64,
    pub rescored: i64,
}

#[derive(Debug)]
struct UserState {
    profile: UserProfile,
    best_stars: BTreeMap<String, u8>,
}

#[derive(Debug)]
struct State {
    log: EventLog,
    events: Vec<Event>,
    /// Event index of each play, by play id.
    plays: Vec<usize>,
    users: BTreeMap<String, UserState>,
    names: HashMap<String, String>,
    boards: BTreeMap<String, Board>,
    rng: ChaCha8Rng,
}

/// The game backend. All mutation goes through one lock, so every user's
/// progression is updated in log order.
pub struct GameService {
    state: Mutex<State>,
    tree: Tree,
    levels: BTreeMap<String, Level>,
    prepared: Mutex<HashMap<String, Arc<PreparedLevel>>>,
    clock: Clock,
}

impl std::fmt::Debug for GameService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameService").finish_non_exhaustive()
    }
}

impl GameService {
    /// Service with no persistence.
    pub fn in_memory(rng_seed: u64) -> Self {
        Self::build(EventLog::in_memory(), Vec::new(), rng_seed, system_clock())
            .expect("empty log replays")
    }

    /// Opens the log under `data_dir` and replays it.
    pub fn open(data_dir: &Path, rng_seed: u64) -> Result<Self> {
        let (log, events) = EventLog::open(data_dir)?;
        Self::build(log, events, rng_seed, system_clock())
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    fn build(log: EventLog, events: Vec<Event>, rng_seed: u64, clock: Clock) -> Result<Self> {
        let tree = Tree::builtin();
        let levels = tree
            .ids()
            .map(|id| Ok((id.to_string(), builtin_level(id)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let service = Self {
            state: Mutex::new(State {
                log,
                events: Vec::new(),
                plays: Vec::new(),
                users: BTreeMap::new(),
                names: HashMap::new(),
                boards: BTreeMap::new(),
                rng: ChaCha8Rng::seed_from_u64(rng_seed),
            }),
            tree,
            levels,
            prepared: Mutex::new(HashMap::new()),
            clock,
        };
        {
            let mut st = service.lock();
            for event in events {
                if let Event::UserRegistered { .. } = event {
                    // keep the assignment stream where a live run would be
                    let _: usize = st.rng.gen_range(0..ExperimentCell::ALL.len());
                }
                service.apply(&mut st, event)?;
            }
        }
        Ok(service)
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn level_ids(&self) -> Vec<String> {
        self.levels.keys().cloned().collect()
    }

    pub fn level(&self, id: &str) -> Result<&Level> {
        self.levels
            .get(id)
            .ok_or_else(|| ServiceError::not_found("level", id))
    }

    pub fn prepared(&self, id: &str) -> Result<Arc<PreparedLevel>> {
        let level = self.level(id)?;
        if let Some(p) = self
            .prepared
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
        {
            return Ok(p.clone());
        }
        let p = Arc::new(PreparedLevel::new(level.clone())?);
        self.prepared
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id.to_string(), p.clone());
        Ok(p)
    }

    pub fn register_user(&self, name: &str, origin: Origin) -> Result<UserProfile> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ServiceError::Invalid("name must not be empty".into()));
        }
        let mut st = self.lock();
        if st.names.contains_key(name) {
            return Err(ServiceError::Conflict(name.to_string()));
        }
        let cell = ExperimentCell::ALL[st.rng.gen_range(0..ExperimentCell::ALL.len())];
        let user_id = format!("u{}", st.users.len() + 1);
        let event = Event::UserRegistered {
            user_id: user_id.clone(),
            name: name.to_string(),
            origin,
            cell,
            timestamp_ms: (self.clock)(),
        };
        st.log.append(&event)?;
        self.apply(&mut st, event)?;
        Ok(st.users[&user_id].profile.clone())
    }

    pub fn user(&self, user_id: &str) -> Result<UserProfile> {
        self.lock()
            .users
            .get(user_id)
            .map(|u| u.profile.clone())
            .ok_or_else(|| ServiceError::not_found("user", user_id))
    }

    pub fn users(&self) -> Vec<UserProfile> {
        self.lock()
            .users
            .values()
            .map(|u| u.profile.clone())
            .collect()
    }

    /// Scores and stores a play, then applies unlocks and badges.
    pub fn submit_play(
        &self,
        user_id: &str,
        level_id: &str,
        path: ControlPath,
        client_version: &str,
    ) -> Result<PlayOutcome> {
        {
            let st = self.lock();
            let user = st
                .users
                .get(user_id)
                .ok_or_else(|| ServiceError::not_found("user", user_id))?;
            self.level(level_id)?;
            if user.profile.cell.levels == LevelsMode::Locked
                && !user.profile.unlocked.contains(level_id)
            {
                return Err(ServiceError::Locked {
                    level: level_id.to_string(),
                    missing: self.tree.missing(level_id, &user.best_stars),
                });
            }
        }
        // scoring is the slow part and needs no lock
        let report = self.prepared(level_id)?.score(&path)?;

        let mut st = self.lock();
        let play_id = st.plays.len() as u64;
        let record = PlayRecord {
            level_id: level_id.to_string(),
            user_id: user_id.to_string(),
            timestamp_ms: (self.clock)(),
            client_version: client_version.to_string(),
            path,
            score: report.clone(),
        };
        let event = Event::PlaySubmitted { play_id, record };
        st.log.append(&event)?;
        let (personal_best, new_unlocks, new_badges) = self.apply(&mut st, event)?;
        Ok(PlayOutcome {
            play_id,
            report,
            personal_best,
            new_unlocks,
            new_badges,
        })
    }

    /// Folds one event into the derived state.
    fn apply(&self, st: &mut State, event: Event) -> Result<(bool, Vec<String>, Vec<Badge>)> {
        let mut outcome = (false, Vec::new(), Vec::new());
        match &event {
            Event::UserRegistered {
                user_id,
                name,
                origin,
                cell,
                timestamp_ms,
            } => {
                if st.users.contains_key(user_id) || st.names.contains_key(name) {
                    return Err(ServiceError::Corrupt {
                        line: st.events.len() + 1,
                        message: format!("user {user_id:?} ({name:?}) registered twice"),
                    });
                }
                let unlocked = match cell.levels {
                    LevelsMode::Open => self.tree.all(),
                    LevelsMode::Locked => self.tree.unlocked(&BTreeMap::new()),
                };
                st.names.insert(name.clone(), user_id.clone());
                st.users.insert(
                    user_id.clone(),
                    UserState {
                        profile: UserProfile {
                            user_id: user_id.clone(),
                            name: name.clone(),
                            registered_ms: *timestamp_ms,
                            origin: *origin,
                            cell: *cell,
                            badges: Vec::new(),
                            unlocked,
                            play_count: 0,
                        },
                        best_stars: BTreeMap::new(),
                    },
                );
            }
            Event::PlaySubmitted { play_id, record } => {
                if *play_id != st.plays.len() as u64 {
                    return Err(ServiceError::Corrupt {
                        line: st.events.len() + 1,
                        message: format!("play id {play_id} out of sequence"),
                    });
                }
                let seq = st.events.len() as u64;
                let personal_best = st
                    .boards
                    .entry(record.level_id.clone())
                    .or_default()
                    .record(
                        &record.user_id,
                        record.score.total_score,
                        record.timestamp_ms,
                        seq,
                    );
                let user =
                    st.users
                        .get_mut(&record.user_id)
                        .ok_or_else(|| ServiceError::Corrupt {
                            line: seq as usize + 1,
                            message: format!("play by unknown user {:?}", record.user_id),
                        })?;
                let best = user.best_stars.entry(record.level_id.clone()).or_insert(0);
                *best = (*best).max(record.score.stars);
                user.profile.play_count += 1;

                let mut new_unlocks = Vec::new();
                if user.profile.cell.levels == LevelsMode::Locked {
                    let now: BTreeSet<String> = self.tree.unlocked(&user.best_stars);
                    for id in now {
                        if user.profile.unlocked.insert(id.clone()) {
                            new_unlocks.push(id);
                        }
                    }
                }
                let mut new_badges = Vec::new();
                if user.profile.cell.badges == BadgesMode::On {
                    for spec in self.tree.badges(&user.best_stars, user.profile.play_count) {
                        if !user.profile.badges.iter().any(|b| b.id == spec.id) {
                            let badge = Badge {
                                id: spec.id,
                                title: spec.title,
                                kind: spec.kind,
                                awarded_ms: record.timestamp_ms,
                            };
                            user.profile.badges.push(badge.clone());
                            new_badges.push(badge);
                        }
                    }
                }
                st.plays.push(st.events.len());
                outcome = (personal_best, new_unlocks, new_badges);
            }
        }
        st.events.push(event);
        Ok(outcome)
    }

    pub fn play(&self, play_id: u64) -> Result<StoredPlay> {
        let st = self.lock();
        let idx = *st
            .plays
            .get(play_id as usize)
            .ok_or_else(|| ServiceError::not_found("play", &play_id.to_string()))?;
        match &st.events[idx] {
            Event::PlaySubmitted { play_id, record } => Ok(StoredPlay {
                play_id: *play_id,
                record: record.clone(),
            }),
            Event::UserRegistered { .. } => unreachable!("play index points at a play"),
        }
    }

    /// Every stored play, in submission order.
    pub fn plays(&self) -> Vec<StoredPlay> {
        let st = self.lock();
        st.events
            .iter()
            .filter_map(|e| match e {
                Event::PlaySubmitted { play_id, record } => Some(StoredPlay {
                    play_id: *play_id,
                    record: record.clone(),
                }),
                Event::UserRegistered { .. } => None,
            })
            .collect()
    }

    pub fn events(&self) -> Vec<Event> {
        self.lock().events.clone()
    }

    /// The top `window` entries, or the `window` ranks around `around`'s own
    /// rank when that player is on the board.
    pub fn leaderboard(
        &self,
        level_id: &str,
        around: Option<&str>,
        window: usize,
    ) -> Result<Vec<LeaderboardEntry>> {
        self.level(level_id)?;
        let st = self.lock();
        if let Some(u) = around {
            if !st.users.contains_key(u) {
                return Err(ServiceError::not_found("user", u));
            }
        }
        let ranked = st
            .boards
            .get(level_id)
            .map(|b| b.ranked(level_id))
            .unwrap_or_default();
        let center = around.and_then(|u| ranked.iter().find(|e| e.user_id == u).map(|e| e.rank));
        Ok(ranked[window_range(ranked.len(), center, window)].to_vec())
    }

    pub fn metrics(&self) -> Metrics {
        engagement_metrics(&self.lock().events)
    }

    /// Re-simulates a stored play, keeping the density every `stride` steps.
    pub fn replay(&self, play_id: u64, stride: usize) -> Result<Replay> {
        let stored = self.play(play_id)?;
        let mut r = self.preview(&stored.record.level_id, &stored.record.path, stride)?;
        r.play_id = Some(play_id);
        Ok(r)
    }

    /// Simulates a path without storing anything, for drawing it live.
    pub fn preview(&self, level_id: &str, path: &ControlPath, stride: usize) -> Result<Replay> {
        let prepared = self.prepared(level_id)?;
        let mut frames = Vec::new();
        let report = prepared.score_observed(
            path,
            ScoreOptions {
                stride: stride.max(1),
            },
            |t, psi| {
                let (x0, depth) = path.at(t);
                frames.push(ReplayFrame {
                    t,
                    x0,
                    depth,
                    density: psi.density(),
                });
            },
        )?;
        Ok(Replay {
            play_id: None,
            level_id: level_id.to_string(),
            positions: prepared.config().positions(),
            frames,
            report,
        })
    }

    /// Re-scores every stored play and lists those whose score changed.
    pub fn audit(&self) -> Result<Vec<AuditMismatch>> {
        let mut out = Vec::new();
        for p in self.plays() {
            let rescored = self
                .prepared(&p.record.level_id)?
                .score(&p.record.path)?
                .total_score;
            if rescored != p.record.score.total_score {
                out.push(AuditMismatch {
                    play_id: p.play_id,
                    stored: p.record.score.total_score,
                    rescored,
                });
            }
        }
        Ok(out)
    }

    /// Flushes the log to disk.
    pub fn sync(&self) -> Result<()> {
        self.lock().log.sync()
    }
}
