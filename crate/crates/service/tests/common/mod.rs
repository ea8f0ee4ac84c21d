#![allow(dead_code)]

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use qmoves_core::control::{ControlPath, PathOrigin, PlayRecord};
use qmoves_core::level::ScoreReport;
use qmoves_service::{Clock, Event, ExperimentCell, GameService, Origin, UserProfile};

pub const DAY_MS: i64 = 86_400_000;

/// A clock that starts at `start` and moves forward `step` ms per reading.
pub fn ticking_clock(start: i64, step: i64) -> Clock {
    let now = Arc::new(AtomicI64::new(start));
    Arc::new(move || now.fetch_add(step, Ordering::SeqCst))
}

pub fn service(seed: u64) -> GameService {
    GameService::in_memory(seed).with_clock(ticking_clock(1_700_000_000_000, 1_000))
}

/// Registers throwaway users until one lands in `cell`.
pub fn register_in(svc: &GameService, name: &str, cell: ExperimentCell) -> UserProfile {
    for k in 0.. {
        let p = svc
            .register_user(&format!("{name}#{k}"), Origin::Unknown)
            .unwrap();
        if p.cell == cell {
            return p;
        }
    }
    unreachable!()
}

/// Ten steps of doing nothing: scores zero on a transport level.
pub fn idle(x0: f64, depth: f64) -> ControlPath {
    ControlPath::stationary(x0, depth, 0.001, PathOrigin::Human).unwrap()
}

pub fn synthetic_report(stars: u8) -> ScoreReport {
    let fidelity = [0.2, 0.6, 0.9, 0.99][stars as usize];
    let total = (1000.0 * fidelity * 0.9f64).round() as i64;
    ScoreReport {
        fidelity,
        time_used: 0.5,
        time_penalty: 0.1,
        bonus_points: 0,
        total_score: total,
        stars,
        death: None,
        feedback_trace: vec![fidelity],
    }
}

/// Event log builder with synthetic scores, for exercising the metrics
/// without simulating anything.
#[derive(Default)]
pub struct LogBuilder {
    pub events: Vec<Event>,
    plays: u64,
}

impl LogBuilder {
    pub fn register(&mut self, user_id: &str, origin: Origin, timestamp_ms: i64) {
        self.events.push(Event::UserRegistered {
            user_id: user_id.to_string(),
            name: format!("name-{user_id}"),
            origin,
            cell: ExperimentCell::ALL[0],
            timestamp_ms,
        });
    }

    pub fn play(&mut self, user_id: &str, level_id: &str, stars: u8, timestamp_ms: i64) {
        let record = PlayRecord {
            level_id: level_id.to_string(),
            user_id: user_id.to_string(),
            timestamp_ms,
            client_version: "fixture".into(),
            path: idle(-0.3, 160.0),
            score: synthetic_report(stars),
        };
        self.events.push(Event::PlaySubmitted {
            play_id: self.plays,
            record,
        });
        self.plays += 1;
    }
}

/// 270 registrants shaped after the tutorial drop-off: 162 (60%) finish
/// all seven tutorials, 200 try tutorial 7 of whom 162 (81%) complete it,
/// 250 try tutorials 1-6 of whom 245 (98%) complete each, 20 never play.
pub fn tutorial_dropoff_log() -> Vec<Event> {
    let mut b = LogBuilder::default();
    let t0 = 1_700_000_000_000;
    for u in 0..270 {
        let id = format!("u{u}");
        b.register(&id, Origin::ALL[u % 4], t0 + u as i64);
    }
    for u in 0..250usize {
        let id = format!("u{u}");
        let day = t0 + (u % 3) as i64 * DAY_MS;
        let passes = u < 245;
        for level in 1..=6 {
            if !passes {
                b.play(&id, &format!("tutorial_{level}"), 0, day + level);
            }
            b.play(
                &id,
                &format!("tutorial_{level}"),
                if passes { 2 } else { 0 },
                day + 10 + level,
            );
        }
        if u < 200 {
            // failures first, some players finish on a later day
            b.play(&id, "tutorial_7", 0, day + 100);
            if u < 162 {
                b.play(&id, "tutorial_7", 1, day + (u % 2) as i64 * DAY_MS + 200);
            }
        }
    }
    b.events
}
