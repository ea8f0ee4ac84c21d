use serde::{Deserialize, Serialize};

use super::{invalid, Level, Result};
use crate::control::ControlPath;
use crate::quantum::{
    evolve_observed, fidelity, ground_state, zone_probability, EvolveOptions, PotentialSource,
    QuantumError, SimConfig, WaveFunction,
};

/// Probability mass inside a death zone that kills the atom.
pub const DEATH_THRESHOLD: f64 = 0.01;

const GROUND_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "zone", rename_all = "snake_case")]
pub enum DeathCause {
    /// Index into the level's death zones.
    Zone(u32),
    /// The wave function reached the simulation boundary.
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Death {
    pub time: f64,
    pub cause: DeathCause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub fidelity: f64,
    pub time_used: f64,
    pub time_penalty: f64,
    pub bonus_points: i64,
    pub total_score: i64,
    pub stars: u8,
    pub death: Option<Death>,
    /// Fidelity with the target at every sampled time.
    pub feedback_trace: Vec<f64>,
}

impl ScoreReport {
    pub fn died(&self) -> bool {
        self.death.is_some()
    }
}

/// Number of thresholds reached by `fidelity`.
pub fn stars_for(fidelity: f64, thresholds: &[f64; 3]) -> u8 {
    thresholds.iter().filter(|&&f| fidelity >= f).count() as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackColor {
    Red,
    Yellow,
    Green,
}

/// Bar colour for a live fidelity value: red below F1, yellow on [F1, F2),
/// green from F2 up.
pub fn feedback_color(value: f64, thresholds: &[f64; 3]) -> FeedbackColor {
    if value >= thresholds[1] {
        FeedbackColor::Green
    } else if value >= thresholds[0] {
        FeedbackColor::Yellow
    } else {
        FeedbackColor::Red
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOptions {
    /// Steps between feedback/death/bonus samples.
    pub stride: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self { stride: 10 }
    }
}

/// A level with its grid, landscape and trap states computed once.
#[derive(Debug, Clone)]
pub struct PreparedLevel {
    level: Level,
    config: SimConfig,
    static_values: Vec<f64>,
    positions: Vec<f64>,
    initial: WaveFunction,
    target: WaveFunction,
}

struct PathPotential<'a> {
    path: &'a ControlPath,
    static_values: &'a [f64],
    positions: &'a [f64],
    inv_two_sigma_sq: f64,
}

impl PotentialSource for PathPotential<'_> {
    fn fill(&self, t: f64, out: &mut [f64]) -> crate::quantum::Result<()> {
        if out.len() != self.static_values.len() {
            return Err(QuantumError::GridMismatch);
        }
        let (x0, depth) = self.path.at(t);
        for ((o, &v), &x) in out.iter_mut().zip(self.static_values).zip(self.positions) {
            let d = x - x0;
            *o = v - depth * (-d * d * self.inv_two_sigma_sq).exp();
        }
        Ok(())
    }
}

impl PreparedLevel {
    /// Uses the level's own grid.
    pub fn new(level: Level) -> Result<Self> {
        let config = level.sim_config();
        Self::with_config(level, config)
    }

    pub fn with_config(level: Level, config: SimConfig) -> Result<Self> {
        level.validate()?;
        config.validate()?;
        let initial = ground_state(
            &level.trap_potential(&level.initial_trap, &config)?,
            &config,
            GROUND_TOL,
        )?;
        let target = if level.target_trap == level.initial_trap {
            initial.clone()
        } else {
            ground_state(
                &level.trap_potential(&level.target_trap, &config)?,
                &config,
                GROUND_TOL,
            )?
        };
        Ok(Self {
            static_values: level.static_potential(&config).values,
            positions: config.positions(),
            level,
            config,
            initial,
            target,
        })
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn initial_state(&self) -> &WaveFunction {
        &self.initial
    }

    pub fn target_state(&self) -> &WaveFunction {
        &self.target
    }

    /// Rejects paths longer than the level allows or outside the tweezer limits.
    pub fn check_path(&self, path: &ControlPath) -> Result<()> {
        let t_max = self.level.duration_max;
        if path.duration() > t_max * (1.0 + 1e-12) {
            return Err(invalid(
                "path",
                format!(
                    "duration {} exceeds the level limit {t_max}",
                    path.duration()
                ),
            ));
        }
        path.check_bounds(&self.level.tweezer)?;
        Ok(())
    }

    pub fn score(&self, path: &ControlPath) -> Result<ScoreReport> {
        self.score_observed(path, ScoreOptions::default(), |_, _| {})
    }

    /// Scores a play, handing every sampled state to `observe`.
    pub fn score_observed(
        &self,
        path: &ControlPath,
        options: ScoreOptions,
        mut observe: impl FnMut(f64, &WaveFunction),
    ) -> Result<ScoreReport> {
        self.check_path(path)?;
        let level = &self.level;
        let sigma = level.tweezer.sigma;
        let source = PathPotential {
            path,
            static_values: &self.static_values,
            positions: &self.positions,
            inv_two_sigma_sq: 1.0 / (2.0 * sigma * sigma),
        };

        let mut trace = Vec::new();
        let mut death: Option<Death> = None;
        let mut collected = vec![false; level.bonus_pickups.len()];
        let evolve_options = EvolveOptions {
            stride: options.stride,
            ..EvolveOptions::default()
        };
        let outcome = evolve_observed(
            &self.initial,
            &source,
            path.duration(),
            &self.config,
            evolve_options,
            |t, psi, _| {
                observe(t, psi);
                trace.push(fidelity(psi, &self.target)?);
                if death.is_none() {
                    for (i, z) in level.death_zones.iter().enumerate() {
                        if zone_probability(psi, z.lo, z.hi)? > DEATH_THRESHOLD {
                            death = Some(Death {
                                time: t,
                                cause: DeathCause::Zone(i as u32),
                            });
                            break;
                        }
                    }
                }
                if !level.bonus_pickups.is_empty() {
                    let x = psi.mean_position();
                    for (got, b) in collected.iter_mut().zip(&level.bonus_pickups) {
                        if (x - b.position).abs() <= b.radius {
                            *got = true;
                        }
                    }
                }
                Ok(())
            },
        );

        let fid = match outcome {
            Ok((final_state, _)) => fidelity(&final_state, &self.target)?,
            Err(QuantumError::EdgeLeak { time, .. }) => {
                if death.is_none() {
                    death = Some(Death {
                        time,
                        cause: DeathCause::Edge,
                    });
                }
                trace.last().copied().unwrap_or(0.0)
            }
            Err(e) => return Err(e.into()),
        };

        let time_used = path.duration();
        let time_penalty = level.time_penalty_weight * time_used / level.duration_max;
        let bonus_points = collected
            .iter()
            .zip(&level.bonus_pickups)
            .filter(|(got, _)| **got)
            .map(|(_, b)| b.points)
            .sum();
        let (total_score, stars) = grade(level, fid, time_used, bonus_points, death.is_some());
        Ok(ScoreReport {
            fidelity: fid,
            time_used,
            time_penalty,
            bonus_points,
            total_score,
            stars,
            death,
            feedback_trace: trace,
        })
    }
}

/// `(total_score, stars)` for a finished play. A death zeroes both.
pub fn grade(
    level: &Level,
    fidelity: f64,
    time_used: f64,
    bonus_points: i64,
    died: bool,
) -> (i64, u8) {
    if died {
        return (0, 0);
    }
    let time_penalty = level.time_penalty_weight * time_used / level.duration_max;
    let base = (level.max_points as f64 * fidelity * (1.0 - time_penalty))
        .round()
        .max(0.0) as i64;
    (
        base + bonus_points,
        stars_for(fidelity, &level.star_thresholds),
    )
}

/// One-shot scoring; prepare the level once when scoring many paths.
pub fn score_play(level: &Level, path: &ControlPath, config: &SimConfig) -> Result<ScoreReport> {
    PreparedLevel::with_config(level.clone(), *config)?.score(path)
}
