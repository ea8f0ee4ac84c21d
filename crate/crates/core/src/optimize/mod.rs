//! Path optimisers: deterministic hill climbing, a genetic algorithm, and
//! hill climbing seeded from recorded human plays.
//!
//! All families search the same space: a start sample plus `knots` evenly
//! spaced control knots and a global duration. One fitness evaluation is one
//! call to the level scorer.

mod evaluate;
mod hybrid;
mod knots;
mod local;
mod report;
mod stochastic;

pub use hybrid::hybrid_optimize;
pub use knots::KnotPath;
pub use local::local_optimize;
pub use report::{
    compare_curves, convergence_report, ConvergenceReport, ConvergenceRow, Crossover,
    PlayerHistory, RunCurve, EQUIVALENCE_NOTE,
};
pub use stochastic::{stochastic_optimize, stochastic_optimize_from};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{ControlPath, PathOrigin};
use crate::level::{LevelError, ScoreReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("invalid seed path: {0}")]
    InvalidSeed(String),
    #[error("hybrid optimisation needs at least one seed path")]
    NoSeeds,
    #[error("inputs refer to different levels: {0:?} and {1:?}")]
    MixedLevels(String, String),
    #[error(transparent)]
    Level(#[from] LevelError),
}

pub type Result<T> = std::result::Result<T, OptimizeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Local,
    Stochastic,
    Hybrid,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Local => "local",
            Family::Stochastic => "stochastic",
            Family::Hybrid => "hybrid",
        }
    }

    pub fn origin(self) -> PathOrigin {
        match self {
            Family::Local => PathOrigin::LocalOpt,
            Family::Stochastic => PathOrigin::StochasticOpt,
            Family::Hybrid => PathOrigin::Hybrid,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Family::Local),
            "stochastic" => Ok(Family::Stochastic),
            "hybrid" => Ok(Family::Hybrid),
            _ => Err(OptimizeError::InvalidConfig(format!(
                "unknown optimizer family {s:?}"
            ))),
        }
    }
}

/// Hill-climb step sizes, as fractions of each coordinate's range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalConfig {
    pub x_step: f64,
    pub depth_step: f64,
    pub duration_step: f64,
    /// Multiplier applied to every step after a cycle with no acceptance.
    pub step_decay: f64,
    /// Step multiplier after `streak_length` consecutive acceptances.
    pub streak_growth: f64,
    pub streak_length: usize,
    /// Stop once every step is below this fraction of its range.
    pub min_step: f64,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            x_step: 0.05,
            depth_step: 0.05,
            duration_step: 0.05,
            step_decay: 0.5,
            streak_growth: 2.0,
            streak_length: 3,
            min_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticConfig {
    pub population: usize,
    pub elite: usize,
    pub tournament: usize,
    /// Gaussian mutation width as a fraction of each coordinate's range.
    pub mutation_scale: f64,
    pub mutation_decay: f64,
    pub crossover_probability: f64,
    /// Blend crossover overshoot on either side of the parents.
    pub blend_alpha: f64,
}

impl Default for StochasticConfig {
    fn default() -> Self {
        Self {
            population: 32,
            elite: 4,
            tournament: 3,
            mutation_scale: 0.05,
            mutation_decay: 0.99,
            crossover_probability: 0.7,
            blend_alpha: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub family: Family,
    pub evaluation_budget: usize,
    pub rng_seed: u64,
    pub knots: usize,
    /// Shortest allowed duration as a fraction of the level's limit.
    pub min_duration_fraction: f64,
    pub local: LocalConfig,
    pub stochastic: StochasticConfig,
}

impl OptimizerConfig {
    pub fn new(family: Family, evaluation_budget: usize) -> Self {
        Self {
            family,
            evaluation_budget,
            rng_seed: 0,
            knots: 32,
            min_duration_fraction: 0.05,
            local: LocalConfig::default(),
            stochastic: StochasticConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OptimizeError::InvalidConfig(m));
        if self.evaluation_budget < 1 {
            return bad("evaluation budget must be >= 1".into());
        }
        if self.knots < 1 {
            return bad("need at least one knot".into());
        }
        if !(self.min_duration_fraction > 0.0 && self.min_duration_fraction <= 1.0) {
            return bad(format!(
                "min_duration_fraction must lie in (0, 1], got {}",
                self.min_duration_fraction
            ));
        }
        let l = &self.local;
        for (name, v) in [
            ("x_step", l.x_step),
            ("depth_step", l.depth_step),
            ("duration_step", l.duration_step),
            ("min_step", l.min_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("local {name} must be > 0, got {v}"));
            }
        }
        if !(l.step_decay > 0.0 && l.step_decay < 1.0) {
            return bad(format!(
                "step_decay must lie in (0, 1), got {}",
                l.step_decay
            ));
        }
        if !(l.streak_growth >= 1.0) || l.streak_length < 1 {
            return bad("streak growth must be >= 1 with a streak length >= 1".into());
        }
        let s = &self.stochastic;
        if s.population < 2 {
            return bad(format!("population must be >= 2, got {}", s.population));
        }
        if s.elite >= s.population {
            return bad(format!(
                "elite count {} must be below the population {}",
                s.elite, s.population
            ));
        }
        if s.tournament < 1 {
            return bad("tournament size must be >= 1".into());
        }
        if !(s.mutation_scale >= 0.0) || !(s.mutation_decay > 0.0 && s.mutation_decay <= 1.0) {
            return bad("mutation scale must be >= 0 and decay in (0, 1]".into());
        }
        if !(0.0..=1.0).contains(&s.crossover_probability) || !(s.blend_alpha >= 0.0) {
            return bad("crossover probability must lie in [0, 1] and blend alpha >= 0".into());
        }
        Ok(())
    }
}

/// One fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 1-based evaluation count.
    pub index: usize,
    pub candidate_score: i64,
    pub candidate_fidelity: f64,
    pub best_score: i64,
    pub best_fidelity: f64,
}

/// Which seed a hybrid run refined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedChoice {
    pub index: usize,
    pub origin: PathOrigin,
    pub score: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub level_id: String,
    pub config: OptimizerConfig,
    pub best_path: ControlPath,
    pub best_report: ScoreReport,
    pub trace: Vec<TraceRow>,
    pub evaluations_used: usize,
    pub seed: Option<SeedChoice>,
}

impl OptimizationRun {
    pub fn best_score(&self) -> i64 {
        self.best_report.total_score
    }

    /// First evaluation whose best-so-far fidelity reaches `fidelity`.
    pub fn evaluations_to_fidelity(&self, fidelity: f64) -> Option<usize> {
        self.trace
            .iter()
            .find(|r| r.best_fidelity >= fidelity)
            .map(|r| r.index)
    }

    /// First evaluation whose best-so-far score reaches `score`.
    pub fn evaluations_to_score(&self, score: i64) -> Option<usize> {
        self.trace
            .iter()
            .find(|r| r.best_score >= score)
            .map(|r| r.index)
    }

    /// `eval_index,candidate_score,best_score`, one row per evaluation.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("eval_index,candidate_score,best_score\n");
        for r in &self.trace {
            s.push_str(&format!(
                "{},{},{}\n",
                r.index, r.candidate_score, r.best_score
            ));
        }
        s
    }
}
