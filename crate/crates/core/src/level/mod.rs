//! Levels: landscape, traps, hazards, and how a play is graded.

mod catalog;
mod format;
mod score;

pub use catalog::{
    benchmark_level, builtin_level, builtin_levels, catalog, reference_path, stage_of, Access,
    CatalogEntry, Degree, Lab, Stage, BENCHMARK_IDS, BUILTIN_IDS,
};
pub use format::{parse_level, parse_path_csv, serialize_level, write_path_csv};
pub use score::{
    feedback_color, grade, score_play, stars_for, Death, DeathCause, FeedbackColor, PreparedLevel,
    ScoreOptions, ScoreReport, DEATH_THRESHOLD,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::PathError;
use crate::quantum::{ControlSample, PotentialField, QuantumError, SimConfig, TweezerSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid {field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error("path rejected: {0}")]
    Path(#[from] PathError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("unknown level {0:?}")]
    Unknown(String),
}

pub type Result<T> = std::result::Result<T, LevelError>;

fn invalid(field: &'static str, message: impl Into<String>) -> LevelError {
    LevelError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillTag {
    Deceleration,
    Tunneling,
    Stabilization,
}

impl SkillTag {
    pub const ALL: [SkillTag; 3] = [
        SkillTag::Deceleration,
        SkillTag::Tunneling,
        SkillTag::Stabilization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SkillTag::Deceleration => "deceleration",
            SkillTag::Tunneling => "tunneling",
            SkillTag::Stabilization => "stabilization",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplayMode {
    /// The client draws only the expectation position; dynamics are unchanged.
    Ball,
    Wave,
}

impl DisplayMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DisplayMode::Ball => "ball",
            DisplayMode::Wave => "wave",
        }
    }
}

/// A fixed Gaussian feature of the landscape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    Well {
        center: f64,
        depth: f64,
        width: f64,
    },
    Barrier {
        center: f64,
        height: f64,
        width: f64,
    },
}

impl Feature {
    pub fn center(&self) -> f64 {
        match *self {
            Feature::Well { center, .. } | Feature::Barrier { center, .. } => center,
        }
    }

    /// Signed amplitude: negative for wells.
    pub fn amplitude(&self) -> f64 {
        match *self {
            Feature::Well { depth, .. } => -depth,
            Feature::Barrier { height, .. } => height,
        }
    }

    pub fn width(&self) -> f64 {
        match *self {
            Feature::Well { width, .. } | Feature::Barrier { width, .. } => width,
        }
    }

    pub fn is_well(&self) -> bool {
        matches!(self, Feature::Well { .. })
    }
}

/// Where the atom sits at the start, or where it must end up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trap {
    /// Ground state of the landscape plus the tweezer parked here.
    Tweezer { x0: f64, depth: f64 },
    /// Ground state of the i-th static well alone (other wells removed,
    /// barriers kept, tweezer off).
    StaticWell { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeathZone {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BonusPickup {
    pub position: f64,
    pub radius: f64,
    pub points: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub id: String,
    pub title: String,
    pub display_mode: DisplayMode,
    pub duration_max: f64,
    pub tweezer: TweezerSpec,
    pub initial_trap: Trap,
    pub target_trap: Trap,
    pub features: Vec<Feature>,
    pub death_zones: Vec<DeathZone>,
    pub bonus_pickups: Vec<BonusPickup>,
    pub skill_tags: Vec<SkillTag>,
    pub star_thresholds: [f64; 3],
    pub max_points: i64,
    pub time_penalty_weight: f64,
    /// Grid override; `None` means [`SimConfig::default`].
    pub sim: Option<SimConfig>,
}

impl Level {
    /// A bare level with default scoring and no landscape.
    pub fn new(id: impl Into<String>, initial_trap: Trap, target_trap: Trap) -> Self {
        Self {
            id: id.into(),
            title: String::new(),
            display_mode: DisplayMode::Wave,
            duration_max: 1.0,
            tweezer: TweezerSpec::default(),
            initial_trap,
            target_trap,
            features: Vec::new(),
            death_zones: Vec::new(),
            bonus_pickups: Vec::new(),
            skill_tags: Vec::new(),
            star_thresholds: [0.5, 0.8, 0.95],
            max_points: 1000,
            time_penalty_weight: 0.2,
            sim: None,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        self.sim.unwrap_or_default()
    }

    /// Wells indexed in file order, skipping barriers.
    pub fn wells(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(|f| f.is_well())
    }

    pub fn static_potential(&self, config: &SimConfig) -> PotentialField {
        self.potential_with(config, |_| true)
    }

    /// Landscape with every well except `index` removed.
    pub fn single_well_potential(&self, config: &SimConfig, index: usize) -> PotentialField {
        let mut seen = 0;
        self.potential_with(config, |f| {
            if !f.is_well() {
                return true;
            }
            seen += 1;
            seen - 1 == index
        })
    }

    fn potential_with(
        &self,
        config: &SimConfig,
        mut keep: impl FnMut(&Feature) -> bool,
    ) -> PotentialField {
        let mut v = PotentialField::zeros(config);
        for f in &self.features {
            if keep(f) {
                v.add_gaussian(config, f.center(), f.amplitude(), f.width());
            }
        }
        v
    }

    /// Potential that defines a trap's state.
    pub fn trap_potential(&self, trap: &Trap, config: &SimConfig) -> Result<PotentialField> {
        match *trap {
            Trap::Tweezer { x0, depth } => {
                let mut v = self.static_potential(config);
                v.add_gaussian(config, x0, -depth, self.tweezer.sigma);
                Ok(v)
            }
            Trap::StaticWell { index } => {
                if index >= self.wells().count() {
                    return Err(invalid(
                        "trap",
                        format!("static well {index} does not exist"),
                    ));
                }
                Ok(self.single_well_potential(config, index))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty()
            || !self
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(invalid(
                "id",
                format!("{:?} must be non-empty [A-Za-z0-9_-]", self.id),
            ));
        }
        if self.title.contains('\n') {
            return Err(invalid("title", "must be a single line"));
        }
        let config = self.sim_config();
        config
            .validate()
            .map_err(|e| invalid("sim", e.to_string()))?;
        let in_domain = |x: f64| x >= config.domain_min && x <= config.domain_max;

        if !(self.duration_max > 0.0) || !self.duration_max.is_finite() {
            return Err(invalid(
                "duration_max",
                format!("must be > 0, got {}", self.duration_max),
            ));
        }
        self.tweezer
            .validate()
            .map_err(|e| invalid("tweezer", e.to_string()))?;
        if !in_domain(self.tweezer.x_min) || !in_domain(self.tweezer.x_max) {
            return Err(invalid(
                "tweezer",
                "position bounds outside the simulation domain",
            ));
        }
        let [f1, f2, f3] = self.star_thresholds;
        if !(0.0 < f1 && f1 < f2 && f2 < f3 && f3 <= 1.0) {
            return Err(invalid(
                "star_thresholds",
                format!("need 0 < F1 < F2 < F3 <= 1, got {f1} {f2} {f3}"),
            ));
        }
        if self.max_points <= 0 {
            return Err(invalid(
                "max_points",
                format!("must be > 0, got {}", self.max_points),
            ));
        }
        if !(0.0..=1.0).contains(&self.time_penalty_weight) {
            return Err(invalid(
                "time_penalty_weight",
                format!("must lie in [0, 1], got {}", self.time_penalty_weight),
            ));
        }
        for f in &self.features {
            let (field, ok) = match *f {
                Feature::Well { depth, .. } => ("well", depth > 0.0 && depth.is_finite()),
                Feature::Barrier { height, .. } => ("barrier", height > 0.0 && height.is_finite()),
            };
            if !ok || !(f.width() > 0.0) || !f.width().is_finite() || !in_domain(f.center()) {
                return Err(invalid(
                    field,
                    format!("{f:?} needs positive strength and width inside the domain"),
                ));
            }
        }
        for z in &self.death_zones {
            if !(z.lo < z.hi) || !in_domain(z.lo) || !in_domain(z.hi) {
                return Err(invalid(
                    "death_zone",
                    format!("[{}, {}] must be ordered and inside the domain", z.lo, z.hi),
                ));
            }
        }
        for b in &self.bonus_pickups {
            if !in_domain(b.position) || !(b.radius > 0.0) || !b.radius.is_finite() || b.points < 0
            {
                return Err(invalid(
                    "bonus",
                    format!("{b:?} needs a position in the domain, radius > 0, points >= 0"),
                ));
            }
        }
        let mut tags = self.skill_tags.clone();
        tags.sort();
        tags.dedup();
        if tags.len() != self.skill_tags.len() {
            return Err(invalid("skill_tags", "duplicate tag"));
        }
        for (field, trap) in [
            ("initial_trap", &self.initial_trap),
            ("target_trap", &self.target_trap),
        ] {
            match *trap {
                Trap::Tweezer { x0, depth } => {
                    let sample = ControlSample::new(0.0, x0, depth);
                    self.tweezer
                        .check(&sample)
                        .map_err(|e| invalid(field, e.to_string()))?;
                    if depth <= 0.0 {
                        return Err(invalid(field, "tweezer trap needs depth > 0"));
                    }
                }
                Trap::StaticWell { index } => {
                    if index >= self.wells().count() {
                        return Err(invalid(
                            field,
                            format!("static well {index} does not exist"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}
