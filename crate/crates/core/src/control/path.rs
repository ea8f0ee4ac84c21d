use serde::{Deserialize, Serialize};

use super::PathError;
use crate::quantum::{ControlSample, QuantumError, TweezerSpec};

/// Who or what produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathOrigin {
    Human,
    LocalOpt,
    StochasticOpt,
    Hybrid,
    Reference,
    Edited,
}

impl PathOrigin {
    pub const ALL: [PathOrigin; 6] = [
        PathOrigin::Human,
        PathOrigin::LocalOpt,
        PathOrigin::StochasticOpt,
        PathOrigin::Hybrid,
        PathOrigin::Reference,
        PathOrigin::Edited,
    ];

    pub fn code(self) -> u8 {
        match self {
            PathOrigin::Human => 0,
            PathOrigin::LocalOpt => 1,
            PathOrigin::StochasticOpt => 2,
            PathOrigin::Hybrid => 3,
            PathOrigin::Reference => 4,
            PathOrigin::Edited => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PathOrigin::Human => "human",
            PathOrigin::LocalOpt => "local_opt",
            PathOrigin::StochasticOpt => "stochastic_opt",
            PathOrigin::Hybrid => "hybrid",
            PathOrigin::Reference => "reference",
            PathOrigin::Edited => "edited",
        }
    }
}

impl std::str::FromStr for PathOrigin {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PathOrigin::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| PathError::InvalidArgument(format!("unknown path origin {s:?}")))
    }
}

/// Time-ordered tweezer samples, interpolated linearly in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath")]
pub struct ControlPath {
    samples: Vec<ControlSample>,
    pub origin: PathOrigin,
}

#[derive(Deserialize)]
struct RawPath {
    samples: Vec<ControlSample>,
    origin: PathOrigin,
}

impl TryFrom<RawPath> for ControlPath {
    type Error = PathError;

    fn try_from(raw: RawPath) -> Result<Self, PathError> {
        ControlPath::new(raw.samples, raw.origin)
    }
}

impl ControlPath {
    /// Checks ordering and finiteness; bounds are level-specific, see
    /// [`ControlPath::check_bounds`].
    pub fn new(samples: Vec<ControlSample>, origin: PathOrigin) -> Result<Self, PathError> {
        if samples.len() < 2 {
            return Err(PathError::TooShort(samples.len()));
        }
        for (index, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.x0.is_finite() && s.depth.is_finite())
                || s.depth < 0.0
                || s.t < 0.0
            {
                return Err(PathError::InvalidSample { index });
            }
        }
        if samples[0].t != 0.0 {
            return Err(PathError::NonZeroStart(samples[0].t));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(PathError::Unordered {
                    index: i + 1,
                    prev: w[0].t,
                    next: w[1].t,
                });
            }
        }
        Ok(Self { samples, origin })
    }

    /// Tweezer parked at `(x0, depth)` for `duration`.
    pub fn stationary(
        x0: f64,
        depth: f64,
        duration: f64,
        origin: PathOrigin,
    ) -> Result<Self, PathError> {
        Self::new(
            vec![
                ControlSample::new(0.0, x0, depth),
                ControlSample::new(duration, x0, depth),
            ],
            origin,
        )
    }

    pub fn samples(&self) -> &[ControlSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<ControlSample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn with_origin(mut self, origin: PathOrigin) -> Self {
        self.origin = origin;
        self
    }

    pub fn check_bounds(&self, spec: &TweezerSpec) -> Result<(), PathError> {
        for (index, s) in self.samples.iter().enumerate() {
            spec.check(s).map_err(|e| match e {
                QuantumError::OutOfBounds {
                    field,
                    value,
                    min,
                    max,
                } => PathError::OutOfBounds {
                    index,
                    field,
                    value,
                    min,
                    max,
                },
                other => PathError::InvalidArgument(other.to_string()),
            })?;
        }
        Ok(())
    }

    /// Piecewise-linear `(x0, depth)` at time `t`, held constant outside the
    /// sampled range.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let s = &self.samples;
        if t <= s[0].t {
            return (s[0].x0, s[0].depth);
        }
        let last = s[s.len() - 1];
        if t >= last.t {
            return (last.x0, last.depth);
        }
        // first index with sample time > t
        let hi = s.partition_point(|p| p.t <= t);
        let (a, b) = (s[hi - 1], s[hi]);
        let w = (t - a.t) / (b.t - a.t);
        (a.x0 + w * (b.x0 - a.x0), a.depth + w * (b.depth - a.depth))
    }

    /// Total variation of the tweezer position.
    pub fn total_variation_x0(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].x0 - w[0].x0).abs())
            .sum()
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<ControlSample>, origin: PathOrigin) -> Self {
        debug_assert!(ControlPath::new(samples.clone(), origin).is_ok());
        Self { samples, origin }
    }
}
