//! The FineTune toolkit: point moves, smoothing, time stretching, locking,
//! and uniform resampling. Every editor returns a valid path or an error.

use serde::{Deserialize, Serialize};

use super::{ControlPath, PathError, PathOrigin};
use crate::quantum::{ControlSample, QuantumError, TweezerSpec};

/// Closed time intervals whose samples the editors must not touch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LockMask {
    intervals: Vec<(f64, f64)>,
}

impl LockMask {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self, PathError> {
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(PathError::InvalidArgument(format!(
                    "lock interval [{a}, {b}] is inverted"
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in intervals.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(PathError::InvalidArgument(format!(
                    "lock intervals [{}, {}] and [{}, {}] overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Locks the whole of `path`.
    pub fn full(path: &ControlPath) -> Self {
        Self {
            intervals: vec![(0.0, path.duration())],
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_locked(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| t >= a && t <= b)
    }

    pub fn check_within(&self, path: &ControlPath) -> Result<(), PathError> {
        let d = path.duration();
        match self.intervals.iter().find(|&&(a, b)| a < 0.0 || b > d) {
            Some(&(a, b)) => Err(PathError::InvalidArgument(format!(
                "lock interval [{a}, {b}] outside path duration {d}"
            ))),
            None => Ok(()),
        }
    }
}

/// Uniform resampling at `rate` samples per unit time, keeping both endpoints.
pub fn resample(path: &ControlPath, rate: f64) -> Result<ControlPath, PathError> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(PathError::InvalidArgument(format!(
            "resample rate must be > 0, got {rate}"
        )));
    }
    let duration = path.duration();
    let tol = 1e-9 * duration.max(1.0);
    let mut samples = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 / rate;
        if t >= duration - tol {
            break;
        }
        let (x0, depth) = path.at(t);
        samples.push(ControlSample::new(t, x0, depth));
        k += 1;
    }
    let last = path.samples()[path.len() - 1];
    samples.push(ControlSample::new(duration, last.x0, last.depth));
    if samples.len() < 2 {
        // duration shorter than one resampling period
        return Ok(path.clone());
    }
    Ok(ControlPath::from_parts_unchecked(samples, path.origin))
}

/// Replaces one sample; the new sample must stay inside the tweezer limits
/// and strictly between its temporal neighbours.
pub fn move_point(
    path: &ControlPath,
    index: usize,
    sample: ControlSample,
    spec: &TweezerSpec,
) -> Result<ControlPath, PathError> {
    if index >= path.len() {
        return Err(PathError::InvalidArgument(format!(
            "sample index {index} out of range for a {}-sample path",
            path.len()
        )));
    }
    spec.check(&sample).map_err(|e| match e {
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
    if path.samples()[index] == sample {
        return Ok(path.clone());
    }
    let mut samples = path.samples().to_vec();
    samples[index] = sample;
    ControlPath::new(samples, PathOrigin::Edited)
}

/// Scales every sample time by `factor`; positions and depths are untouched.
pub fn stretch_time(path: &ControlPath, factor: f64) -> Result<ControlPath, PathError> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(PathError::InvalidArgument(format!(
            "stretch factor must be > 0, got {factor}"
        )));
    }
    if factor == 1.0 {
        return Ok(path.clone());
    }
    let samples = path
        .samples()
        .iter()
        .map(|s| ControlSample::new(s.t * factor, s.x0, s.depth))
        .collect();
    ControlPath::new(samples, PathOrigin::Edited)
}

/// Centred moving average of `x0` and depth over `window` samples.
///
/// Locked samples keep their exact values but still feed their neighbours'
/// averages. Near the path ends the window is truncated.
pub fn smooth(
    path: &ControlPath,
    window: usize,
    lock: &LockMask,
) -> Result<ControlPath, PathError> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(PathError::InvalidArgument(format!(
            "smoothing window must be odd and >= 3, got {window}"
        )));
    }
    lock.check_within(path)?;
    let src = path.samples();
    let half = window / 2;
    let mut out = src.to_vec();
    let mut changed = false;
    for (i, s) in out.iter_mut().enumerate() {
        if lock.is_locked(s.t) {
            continue;
        }
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(src.len() - 1);
        let n = (hi - lo + 1) as f64;
        // offsets from the centre value keep constant stretches bit-exact
        let x0 = s.x0 + src[lo..=hi].iter().map(|p| p.x0 - s.x0).sum::<f64>() / n;
        let depth = s.depth + src[lo..=hi].iter().map(|p| p.depth - s.depth).sum::<f64>() / n;
        if x0 != s.x0 || depth != s.depth {
            changed = true;
        }
        s.x0 = x0;
        s.depth = depth;
    }
    if !changed {
        return Ok(path.clone());
    }
    Ok(ControlPath::from_parts_unchecked(out, PathOrigin::Edited))
}
