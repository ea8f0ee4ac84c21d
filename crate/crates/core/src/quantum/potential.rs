use serde::{Deserialize, Serialize};

use super::{QuantumError, Result, SimConfig};

/// Real potential sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub values: Vec<f64>,
}

impl PotentialField {
    pub fn zeros(config: &SimConfig) -> Self {
        Self {
            values: vec![0.0; config.grid_points],
        }
    }

    pub fn from_fn(config: &SimConfig, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: (0..config.grid_points).map(|i| f(config.x(i))).collect(),
        }
    }

    /// `½ ω² (x - center)²`, mass 1.
    pub fn harmonic(config: &SimConfig, omega: f64, center: f64) -> Self {
        Self::from_fn(config, |x| {
            0.5 * omega * omega * (x - center) * (x - center)
        })
    }

    pub fn validate(&self, config: &SimConfig) -> Result<()> {
        if self.values.len() != config.grid_points {
            return Err(QuantumError::GridMismatch);
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(QuantumError::InvalidArgument(format!(
                "potential value at grid point {i} is not finite"
            )));
        }
        Ok(())
    }

    /// Adds `amplitude * exp(-(x - center)² / 2 width²)` in place.
    pub fn add_gaussian(&mut self, config: &SimConfig, center: f64, amplitude: f64, width: f64) {
        add_gaussian(&mut self.values, config, center, amplitude, width);
    }

    pub fn add(&mut self, other: &PotentialField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }
}

pub(crate) fn add_gaussian(
    values: &mut [f64],
    config: &SimConfig,
    center: f64,
    amplitude: f64,
    width: f64,
) {
    if amplitude == 0.0 {
        return;
    }
    let inv = 1.0 / (2.0 * width * width);
    for (i, v) in values.iter_mut().enumerate() {
        let d = config.x(i) - center;
        *v += amplitude * (-d * d * inv).exp();
    }
}

/// Shape and limits of the movable optical tweezer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TweezerSpec {
    pub sigma: f64,
    pub depth_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for TweezerSpec {
    fn default() -> Self {
        Self {
            sigma: 0.05,
            depth_max: 160.0,
            x_min: -0.8,
            x_max: 0.8,
        }
    }
}

impl TweezerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(QuantumError::InvalidArgument(format!(
                "tweezer sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.depth_max > 0.0) {
            return Err(QuantumError::InvalidArgument(format!(
                "tweezer depth_max must be > 0, got {}",
                self.depth_max
            )));
        }
        if !(self.x_max > self.x_min) {
            return Err(QuantumError::InvalidArgument(format!(
                "tweezer position bounds inverted: [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    /// Checks a sample against the depth and position limits.
    pub fn check(&self, sample: &ControlSample) -> Result<()> {
        let bound = |field, value: f64, min: f64, max: f64| {
            if value >= min && value <= max {
                Ok(())
            } else {
                Err(QuantumError::OutOfBounds {
                    field,
                    value,
                    min,
                    max,
                })
            }
        };
        bound("t", sample.t, 0.0, f64::INFINITY)?;
        bound("x0", sample.x0, self.x_min, self.x_max)?;
        bound("depth", sample.depth, 0.0, self.depth_max)
    }

    pub fn clamp_x0(&self, x0: f64) -> f64 {
        x0.clamp(self.x_min, self.x_max)
    }

    pub fn clamp_depth(&self, depth: f64) -> f64 {
        depth.clamp(0.0, self.depth_max)
    }
}

/// One control knot: tweezer centre `x0` and depth at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSample {
    pub t: f64,
    pub x0: f64,
    pub depth: f64,
}

impl ControlSample {
    pub const fn new(t: f64, x0: f64, depth: f64) -> Self {
        Self { t, x0, depth }
    }
}

/// Gaussian tweezer well `-A exp(-(x - x0)² / 2σ²)`.
pub fn tweezer_potential(
    spec: &TweezerSpec,
    sample: &ControlSample,
    config: &SimConfig,
) -> Result<PotentialField> {
    spec.validate()?;
    spec.check(sample)?;
    if !config.contains(sample.x0) {
        return Err(QuantumError::OutOfBounds {
            field: "x0",
            value: sample.x0,
            min: config.domain_min,
            max: config.domain_max,
        });
    }
    let mut field = PotentialField::zeros(config);
    field.add_gaussian(config, sample.x0, -sample.depth, spec.sigma);
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> TweezerSpec {
        TweezerSpec::default()
    }

    #[test]
    fn zero_depth_is_flat() {
        let c = SimConfig::default();
        let v = tweezer_potential(&spec(), &ControlSample::new(0.0, 0.1, 0.0), &c).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn closed_form_gaussian_values() {
        let c = SimConfig::default();
        let v = tweezer_potential(&spec(), &ControlSample::new(0.0, 0.0, 160.0), &c).unwrap();
        assert_eq!(v.values[128], -160.0);
        // x = ±0.5 sits at grid points 64 and 192: -160 exp(-50) ~ -3.1e-20.
        let far = -160.0 * (-50.0f64).exp();
        for i in [64, 192] {
            assert!((v.values[i] - far).abs() < 1e-12 * far.abs());
            assert!(v.values[i].abs() < 1e-19);
        }
        assert_eq!(v.argmin(), 128);
    }

    #[test]
    fn reflection_symmetry() {
        let c = SimConfig::default();
        let right = tweezer_potential(&spec(), &ControlSample::new(0.0, 0.3, 100.0), &c).unwrap();
        let left = tweezer_potential(&spec(), &ControlSample::new(0.0, -0.3, 100.0), &c).unwrap();
        // x_i -> -x_i maps grid index i to N - i.
        let n = c.grid_points;
        for i in 1..n {
            assert!((right.values[i] - left.values[n - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_error_names_field() {
        let c = SimConfig::default();
        let err = tweezer_potential(&spec(), &ControlSample::new(0.0, 0.0, 200.0), &c).unwrap_err();
        assert!(matches!(
            err,
            QuantumError::OutOfBounds { field: "depth", .. }
        ));
        let err = tweezer_potential(&spec(), &ControlSample::new(0.0, 0.95, 10.0), &c).unwrap_err();
        assert!(matches!(err, QuantumError::OutOfBounds { field: "x0", .. }));
        let err = tweezer_potential(&spec(), &ControlSample::new(-1.0, 0.0, 10.0), &c).unwrap_err();
        assert!(matches!(err, QuantumError::OutOfBounds { field: "t", .. }));
    }
}
