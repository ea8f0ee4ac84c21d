use serde::{Deserialize, Serialize};

use super::{QuantumError, Result};

pub const HBAR: f64 = 1.0;
pub const MASS: f64 = 1.0;

/// Uniform periodic grid plus the real-time step.
///
/// Grid points are `domain_min + i * dx` for `i in 0..grid_points`, with
/// `dx = (domain_max - domain_min) / grid_points`; the point at `domain_max`
/// is the periodic image of the first one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub domain_min: f64,
    pub domain_max: f64,
    pub grid_points: usize,
    pub dt: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            domain_min: -1.0,
            domain_max: 1.0,
            grid_points: 256,
            dt: 1e-4,
        }
    }
}

impl SimConfig {
    pub fn new(domain_min: f64, domain_max: f64, grid_points: usize, dt: f64) -> Result<Self> {
        let config = Self {
            domain_min,
            domain_max,
            grid_points,
            dt,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 16 || !self.grid_points.is_power_of_two() {
            return Err(QuantumError::InvalidConfig(format!(
                "grid_points must be a power of two >= 16, got {}",
                self.grid_points
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(QuantumError::InvalidConfig(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.domain_max > self.domain_min)
            || !self.domain_min.is_finite()
            || !self.domain_max.is_finite()
        {
            return Err(QuantumError::InvalidConfig(format!(
                "domain_max must exceed domain_min, got [{}, {}]",
                self.domain_min, self.domain_max
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.domain_max - self.domain_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.grid_points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.domain_min + i as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.grid_points).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.grid_points;
        let dk = 2.0 * std::f64::consts::PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                m * dk
            })
            .collect()
    }

    /// Kinetic energy `ħ²k²/2m` per FFT mode.
    pub fn kinetic_spectrum(&self) -> Vec<f64> {
        self.wavenumbers()
            .into_iter()
            .map(|k| HBAR * HBAR * k * k / (2.0 * MASS))
            .collect()
    }

    pub(crate) fn same_grid(&self, other: &SimConfig) -> bool {
        self.grid_points == other.grid_points
            && self.domain_min == other.domain_min
            && self.domain_max == other.domain_max
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain_min && x <= self.domain_max
    }
}
