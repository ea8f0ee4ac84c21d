use num_complex::Complex64;

use super::spectral::Spectral;
use super::{PotentialField, QuantumError, Result, SimConfig};

/// Complex amplitudes of the atom on the simulation grid.
///
/// Normalisation convention: `Σ |ψᵢ|² dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amplitudes: Vec<Complex64>,
    config: SimConfig,
}

impl WaveFunction {
    pub fn new(amplitudes: Vec<Complex64>, config: SimConfig) -> Result<Self> {
        config.validate()?;
        if amplitudes.len() != config.grid_points {
            return Err(QuantumError::GridMismatch);
        }
        Ok(Self { amplitudes, config })
    }

    pub fn from_fn(config: SimConfig, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amplitudes = (0..config.grid_points).map(|i| f(config.x(i))).collect();
        Self::new(amplitudes, config)
    }

    /// Normalised Gaussian packet whose density has standard deviation `sigma`.
    pub fn gaussian(config: SimConfig, center: f64, sigma: f64, momentum: f64) -> Result<Self> {
        let mut psi = Self::from_fn(config, |x| {
            let d = x - center;
            Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), momentum * x)
        })?;
        psi.normalize();
        Ok(psi)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.config.dx()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for z in &mut self.amplitudes {
                *z *= inv;
            }
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `⟨a|b⟩ = Σ conj(aᵢ) bᵢ dx`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if !self.config.same_grid(&other.config) {
            return Err(QuantumError::GridMismatch);
        }
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.config.dx())
    }

    pub fn mean_position(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, z) in self.amplitudes.iter().enumerate() {
            let w = z.norm_sqr();
            num += w * self.config.x(i);
            den += w;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Energy expectation with the spectral kinetic operator.
    pub fn energy(&self, potential: &PotentialField) -> Result<f64> {
        potential.validate(&self.config)?;
        let mut spectral = Spectral::new(&self.config);
        Ok(energy_with(
            &mut spectral,
            &self.amplitudes,
            &potential.values,
        ))
    }

    /// Probability mass within `margin` grid points of either boundary.
    pub fn edge_probability(&self, margin: usize) -> f64 {
        let n = self.amplitudes.len();
        let m = margin.min(n / 2);
        let dx = self.config.dx();
        let head: f64 = self.amplitudes[..m].iter().map(|z| z.norm_sqr()).sum();
        let tail: f64 = self.amplitudes[n - m..].iter().map(|z| z.norm_sqr()).sum();
        (head + tail) * dx
    }
}

pub(crate) fn energy_with(spectral: &mut Spectral, psi: &[Complex64], potential: &[f64]) -> f64 {
    let kinetic = spectral.kinetic_energy(psi);
    let mut pot = 0.0;
    let mut den = 0.0;
    for (z, v) in psi.iter().zip(potential) {
        let w = z.norm_sqr();
        pot += w * v;
        den += w;
    }
    if den == 0.0 {
        kinetic
    } else {
        kinetic + pot / den
    }
}

/// Squared overlap `|⟨a|b⟩|²`; phase-invariant and symmetric.
pub fn fidelity(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Probability mass inside `[x_lo, x_hi]`.
///
/// Each grid point stands for the periodic cell `[xᵢ - dx/2, xᵢ + dx/2)` and
/// contributes in proportion to the cell's overlap with the interval, so the
/// full domain integrates to the total norm.
pub fn zone_probability(psi: &WaveFunction, x_lo: f64, x_hi: f64) -> Result<f64> {
    if !(x_lo < x_hi) {
        return Err(QuantumError::InvalidArgument(format!(
            "zone interval inverted or empty: [{x_lo}, {x_hi}]"
        )));
    }
    let config = psi.config();
    if x_lo < config.domain_min || x_hi > config.domain_max {
        return Err(QuantumError::InvalidArgument(format!(
            "zone [{x_lo}, {x_hi}] outside domain [{}, {}]",
            config.domain_min, config.domain_max
        )));
    }
    let dx = config.dx();
    let overlap = |a: f64, b: f64| (b.min(x_hi) - a.max(x_lo)).max(0.0);
    let mut total = 0.0;
    for (i, z) in psi.amplitudes().iter().enumerate() {
        let x = config.x(i);
        let mut w = overlap(x - 0.5 * dx, x + 0.5 * dx);
        if i == 0 {
            // left half-cell of the first point wraps to the right edge
            w += overlap(config.domain_max - 0.5 * dx, config.domain_max);
        }
        total += z.norm_sqr() * w;
    }
    Ok(total.clamp(0.0, 1.0))
}
