use num_complex::Complex64;

use super::spectral::Spectral;
use super::{PotentialField, QuantumError, Result, SimConfig, WaveFunction};

/// Anything that can write the potential at time `t` onto the grid.
pub trait PotentialSource {
    fn fill(&self, t: f64, out: &mut [f64]) -> Result<()>;
}

impl<F> PotentialSource for F
where
    F: Fn(f64) -> PotentialField,
{
    fn fill(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let field = self(t);
        if field.values.len() != out.len() {
            return Err(QuantumError::GridMismatch);
        }
        out.copy_from_slice(&field.values);
        Ok(())
    }
}

impl PotentialSource for PotentialField {
    fn fill(&self, _t: f64, out: &mut [f64]) -> Result<()> {
        if self.values.len() != out.len() {
            return Err(QuantumError::GridMismatch);
        }
        out.copy_from_slice(&self.values);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Steps between recorded samples; the initial and final states are
    /// always recorded.
    pub stride: usize,
    /// Width of the boundary strip watched for leakage, in grid points.
    pub edge_margin: usize,
    pub edge_threshold: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            stride: 10,
            edge_margin: 5,
            edge_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: WaveFunction,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub final_state: WaveFunction,
    pub steps: usize,
}

/// Real-time propagation over `duration`, recording sampled states.
pub fn evolve<S: PotentialSource + ?Sized>(
    psi: &WaveFunction,
    potential: &S,
    duration: f64,
    config: &SimConfig,
    options: EvolveOptions,
) -> Result<Trajectory> {
    let mut samples = Vec::new();
    let (final_state, steps) =
        evolve_observed(psi, potential, duration, config, options, |t, state, _| {
            samples.push(TrajectorySample {
                t,
                state: state.clone(),
            });
            Ok(())
        })?;
    Ok(Trajectory {
        samples,
        final_state,
        steps,
    })
}

/// Same stepping as [`evolve`], handing each sample to `observe` instead of
/// storing it. The observer also receives the potential used for the step
/// that ended at the sample (the initial potential for `t = 0`).
pub fn evolve_observed<S, O>(
    psi: &WaveFunction,
    potential: &S,
    duration: f64,
    config: &SimConfig,
    options: EvolveOptions,
    mut observe: O,
) -> Result<(WaveFunction, usize)>
where
    S: PotentialSource + ?Sized,
    O: FnMut(f64, &WaveFunction, &[f64]) -> Result<()>,
{
    config.validate()?;
    if !psi.config().same_grid(config) {
        return Err(QuantumError::GridMismatch);
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(QuantumError::InvalidArgument(format!(
            "duration must be > 0, got {duration}"
        )));
    }
    let stride = options.stride.max(1);
    let steps = ((duration / config.dt).round() as usize).max(1);
    let h = duration / steps as f64;

    let mut spectral = Spectral::new(config);
    let drift: Vec<Complex64> = spectral
        .kinetic
        .iter()
        .map(|t| Complex64::from_polar(1.0, -t * h))
        .collect();
    let n = config.grid_points;
    let mut v = vec![0.0; n];
    let mut kick = vec![Complex64::new(1.0, 0.0); n];

    let mut state = psi.clone();
    potential.fill(0.0, &mut v)?;
    check_edges(&state, 0.0, &options)?;
    observe(0.0, &state, &v)?;

    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * h;
        potential.fill(t_mid, &mut v)?;
        for (k, &vi) in kick.iter_mut().zip(&v) {
            *k = Complex64::from_polar(1.0, -0.5 * vi * h);
        }
        let amps = state.amplitudes_mut();
        for (z, k) in amps.iter_mut().zip(&kick) {
            *z *= k;
        }
        spectral.forward(amps);
        for (z, d) in amps.iter_mut().zip(&drift) {
            *z *= d;
        }
        spectral.inverse(amps);
        for (z, k) in amps.iter_mut().zip(&kick) {
            *z *= k;
        }

        let done = step + 1;
        if done % stride == 0 || done == steps {
            let t = done as f64 * h;
            check_edges(&state, t, &options)?;
            observe(t, &state, &v)?;
        }
    }
    Ok((state, steps))
}

fn check_edges(state: &WaveFunction, t: f64, options: &EvolveOptions) -> Result<()> {
    let p = state.edge_probability(options.edge_margin);
    if p > options.edge_threshold {
        return Err(QuantumError::EdgeLeak {
            time: t,
            probability: p,
        });
    }
    Ok(())
}
