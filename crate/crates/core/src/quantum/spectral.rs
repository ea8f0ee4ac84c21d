use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SimConfig;

/// Forward/inverse FFT pair with the kinetic spectrum of a grid.
pub(crate) struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    pub(crate) kinetic: Vec<f64>,
    n: usize,
}

impl Spectral {
    pub(crate) fn new(config: &SimConfig) -> Self {
        let n = config.grid_points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            kinetic: config.kinetic_spectrum(),
            n,
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse transform including the 1/N normalisation.
    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// `⟨ψ|T|ψ⟩ / ⟨ψ|ψ⟩` with the exact spectral kinetic operator.
    pub(crate) fn kinetic_energy(&mut self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let mut num = 0.0;
        let mut den = 0.0;
        for (z, t) in buf.iter().zip(&self.kinetic) {
            let w = z.norm_sqr();
            num += w * t;
            den += w;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}
