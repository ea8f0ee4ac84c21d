use crate::control::{ControlPath, PathOrigin};
use crate::level::{Level, Trap};
use crate::quantum::ControlSample;

use super::OptimizerConfig;

/// A path in optimiser coordinates: a fixed start sample plus the genes
/// `[x_1, depth_1, …, x_K, depth_K, duration]`, knot `j` sitting at
/// `duration · j / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotPath {
    pub start_x0: f64,
    pub start_depth: f64,
    pub genes: Vec<f64>,
}

impl KnotPath {
    pub fn knots(&self) -> usize {
        (self.genes.len() - 1) / 2
    }

    pub fn duration(&self) -> f64 {
        self.genes[self.genes.len() - 1]
    }

    pub fn to_path(&self, origin: PathOrigin) -> ControlPath {
        let k = self.knots();
        let d = self.duration();
        let mut samples = Vec::with_capacity(k + 1);
        samples.push(ControlSample::new(0.0, self.start_x0, self.start_depth));
        for j in 1..=k {
            let t = if j == k { d } else { d * j as f64 / k as f64 };
            samples.push(ControlSample::new(
                t,
                self.genes[2 * (j - 1)],
                self.genes[2 * (j - 1) + 1],
            ));
        }
        ControlPath::new(samples, origin).expect("positive duration gives increasing knot times")
    }
}

/// Box bounds of the search space for one level.
#[derive(Debug, Clone)]
pub(crate) struct Space {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Space {
    pub fn new(level: &Level, config: &OptimizerConfig) -> Self {
        let t = &level.tweezer;
        let mut lo = Vec::with_capacity(2 * config.knots + 1);
        let mut hi = Vec::with_capacity(2 * config.knots + 1);
        for _ in 0..config.knots {
            lo.extend([t.x_min, 0.0]);
            hi.extend([t.x_max, t.depth_max]);
        }
        lo.push(config.min_duration_fraction * level.duration_max);
        hi.push(level.duration_max);
        Self { lo, hi }
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn range(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn clamp(&self, genes: &mut [f64]) {
        for ((g, &lo), &hi) in genes.iter_mut().zip(&self.lo).zip(&self.hi) {
            *g = g.clamp(lo, hi);
        }
    }

    /// Samples `path` at the knot times, clamped into the box.
    pub fn project(&self, path: &ControlPath) -> KnotPath {
        let k = (self.dims() - 1) / 2;
        let d = path.duration();
        let mut genes = Vec::with_capacity(self.dims());
        for j in 1..=k {
            let (x, a) = path.at(d * j as f64 / k as f64);
            genes.extend([x, a]);
        }
        genes.push(d);
        self.clamp(&mut genes);
        let first = path.samples()[0];
        KnotPath {
            start_x0: first.x0.clamp(self.lo[0], self.hi[0]),
            start_depth: first.depth.clamp(self.lo[1], self.hi[1]),
            genes,
        }
    }
}

/// Where an unseeded optimiser parks the tweezer at t = 0: on the initial
/// tweezer trap, or switched off above the initial static well.
pub(crate) fn default_start(level: &Level) -> (f64, f64) {
    match level.initial_trap {
        Trap::Tweezer { x0, depth } => (x0, depth),
        Trap::StaticWell { index } => {
            let center = level.wells().nth(index).map_or(0.0, |w| w.center());
            (center.clamp(level.tweezer.x_min, level.tweezer.x_max), 0.0)
        }
    }
}
