//! One-dimensional Schrödinger dynamics for a single atom in a tweezer landscape.
//!
//! Units are dimensionless with ħ = m = 1. The grid is uniform and periodic;
//! propagation is split-operator with the kinetic term applied exactly in
//! frequency space.

mod eigen;
mod evolve;
mod grid;
mod ground;
mod potential;
mod spectral;
mod wavefunction;

pub use eigen::{eigenstates, Eigenpair};
pub use evolve::{
    evolve, evolve_observed, EvolveOptions, PotentialSource, Trajectory, TrajectorySample,
};
pub use grid::{SimConfig, HBAR, MASS};
pub use ground::{ground_state, ground_state_from, GroundStateOptions};
pub use potential::{tweezer_potential, ControlSample, PotentialField, TweezerSpec};
pub use wavefunction::{fidelity, zone_probability, WaveFunction};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("control sample out of bounds: {field} = {value} not in [{min}, {max}]")]
    OutOfBounds {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch between wave functions")]
    GridMismatch,
    #[error(
        "ground state did not converge after {iterations} iterations (last energy {last_energy})"
    )]
    NoConvergence { iterations: usize, last_energy: f64 },
    #[error("probability {probability:.3e} leaked to the grid edge at t = {time}")]
    EdgeLeak { time: f64, probability: f64 },
}

pub type Result<T> = std::result::Result<T, QuantumError>;
