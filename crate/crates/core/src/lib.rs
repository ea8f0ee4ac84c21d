//! Simulation, scoring and optimisation engine for a tweezer-transport game.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: grid, wave functions, ground/excited states, real-time
//!   split-operator propagation, fidelity.
//! - [`control`]: control paths, the editing toolkit and the binary play
//!   record format.
//! - [`level`]: the level file format, built-in catalog and play scoring.
//! - [`optimize`]: local, stochastic and human-seeded hybrid optimisers and
//!   the convergence comparison.

// `!(x > 0.0)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod level;
pub mod optimize;
pub mod quantum;
