use num_complex::Complex64;

use super::spectral::Spectral;
use super::wavefunction::energy_with;
use super::{eigenstates, PotentialField, QuantumError, Result, SimConfig, WaveFunction};

/// Imaginary-time relaxation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateOptions {
    /// Imaginary time step.
    pub dt: f64,
    /// Stop once the per-step relative energy change drops below this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            tol: 1e-10,
            max_iterations: 2_000_000,
        }
    }
}

/// Ground state by imaginary-time split-operator relaxation.
///
/// The starting guess is the lowest finite-difference eigenvector, which puts
/// the relaxation within a few gap times of convergence even for nearly
/// degenerate double wells.
pub fn ground_state(
    potential: &PotentialField,
    config: &SimConfig,
    tol: f64,
) -> Result<WaveFunction> {
    let guess = eigenstates(potential, config, 1)?.remove(0).state;
    let options = GroundStateOptions {
        tol,
        ..GroundStateOptions::default()
    };
    ground_state_from(potential, &guess, options)
}

pub fn ground_state_from(
    potential: &PotentialField,
    guess: &WaveFunction,
    options: GroundStateOptions,
) -> Result<WaveFunction> {
    let config = *guess.config();
    potential.validate(&config)?;
    check_confining(potential)?;
    if !(options.dt > 0.0) || !(options.tol > 0.0) {
        return Err(QuantumError::InvalidArgument(
            "imaginary time step and tolerance must be positive".into(),
        ));
    }

    let mut spectral = Spectral::new(&config);
    let half_v: Vec<f64> = potential
        .values
        .iter()
        .map(|v| (-0.5 * v * options.dt).exp())
        .collect();
    let drift: Vec<f64> = spectral
        .kinetic
        .iter()
        .map(|t| (-t * options.dt).exp())
        .collect();

    let mut psi = guess.clone();
    psi.normalize();
    let mut energy = energy_with(&mut spectral, psi.amplitudes(), &potential.values);

    for _ in 0..options.max_iterations {
        let amps = psi.amplitudes_mut();
        for (z, w) in amps.iter_mut().zip(&half_v) {
            *z *= *w;
        }
        spectral.forward(amps);
        for (z, w) in amps.iter_mut().zip(&drift) {
            *z *= *w;
        }
        spectral.inverse(amps);
        for (z, w) in amps.iter_mut().zip(&half_v) {
            *z *= *w;
        }
        psi.normalize();

        let next = energy_with(&mut spectral, psi.amplitudes(), &potential.values);
        let change = (next - energy).abs();
        energy = next;
        if change <= options.tol * energy.abs().max(1.0) {
            fix_phase(&mut psi);
            return Ok(psi);
        }
    }
    Err(QuantumError::NoConvergence {
        iterations: options.max_iterations,
        last_energy: energy,
    })
}

fn check_confining(potential: &PotentialField) -> Result<()> {
    let n = potential.values.len();
    let far = potential.values[0].min(potential.values[n - 1]);
    if potential.min() < far {
        Ok(())
    } else {
        Err(QuantumError::InvalidArgument(
            "potential is not confining: no well below the far-field value".into(),
        ))
    }
}

/// Rotates the global phase so the largest amplitude is real and positive.
fn fix_phase(psi: &mut WaveFunction) {
    let amps = psi.amplitudes_mut();
    let peak = amps
        .iter()
        .copied()
        .fold(Complex64::new(0.0, 0.0), |acc, z| {
            if z.norm_sqr() > acc.norm_sqr() {
                z
            } else {
                acc
            }
        });
    if peak.norm() > 0.0 {
        let rot = peak.conj() / peak.norm();
        for z in amps.iter_mut() {
            *z *= rot;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fidelity, tweezer_potential, ControlSample, TweezerSpec};

    #[test]
    fn harmonic_ground_energy() {
        let c = SimConfig::default();
        let v = PotentialField::harmonic(&c, 50.0, 0.0);
        let psi = ground_state(&v, &c, 1e-10).unwrap();
        let e = psi.energy(&v).unwrap();
        assert!((e - 25.0).abs() / 25.0 < 1e-3, "E0 = {e}");
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_well_matches_eigensolver() {
        let c = SimConfig::default();
        let v = tweezer_potential(
            &TweezerSpec::default(),
            &ControlSample::new(0.0, 0.0, 160.0),
            &c,
        )
        .unwrap();
        let psi = ground_state(&v, &c, 1e-10).unwrap();
        let e = psi.energy(&v).unwrap();
        let e0 = eigenstates(&v, &c, 1).unwrap()[0].energy;
        // the two kinetic discretisations differ at O(dx²)
        assert!((e - e0).abs() / e0.abs() < 1e-3, "{e} vs {e0}");
    }

    #[test]
    fn fixed_point_when_refed() {
        let c = SimConfig::default();
        let v = PotentialField::harmonic(&c, 50.0, 0.1);
        let psi = ground_state(&v, &c, 1e-10).unwrap();
        let again = ground_state_from(&v, &psi, GroundStateOptions::default()).unwrap();
        assert!(fidelity(&psi, &again).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn flat_potential_is_rejected() {
        let c = SimConfig::default();
        let v = PotentialField::zeros(&c);
        assert!(matches!(
            ground_state(&v, &c, 1e-10),
            Err(QuantumError::InvalidArgument(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_last_energy() {
        let c = SimConfig::default();
        let v = PotentialField::harmonic(&c, 50.0, 0.0);
        let guess = WaveFunction::gaussian(c, 0.3, 0.05, 0.0).unwrap();
        let opts = GroundStateOptions {
            max_iterations: 3,
            ..GroundStateOptions::default()
        };
        match ground_state_from(&v, &guess, opts) {
            Err(QuantumError::NoConvergence {
                iterations,
                last_energy,
            }) => {
                assert_eq!(iterations, 3);
                assert!(last_energy > 25.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
