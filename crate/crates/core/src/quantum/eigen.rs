use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{PotentialField, QuantumError, Result, SimConfig, WaveFunction, HBAR, MASS};

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub energy: f64,
    pub state: WaveFunction,
}

/// Lowest `k` eigenpairs of `H = -ħ²/2m ∂² + V` with the three-point
/// central-difference Laplacian (hard walls just outside the grid).
///
/// States are real, normalised, and signed so their largest-magnitude
/// component is positive.
pub fn eigenstates(
    potential: &PotentialField,
    config: &SimConfig,
    k: usize,
) -> Result<Vec<Eigenpair>> {
    config.validate()?;
    potential.validate(config)?;
    let n = config.grid_points;
    if k == 0 || k >= n {
        return Err(QuantumError::InvalidArgument(format!(
            "requested {k} eigenpairs on a {n}-point grid (need 0 < k < N)"
        )));
    }
    let dx = config.dx();
    let t = HBAR * HBAR / (2.0 * MASS * dx * dx);
    let h = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * t + potential.values[i]
        } else if i + 1 == j || j + 1 == i {
            -t
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = 1.0 / dx.sqrt();
    order
        .into_iter()
        .take(k)
        .map(|col| {
            let v = eig.eigenvectors.column(col);
            let peak = v
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            let sign = if peak < 0.0 { -1.0 } else { 1.0 };
            let amps = v
                .iter()
                .map(|&x| Complex64::new(sign * x * scale, 0.0))
                .collect();
            Ok(Eigenpair {
                energy: eig.eigenvalues[col],
                state: WaveFunction::new(amps, *config)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::fidelity;

    #[test]
    fn harmonic_ladder() {
        let c = SimConfig::default();
        let v = PotentialField::harmonic(&c, 50.0, 0.0);
        let pairs = eigenstates(&v, &c, 3).unwrap();
        for (n, p) in pairs.iter().enumerate() {
            let exact = 50.0 * (n as f64 + 0.5);
            assert!(
                (p.energy - exact).abs() / exact < 5e-3,
                "E{n} = {}",
                p.energy
            );
            assert!((p.state.norm_sqr() - 1.0).abs() < 1e-10);
        }
        assert!(pairs[0].energy <= pairs[1].energy && pairs[1].energy <= pairs[2].energy);
    }

    #[test]
    fn states_are_orthogonal() {
        let c = SimConfig::default();
        let mut v = PotentialField::zeros(&c);
        v.add_gaussian(&c, -0.2, -200.0, 0.06);
        v.add_gaussian(&c, 0.25, -150.0, 0.05);
        let pairs = eigenstates(&v, &c, 4).unwrap();
        for i in 0..4 {
            for j in 0..i {
                let overlap = pairs[i].state.inner(&pairs[j].state).unwrap().norm();
                assert!(overlap < 1e-8, "<{i}|{j}> = {overlap}");
            }
        }
        assert!(fidelity(&pairs[0].state, &pairs[1].state).unwrap() < 1e-10);
    }

    #[test]
    fn k_out_of_range() {
        let c = SimConfig::new(-1.0, 1.0, 16, 1e-4).unwrap();
        let v = PotentialField::zeros(&c);
        assert!(eigenstates(&v, &c, 16).is_err());
        assert!(eigenstates(&v, &c, 0).is_err());
        assert_eq!(eigenstates(&v, &c, 15).unwrap().len(), 15);
    }
}
