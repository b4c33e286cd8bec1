//! Gradient estimators: central finite differences, SPSA and the
//! parameter-shift rule.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VqeError};
use crate::objective::{EnergyObjective, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GradientMethod {
    #[serde(rename = "FD")]
    FiniteDifference,
    #[serde(rename = "SPSA")]
    Spsa,
    #[serde(rename = "PSR")]
    ParameterShift,
}

impl GradientMethod {
    /// Objective evaluations one estimate costs for `p` parameters.
    pub fn cost(self, p: usize) -> usize {
        match self {
            GradientMethod::FiniteDifference | GradientMethod::ParameterShift => 2 * p,
            GradientMethod::Spsa => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub values: Vec<f64>,
    pub n_evals: usize,
    pub method: GradientMethod,
}

fn shifted(theta: &[f64], i: usize, delta: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    t[i] += delta;
    t
}

fn check_len<O: Objective + ?Sized>(obj: &O, theta: &[f64]) -> Result<()> {
    if theta.len() != obj.n_params() {
        return Err(VqeError::usage(format!("expected {} parameters, got {}", obj.n_params(), theta.len())));
    }
    Ok(())
}

/// `[f(θ+εe_i) - f(θ-εe_i)] / 2ε` for every component.
pub fn grad_fd<O: Objective + ?Sized>(obj: &mut O, theta: &[f64], epsilon: f64) -> Result<GradientEstimate> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(VqeError::config(format!("finite-difference step must be positive, got {epsilon}")));
    }
    check_len(obj, theta)?;
    let values = (0..theta.len())
        .map(|i| {
            let fp = obj.evaluate(&shifted(theta, i, epsilon))?;
            let fm = obj.evaluate(&shifted(theta, i, -epsilon))?;
            Ok((fp - fm) / (2.0 * epsilon))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientEstimate { n_evals: 2 * theta.len(), values, method: GradientMethod::FiniteDifference })
}

/// Draws a Rademacher vector with i.i.d. `±1` entries.
pub fn rademacher<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

/// Simultaneous perturbation estimate
/// `[f(θ+sΔ) - f(θ-sΔ)] / (2s) · Δ`, two evaluations for any `p`.
pub fn grad_spsa<O: Objective + ?Sized, R: Rng + ?Sized>(
    obj: &mut O,
    theta: &[f64],
    perturbation: f64,
    rng: &mut R,
) -> Result<GradientEstimate> {
    if !(perturbation > 0.0 && perturbation.is_finite()) {
        return Err(VqeError::config(format!("SPSA perturbation must be positive, got {perturbation}")));
    }
    check_len(obj, theta)?;
    let delta = rademacher(theta.len(), rng);
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + perturbation * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - perturbation * d).collect();
    let diff = (obj.evaluate(&plus)? - obj.evaluate(&minus)?) / (2.0 * perturbation);
    // Δ_i = ±1, so 1/Δ_i = Δ_i
    let values = delta.iter().map(|d| diff * d).collect();
    Ok(GradientEstimate { values, n_evals: 2, method: GradientMethod::Spsa })
}

/// Parameter-shift gradient `½[f(θ + π/2 e_i) - f(θ - π/2 e_i)]`.
///
/// Exact for circuits whose parameters each enter through a single Pauli
/// half-angle rotation, which every [`CircuitTemplate`](crate::ansatz::CircuitTemplate)
/// guarantees.
pub fn grad_psr(obj: &mut EnergyObjective<'_>, theta: &[f64]) -> Result<GradientEstimate> {
    check_len(obj, theta)?;
    let values = (0..theta.len())
        .map(|i| {
            let fp = obj.evaluate(&shifted(theta, i, FRAC_PI_2))?;
            let fm = obj.evaluate(&shifted(theta, i, -FRAC_PI_2))?;
            Ok(0.5 * (fp - fm))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientEstimate { n_evals: 2 * theta.len(), values, method: GradientMethod::ParameterShift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{real_amplitudes, CircuitTemplate, EntanglementScheme, Gate};
    use crate::ising::{build_tim, TimParams};
    use crate::objective::FnObjective;
    use crate::pauli::PauliSum;
    use crate::state::Axis;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn single_ry() -> (CircuitTemplate, PauliSum) {
        let t = CircuitTemplate::new("ry", 1, vec![Gate::Rotation { axis: Axis::Y, qubit: 0, slot: 0 }], vec![0..1])
            .unwrap();
        (t, PauliSum::from_labels(1, &[(1.0, "Z")]).unwrap())
    }

    #[test]
    fn fd_examples() {
        let mut f = FnObjective::new(1, |t: &[f64]| t[0].cos());
        assert_abs_diff_eq!(grad_fd(&mut f, &[0.0], 1e-4).unwrap().values[0], 0.0, epsilon = 1e-8);
        let g = grad_fd(&mut f, &[PI / 2.0], 1e-4).unwrap();
        assert_abs_diff_eq!(g.values[0], -1.0, epsilon = 1e-8);
        assert_eq!(g.n_evals, 2);
        let mut q = FnObjective::new(1, |t: &[f64]| t[0] * t[0]);
        for eps in [0.5, 0.25, 0.125] {
            assert_eq!(grad_fd(&mut q, &[3.0], eps).unwrap().values[0], 6.0);
        }
        assert!(matches!(grad_fd(&mut q, &[3.0], 0.0), Err(VqeError::Config(_))));
        assert!(matches!(grad_fd(&mut q, &[3.0], -1.0), Err(VqeError::Config(_))));
    }

    #[test]
    fn spsa_one_dimensional_collapse() {
        let mut f = FnObjective::new(1, |t: &[f64]| t[0].sin() * 2.0 + t[0] * t[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = 0.05;
        let fd = grad_fd(&mut f, &[0.3], s).unwrap().values[0];
        for _ in 0..10 {
            let g = grad_spsa(&mut f, &[0.3], s, &mut rng).unwrap();
            assert_abs_diff_eq!(g.values[0], fd, epsilon = 1e-14);
            assert_eq!(g.n_evals, 2);
        }
        assert!(grad_spsa(&mut f, &[0.3], 0.0, &mut rng).is_err());
    }

    #[test]
    fn spsa_unbiased_on_linear() {
        let a = [1.5, -0.5, 2.0, 0.25];
        let mut f = FnObjective::new(4, |t: &[f64]| t.iter().zip(&a).map(|(x, c)| x * c).sum());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 10_000;
        let theta = [0.1, 0.2, -0.3, 0.4];
        let samples: Vec<Vec<f64>> = (0..m).map(|_| grad_spsa(&mut f, &theta, 0.1, &mut rng).unwrap().values).collect();
        for i in 0..4 {
            let mean = samples.iter().map(|s| s[i]).sum::<f64>() / m as f64;
            let var = samples.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            let se = (var / m as f64).sqrt();
            assert!((mean - a[i]).abs() < 3.0 * se + 1e-12, "component {i}: {mean} vs {}", a[i]);
        }
    }

    #[test]
    fn spsa_reports_two_evals_for_large_p() {
        let mut f = FnObjective::new(36, |t: &[f64]| t.iter().map(|x| x * x).sum());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = grad_spsa(&mut f, &[0.1; 36], 0.01, &mut rng).unwrap();
        assert_eq!(g.n_evals, 2);
        assert_eq!(f.evaluations(), 2);
    }

    #[test]
    fn psr_single_qubit() {
        let (t, z) = single_ry();
        let mut obj = EnergyObjective::new(&t, &z).unwrap();
        assert_abs_diff_eq!(grad_psr(&mut obj, &[PI / 2.0]).unwrap().values[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grad_psr(&mut obj, &[0.0]).unwrap().values[0], 0.0, epsilon = 1e-12);
        for theta in [-2.0, 0.3, 1.7] {
            assert_abs_diff_eq!(grad_psr(&mut obj, &[theta]).unwrap().values[0], -f64::sin(theta), epsilon = 1e-12);
        }
    }

    #[test]
    fn psr_agrees_with_fd_on_tim() {
        let t = real_amplitudes(4, 1, EntanglementScheme::Linear).unwrap();
        let h = build_tim(&TimParams::ring(4, 1.0, 2.0)).unwrap();
        let mut obj = EnergyObjective::new(&t, &h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let theta = crate::ansatz::initial_parameters(&t, &mut rng);
        let psr = grad_psr(&mut obj, &theta).unwrap();
        assert_eq!(psr.n_evals, 2 * t.n_params());
        let fd = grad_fd(&mut obj, &theta, 1e-5).unwrap();
        for (a, b) in psr.values.iter().zip(&fd.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
        assert_eq!(obj.evaluations(), 4 * t.n_params());
    }
}
