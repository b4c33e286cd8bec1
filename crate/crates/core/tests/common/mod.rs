//! Helpers shared by the integration tests.
#![allow(dead_code, clippy::single_range_in_vec_init)]

use std::f64::consts::PI;

use vqe_lab::ansatz::{AnsatzKind, CircuitTemplate, EntanglementScheme};
use vqe_lab::ising::{build_tim, exact_ground, TimParams};
use vqe_lab::pauli::PauliSum;

/// Ground energy of the periodic TIM ring from its Jordan-Wigner solution.
///
/// The ground state lives in the even-parity sector, whose fermions obey
/// antiperiodic boundary conditions: `k = (2m+1)π/N`.
pub fn free_fermion_energy(n: usize, j: f64, h: f64) -> f64 {
    -(0..n)
        .map(|m| {
            let k = (2 * m + 1) as f64 * PI / n as f64;
            (j * j + h * h - 2.0 * j * h * k.cos()).sqrt()
        })
        .sum::<f64>()
}

pub struct Tim {
    pub template: CircuitTemplate,
    pub hamiltonian: PauliSum,
    pub ground_energy: f64,
}

pub fn tim_problem(n: usize, h: f64, layers: usize, ent: EntanglementScheme) -> Tim {
    let template = AnsatzKind::RealAmplitudes.build(n, layers, ent).unwrap();
    let hamiltonian = build_tim(&TimParams::ring(n, 1.0, h)).unwrap();
    let ground_energy = exact_ground(&hamiltonian).unwrap().ground_energy;
    Tim { template, hamiltonian, ground_energy }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// One `R_y` on one qubit, measured in `Z`: `f(θ) = cos θ`.
pub fn single_ry() -> (CircuitTemplate, PauliSum) {
    use vqe_lab::ansatz::Gate;
    use vqe_lab::state::Axis;
    let t =
        CircuitTemplate::new("ry", 1, vec![Gate::Rotation { axis: Axis::Y, qubit: 0, slot: 0 }], vec![0..1]).unwrap();
    (t, PauliSum::from_labels(1, &[(1.0, "Z")]).unwrap())
}
