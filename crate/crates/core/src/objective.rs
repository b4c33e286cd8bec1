//! Objective functions with evaluation counters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::CircuitTemplate;
use crate::error::{Result, VqeError};
use crate::ising::{estimate_expectation_shots, measurement_groups};
use crate::pauli::PauliSum;

/// How an energy is obtained from a bound circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluator {
    /// Exact statevector expectation.
    #[default]
    Exact,
    /// Sampled estimate with this many shots per measurement group.
    Shots(usize),
}

pub trait Objective {
    fn n_params(&self) -> usize;

    /// Evaluates `f(θ)` and increments the evaluation counter.
    fn evaluate(&mut self, theta: &[f64]) -> Result<f64>;

    fn evaluations(&self) -> usize;
}

/// `f(θ) = ⟨ψ(θ)|H|ψ(θ)⟩` for a circuit template and a Pauli observable.
#[derive(Debug, Clone)]
pub struct EnergyObjective<'a> {
    template: &'a CircuitTemplate,
    hamiltonian: &'a PauliSum,
    evaluator: Evaluator,
    shot_rng: ChaCha8Rng,
    evals: usize,
}

impl<'a> EnergyObjective<'a> {
    pub fn new(template: &'a CircuitTemplate, hamiltonian: &'a PauliSum) -> Result<Self> {
        Self::with_evaluator(template, hamiltonian, Evaluator::Exact, 0)
    }

    /// `shot_seed` drives the sampling stream in shot mode and is ignored otherwise.
    pub fn with_evaluator(
        template: &'a CircuitTemplate,
        hamiltonian: &'a PauliSum,
        evaluator: Evaluator,
        shot_seed: u64,
    ) -> Result<Self> {
        if template.n_qubits() != hamiltonian.n_qubits() {
            return Err(VqeError::usage(format!(
                "{}-qubit template with a {}-qubit Hamiltonian",
                template.n_qubits(),
                hamiltonian.n_qubits()
            )));
        }
        if let Evaluator::Shots(shots) = evaluator {
            if shots == 0 {
                return Err(VqeError::config("shot count must be positive"));
            }
            measurement_groups(hamiltonian)?;
        }
        Ok(Self { template, hamiltonian, evaluator, shot_rng: ChaCha8Rng::seed_from_u64(shot_seed), evals: 0 })
    }

    pub fn template(&self) -> &'a CircuitTemplate {
        self.template
    }

    pub fn hamiltonian(&self) -> &'a PauliSum {
        self.hamiltonian
    }

    pub fn evaluator(&self) -> Evaluator {
        self.evaluator
    }

    /// Exact energy, not counted. Used for traces and diagnostics.
    pub fn exact_energy(&self, theta: &[f64]) -> Result<f64> {
        self.template.bind(theta)?.expectation(self.hamiltonian)
    }
}

impl Objective for EnergyObjective<'_> {
    fn n_params(&self) -> usize {
        self.template.n_params()
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<f64> {
        let state = self.template.bind(theta)?;
        self.evals += 1;
        match self.evaluator {
            Evaluator::Exact => state.expectation(self.hamiltonian),
            Evaluator::Shots(shots) => estimate_expectation_shots(&state, self.hamiltonian, shots, &mut self.shot_rng),
        }
    }

    fn evaluations(&self) -> usize {
        self.evals
    }
}

/// Wraps a closure as a counted objective.
pub struct FnObjective<F> {
    n_params: usize,
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> FnObjective<F> {
    pub fn new(n_params: usize, f: F) -> Self {
        Self { n_params, f, evals: 0 }
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.n_params {
            return Err(VqeError::usage(format!("expected {} parameters, got {}", self.n_params, theta.len())));
        }
        self.evals += 1;
        Ok((self.f)(theta))
    }

    fn evaluations(&self) -> usize {
        self.evals
    }
}
