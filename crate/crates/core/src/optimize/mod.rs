//! Gradient-descent, natural-gradient and COBYLA drivers producing
//! per-iteration traces.

mod cobyla;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cobyla::{cobyla_minimize, cobyla_minimize_observed, CobylaResult, CobylaSettings};

use crate::ansatz::CircuitTemplate;
use crate::error::{Result, VqeError};
use crate::grad::{grad_fd, grad_psr, grad_spsa, GradientEstimate, GradientMethod};
use crate::metric::{
    metric_bda, metric_qnspsa_sample, qgt_exact, regularize, smooth, FidelityOracle, MetricConfig, MetricKind,
    MetricMatrix,
};
use crate::objective::{EnergyObjective, Evaluator, Objective};
use crate::pauli::PauliSum;
use crate::schedule::Schedule;
use crate::seed;

/// Below this `|E_g|` the relative error falls back to the absolute error.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// Optimizer menu: a gradient estimator paired with a metric, or COBYLA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "COBYLA")]
    Cobyla,
    #[serde(rename = "GD+FD")]
    GdFd,
    #[serde(rename = "GD+SPSA")]
    GdSpsa,
    #[serde(rename = "GD+PSR")]
    GdPsr,
    #[serde(rename = "QNG_exact+PSR")]
    QngExactPsr,
    #[serde(rename = "QNBDA+PSR")]
    QnBdaPsr,
    #[serde(rename = "QNSPSA+SPSA")]
    QnSpsaSpsa,
    #[serde(rename = "QNSPSA+PSR")]
    QnSpsaPsr,
}

/// Source of the metric used to precondition the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSource {
    Euclidean,
    Exact,
    BlockDiagonal,
    Qnspsa,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Cobyla,
        Method::GdFd,
        Method::GdSpsa,
        Method::GdPsr,
        Method::QngExactPsr,
        Method::QnBdaPsr,
        Method::QnSpsaSpsa,
        Method::QnSpsaPsr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cobyla => "COBYLA",
            Method::GdFd => "GD+FD",
            Method::GdSpsa => "GD+SPSA",
            Method::GdPsr => "GD+PSR",
            Method::QngExactPsr => "QNG_exact+PSR",
            Method::QnBdaPsr => "QNBDA+PSR",
            Method::QnSpsaSpsa => "QNSPSA+SPSA",
            Method::QnSpsaPsr => "QNSPSA+PSR",
        }
    }

    /// `None` for the derivative-free COBYLA.
    pub fn gradient(self) -> Option<GradientMethod> {
        match self {
            Method::Cobyla => None,
            Method::GdFd => Some(GradientMethod::FiniteDifference),
            Method::GdSpsa | Method::QnSpsaSpsa => Some(GradientMethod::Spsa),
            Method::GdPsr | Method::QngExactPsr | Method::QnBdaPsr | Method::QnSpsaPsr => {
                Some(GradientMethod::ParameterShift)
            }
        }
    }

    pub fn metric(self) -> MetricSource {
        match self {
            Method::QngExactPsr => MetricSource::Exact,
            Method::QnBdaPsr => MetricSource::BlockDiagonal,
            Method::QnSpsaSpsa | Method::QnSpsaPsr => MetricSource::Qnspsa,
            _ => MetricSource::Euclidean,
        }
    }

    /// Draws random perturbations, so different seeds give different runs
    /// even with an exact evaluator.
    pub fn is_stochastic(self) -> bool {
        self.gradient() == Some(GradientMethod::Spsa) || self.metric() == MetricSource::Qnspsa
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = VqeError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| VqeError::config(format!("unknown method `{s}`")))
    }
}

/// Hyperparameters of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Learning rate `η_k`.
    #[serde(default = "default_eta")]
    pub eta: Schedule,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Finite-difference step; defaults to 1e-6 (exact) or 1e-2 (shots).
    #[serde(default)]
    pub fd_epsilon: Option<f64>,
    /// SPSA gradient perturbation `s_k`.
    #[serde(default = "default_spsa")]
    pub spsa_perturbation: Schedule,
    #[serde(default)]
    pub metric: MetricConfig,
    /// Energy change regarded as stalled.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Consecutive stalled iterations before stopping early.
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default)]
    pub cobyla: CobylaSettings,
    /// Keep `θ_k` in every trace row.
    #[serde(default)]
    pub record_theta: bool,
    /// Seed of the perturbation and shot-sampling streams.
    #[serde(default)]
    pub seed: u64,
}

fn default_eta() -> Schedule {
    Schedule::constant(0.1)
}
fn default_max_iterations() -> usize {
    300
}
fn default_spsa() -> Schedule {
    Schedule::power(0.1, 0.101)
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_patience() -> usize {
    10
}

impl OptimizerConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            eta: default_eta(),
            max_iterations: default_max_iterations(),
            fd_epsilon: None,
            spsa_perturbation: default_spsa(),
            metric: MetricConfig::default(),
            tolerance: default_tolerance(),
            patience: default_patience(),
            cobyla: CobylaSettings::default(),
            record_theta: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(VqeError::config("max_iterations must be at least 1"));
        }
        self.eta.validate("learning-rate", true)?;
        self.spsa_perturbation.validate("SPSA perturbation", false)?;
        self.metric.validate()?;
        self.cobyla.validate()?;
        if let Some(eps) = self.fd_epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(VqeError::config(format!("finite-difference step must be positive, got {eps}")));
            }
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(VqeError::config("tolerance must be non-negative"));
        }
        Ok(())
    }

    fn fd_epsilon_for(&self, evaluator: Evaluator) -> f64 {
        self.fd_epsilon.unwrap_or(match evaluator {
            Evaluator::Exact => 1e-6,
            Evaluator::Shots(_) => 1e-2,
        })
    }
}

/// `θ - η·∇f`.
pub fn step_gd(theta: &[f64], grad: &[f64], eta: f64) -> Result<Vec<f64>> {
    if grad.len() != theta.len() {
        return Err(VqeError::usage(format!("gradient of length {} for {} parameters", grad.len(), theta.len())));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(VqeError::config(format!("learning rate must be non-negative, got {eta}")));
    }
    Ok(theta.iter().zip(grad).map(|(t, g)| t - eta * g).collect())
}

/// `θ - η·g⁺∇f` with the metric's pseudo-inverse (exact, block-diagonal) or
/// inverse (regularized).
pub fn step_qng(theta: &[f64], grad: &[f64], metric: &MetricMatrix, eta: f64) -> Result<Vec<f64>> {
    if !matches!(metric.kind, MetricKind::Exact | MetricKind::Bda | MetricKind::Regularized) {
        return Err(VqeError::usage(format!("{:?} metric cannot precondition a step", metric.kind)));
    }
    let direction = metric.solve(grad)?;
    step_gd(theta, &direction, eta)
}

/// `|E - E_g| / |E_g|`, or `|E - E_g|` when `|E_g|` is below [`RELATIVE_ERROR_FLOOR`].
pub fn relative_error(energy: f64, ground_energy: f64) -> f64 {
    let diff = (energy - ground_energy).abs();
    if ground_energy.abs() < RELATIVE_ERROR_FLOOR {
        diff
    } else {
        diff / ground_energy.abs()
    }
}

/// Circuit, observable, evaluator and reference energy of one VQE run.
#[derive(Debug, Clone, Copy)]
pub struct VqeProblem<'a> {
    pub template: &'a CircuitTemplate,
    pub hamiltonian: &'a PauliSum,
    pub evaluator: Evaluator,
    pub ground_energy: f64,
}

/// One trace row. Counters are cumulative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Exact energy of the current parameters (not counted as an evaluation).
    pub energy: f64,
    pub relative_error: f64,
    pub objective_evals: usize,
    pub fidelity_evals: usize,
    /// State preparations spent on exact or block-diagonal metrics.
    pub metric_circuits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIterations,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub ground_energy: f64,
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
    pub best_energy: f64,
    pub best_theta: Vec<f64>,
    pub final_theta: Vec<f64>,
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("a run records at least its initial point")
    }

    pub fn final_relative_error(&self) -> f64 {
        self.final_row().relative_error
    }

    pub fn failed(&self) -> bool {
        matches!(self.status, RunStatus::Failed(_))
    }
}

struct Recorder<'a> {
    problem: &'a VqeProblem<'a>,
    record_theta: bool,
    rows: Vec<TraceRow>,
    best_energy: f64,
    best_theta: Vec<f64>,
}

impl Recorder<'_> {
    fn push(&mut self, iteration: usize, theta: &[f64], counts: (usize, usize, usize)) -> Result<f64> {
        let energy = self.problem.template.bind(theta)?.expectation(self.problem.hamiltonian)?;
        if !energy.is_finite() {
            return Err(VqeError::Numeric(format!("energy {energy} at iteration {iteration}")));
        }
        if energy < self.best_energy {
            self.best_energy = energy;
            self.best_theta = theta.to_vec();
        }
        self.rows.push(TraceRow {
            iteration,
            energy,
            relative_error: relative_error(energy, self.problem.ground_energy),
            objective_evals: counts.0,
            fidelity_evals: counts.1,
            metric_circuits: counts.2,
            theta: self.record_theta.then(|| theta.to_vec()),
        });
        Ok(energy)
    }
}

/// Runs one optimization from `theta0`.
///
/// Invalid configurations are errors. Numeric failures during the run end
/// it early with [`RunStatus::Failed`] and keep the partial trace.
pub fn run_vqe(problem: &VqeProblem<'_>, config: &OptimizerConfig, theta0: &[f64]) -> Result<RunRecord> {
    config.validate()?;
    problem.template.check_theta(theta0)?;
    if !problem.ground_energy.is_finite() {
        return Err(VqeError::usage("reference ground energy must be finite"));
    }
    let started = Instant::now();
    let mut objective = EnergyObjective::with_evaluator(
        problem.template,
        problem.hamiltonian,
        problem.evaluator,
        seed::derive(config.seed, 0x5407),
    )?;
    let mut rec = Recorder {
        problem,
        record_theta: config.record_theta,
        rows: Vec::new(),
        best_energy: f64::INFINITY,
        best_theta: theta0.to_vec(),
    };
    let mut theta = theta0.to_vec();
    let outcome = match rec.push(0, &theta, (0, 0, 0)) {
        Ok(e0) => {
            if config.method == Method::Cobyla {
                run_cobyla(&mut objective, config, &mut theta, &mut rec)
            } else {
                run_gradient(&mut objective, config, &mut theta, &mut rec, e0)
            }
        }
        Err(e) => Err(e),
    };
    let status = outcome.unwrap_or_else(|e| RunStatus::Failed(e.to_string()));
    Ok(RunRecord {
        method: config.method,
        ground_energy: problem.ground_energy,
        rows: rec.rows,
        status,
        best_energy: rec.best_energy,
        best_theta: rec.best_theta,
        final_theta: theta,
        wall_time: started.elapsed(),
    })
}

fn run_cobyla(
    objective: &mut EnergyObjective<'_>,
    config: &OptimizerConfig,
    theta: &mut Vec<f64>,
    rec: &mut Recorder<'_>,
) -> Result<RunStatus> {
    let max_evals = config.cobyla.max_evals.unwrap_or(config.max_iterations);
    let result = cobyla_minimize_observed(
        objective,
        theta,
        config.cobyla.rho_begin,
        config.cobyla.rho_end,
        max_evals,
        |k, best, _| rec.push(k, best, (k, 0, 0)).map(|_| ()),
    )?;
    *theta = result.theta;
    Ok(if result.converged { RunStatus::Converged } else { RunStatus::MaxIterations })
}

fn run_gradient(
    objective: &mut EnergyObjective<'_>,
    config: &OptimizerConfig,
    theta: &mut Vec<f64>,
    rec: &mut Recorder<'_>,
    e0: f64,
) -> Result<RunStatus> {
    let template = objective.template();
    let p = template.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut oracle = FidelityOracle::new(template);
    let mut metric_circuits = 0;
    let mut smoothed = MetricMatrix::identity_prior(p);
    let fd_epsilon = config.fd_epsilon_for(objective.evaluator());
    let mut previous = e0;
    let mut stalled = 0;

    for k in 1..=config.max_iterations {
        let grad: GradientEstimate = match config.method.gradient() {
            Some(GradientMethod::FiniteDifference) => grad_fd(objective, theta, fd_epsilon)?,
            Some(GradientMethod::Spsa) => grad_spsa(objective, theta, config.spsa_perturbation.at(k), &mut rng)?,
            Some(GradientMethod::ParameterShift) => grad_psr(objective, theta)?,
            None => unreachable!("COBYLA has its own driver"),
        };
        let eta = config.eta.at(k);
        let next = match config.method.metric() {
            MetricSource::Euclidean => step_gd(theta, &grad.values, eta)?,
            MetricSource::Exact => {
                metric_circuits += p;
                step_qng(theta, &grad.values, &qgt_exact(template, theta)?, eta)?
            }
            MetricSource::BlockDiagonal => {
                let (g, circuits) = metric_bda(template, theta)?;
                metric_circuits += circuits;
                step_qng(theta, &grad.values, &g, eta)?
            }
            MetricSource::Qnspsa => {
                let s = config.metric.perturbation.at(k);
                let sample = metric_qnspsa_sample(&mut oracle, theta, s, k, &mut rng)?;
                let estimate = if config.metric.smoothing {
                    smoothed = smooth(&smoothed, &sample, k)?;
                    &smoothed
                } else {
                    &sample
                };
                step_qng(theta, &grad.values, &regularize(estimate, config.metric.beta)?, eta)?
            }
        };
        if next.iter().any(|x| !x.is_finite()) {
            return Err(VqeError::Numeric(format!("non-finite parameters at iteration {k}")));
        }
        *theta = next;
        let energy = rec.push(k, theta, (objective.evaluations(), oracle.evaluations(), metric_circuits))?;
        if (energy - previous).abs() < config.tolerance {
            stalled += 1;
            if stalled >= config.patience {
                return Ok(RunStatus::Converged);
            }
        } else {
            stalled = 0;
        }
        previous = energy;
    }
    Ok(RunStatus::MaxIterations)
}
