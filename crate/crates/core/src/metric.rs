//! Quantum geometric metrics for natural-gradient updates.
//!
//! Four estimators of the Fubini-Study metric are provided: the exact
//! tensor from derivative states, its block-diagonal restriction to
//! commuting parameter layers, and the stochastic rank-2 estimate built from
//! four state fidelities, followed by running-mean smoothing and the
//! `|H| + β𝟙` regularization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::CircuitTemplate;
use crate::error::{Result, VqeError};
use crate::grad::rademacher;
use crate::pauli::{Pauli, PauliString};
use crate::schedule::Schedule;
use crate::state::Axis;

/// Eigenvalues below this fraction of the largest one are dropped by the
/// pseudo-inverse.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-10;

/// Fidelity evaluations consumed by one QN-SPSA metric sample.
pub const QNSPSA_FIDELITY_EVALS: usize = 4;

/// Settings of the QN-SPSA metric pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// Regularizer `β` in `|H̃| + β𝟙`.
    pub beta: f64,
    /// Fidelity perturbation magnitudes `s_k`.
    pub perturbation: Schedule,
    /// Running-mean smoothing of the raw samples.
    pub smoothing: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { beta: 0.01, perturbation: Schedule::constant(0.01), smoothing: true }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(VqeError::config(format!("metric β must be positive, got {}", self.beta)));
        }
        self.perturbation.validate("metric perturbation", false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Exact,
    Bda,
    QnspsaRaw,
    Smoothed,
    Regularized,
}

/// Real symmetric `p × p` metric with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    pub data: DMatrix<f64>,
    pub kind: MetricKind,
    /// Optimizer iteration the matrix belongs to (raw and smoothed kinds).
    pub iteration: usize,
}

impl MetricMatrix {
    pub fn new(data: DMatrix<f64>, kind: MetricKind, iteration: usize) -> Result<Self> {
        if !data.is_square() {
            return Err(VqeError::usage("metric must be square"));
        }
        Ok(Self { data, kind, iteration })
    }

    /// `H̃⁰ = 𝟙`, the seed of the smoothing recursion.
    pub fn identity_prior(p: usize) -> Self {
        Self { data: DMatrix::identity(p, p), kind: MetricKind::Smoothed, iteration: 0 }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn max_asymmetry(&self) -> f64 {
        (&self.data - self.data.transpose()).abs().max()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = symmetric_eigen(&self.data)?;
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// `g⁺ v`: Cholesky solve for regularized metrics, truncated
    /// eigen-pseudo-inverse otherwise.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(VqeError::usage(format!(
                "vector of length {} against a {}-dimensional metric",
                v.len(),
                self.dim()
            )));
        }
        let rhs = DVector::from_column_slice(v);
        if self.kind == MetricKind::Regularized {
            let chol = self
                .data
                .clone()
                .cholesky()
                .ok_or_else(|| VqeError::Numeric("regularized metric is not positive definite".into()))?;
            return Ok(chol.solve(&rhs).iter().copied().collect());
        }
        let eig = symmetric_eigen(&self.data)?;
        let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let cutoff = PINV_RELATIVE_CUTOFF * lmax;
        let mut out = DVector::zeros(v.len());
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > cutoff {
                let u = eig.eigenvectors.column(k);
                out += u * (u.dot(&rhs) / lambda);
            }
        }
        Ok(out.iter().copied().collect())
    }
}

fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(VqeError::Numeric("metric contains non-finite entries".into()));
    }
    Ok(SymmetricEigen::new(m.clone()))
}

/// Counts state-overlap evaluations `|⟨ψ(θ)|ψ(θ')⟩|²` on one template.
#[derive(Debug, Clone)]
pub struct FidelityOracle<'a> {
    template: &'a CircuitTemplate,
    evals: usize,
}

impl<'a> FidelityOracle<'a> {
    pub fn new(template: &'a CircuitTemplate) -> Self {
        Self { template, evals: 0 }
    }

    pub fn fidelity(&mut self, theta: &[f64], theta2: &[f64]) -> Result<f64> {
        let f = fidelity(self.template, theta, theta2)?;
        self.evals += 1;
        Ok(f)
    }

    pub fn evaluations(&self) -> usize {
        self.evals
    }

    pub fn template(&self) -> &'a CircuitTemplate {
        self.template
    }
}

/// `|⟨ψ(θ)|ψ(θ')⟩|²`.
pub fn fidelity(template: &CircuitTemplate, theta: &[f64], theta2: &[f64]) -> Result<f64> {
    let a = template.bind(theta)?;
    let b = template.bind(theta2)?;
    Ok(a.inner_product(&b)?.norm_sqr())
}

/// `∂_i |ψ(θ)⟩`: the circuit with `-i K_i` inserted after parameter `i`'s gate.
fn derivative_states(template: &CircuitTemplate, theta: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let n_gates = template.gates().len();
    template
        .generators()
        .iter()
        .map(|g| {
            let mut state = crate::state::Statevector::zero_state(template.n_qubits())?;
            template.apply_gates(&mut state, theta, 0..g.gate_index + 1)?;
            state.apply_generator(g.axis, g.qubit)?;
            template.apply_gates(&mut state, theta, g.gate_index + 1..n_gates)?;
            Ok(state.into_amplitudes())
        })
        .collect()
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Exact Fubini-Study metric
/// `g_ij = Re[⟨∂_iψ|∂_jψ⟩ - ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩]`.
pub fn qgt_exact(template: &CircuitTemplate, theta: &[f64]) -> Result<MetricMatrix> {
    template.check_theta(theta)?;
    let p = template.n_params();
    if p > 200 || template.n_qubits() > 14 {
        return Err(VqeError::Resource(format!(
            "exact metric limited to p ≤ 200 and 14 qubits, got p = {p}, {} qubits",
            template.n_qubits()
        )));
    }
    let psi = template.bind(theta)?.into_amplitudes();
    let derivs = derivative_states(template, theta)?;
    let overlaps: Vec<Complex64> = derivs.iter().map(|d| cdot(d, &psi)).collect();
    let mut q = DMatrix::<Complex64>::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = cdot(&derivs[i], &derivs[j]) - overlaps[i] * overlaps[j].conj();
            q[(i, j)] = v;
            q[(j, i)] = v.conj();
        }
    }
    // the Berry curvature σ_ij = Im Q_ij must be antisymmetric
    let curvature_asym = (0..p)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .map(|(i, j)| (q[(i, j)].im + q[(j, i)].im).abs())
        .fold(0.0, f64::max);
    if curvature_asym > 1e-9 {
        return Err(VqeError::Numeric(format!("geometric tensor curvature not antisymmetric ({curvature_asym:e})")));
    }
    let data = q.map(|z| z.re);
    MetricMatrix::new(data, MetricKind::Exact, 0)
}

/// Block-diagonal metric: for each commuting layer `l`, the covariance
/// `⟨K_iK_j⟩ - ⟨K_i⟩⟨K_j⟩` of its generators in the state prepared by the
/// circuit up to that layer. Off-block entries are zero.
///
/// Returns the metric and the number of state preparations used (one per block).
pub fn metric_bda(template: &CircuitTemplate, theta: &[f64]) -> Result<(MetricMatrix, usize)> {
    template.check_theta(theta)?;
    let p = template.n_params();
    let n = template.n_qubits();
    let mut data = DMatrix::<f64>::zeros(p, p);
    let mut state = crate::state::Statevector::zero_state(n)?;
    let mut applied = 0;
    let pauli_of = |axis: Axis| match axis {
        Axis::X => Pauli::X,
        Axis::Y => Pauli::Y,
        Axis::Z => Pauli::Z,
    };
    for (b, block) in template.layer_blocks().iter().enumerate() {
        let start = template.block_start_gate(b);
        template.apply_gates(&mut state, theta, applied..start)?;
        applied = start;
        let gens = &template.generators()[block.clone()];
        let means: Vec<f64> = gens
            .iter()
            .map(|g| {
                let s = PauliString::from_sparse(n, &[(g.qubit, pauli_of(g.axis))])?;
                Ok(0.5 * state.pauli_expectation(&s)?)
            })
            .collect::<Result<_>>()?;
        for (a, ga) in gens.iter().enumerate() {
            for (c, gc) in gens.iter().enumerate().skip(a) {
                let second = if a == c {
                    0.25
                } else {
                    let s =
                        PauliString::from_sparse(n, &[(ga.qubit, pauli_of(ga.axis)), (gc.qubit, pauli_of(gc.axis))])?;
                    0.25 * state.pauli_expectation(&s)?
                };
                let v = second - means[a] * means[c];
                let (i, j) = (block.start + a, block.start + c);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
    }
    Ok((MetricMatrix::new(data, MetricKind::Bda, 0)?, template.layer_blocks().len()))
}

/// One stochastic metric sample from four fidelities.
///
/// With `F(θ') = -½ |⟨ψ(θ')|ψ(θ)⟩|²` and Rademacher directions `Δ¹, Δ²`,
/// `δF = F(θ+sΔ¹+sΔ²) - F(θ+sΔ¹) + F(θ-sΔ¹) - F(θ-sΔ¹+sΔ²)` approximates
/// `2s² Δ¹ᵀ g Δ²`, so `H̄ = δF / (4s²) · (Δ¹Δ²ᵀ + Δ²Δ¹ᵀ)` has expectation
/// `g + O(s²)`.
pub fn metric_qnspsa_sample<R: Rng + ?Sized>(
    oracle: &mut FidelityOracle<'_>,
    theta: &[f64],
    perturbation: f64,
    iteration: usize,
    rng: &mut R,
) -> Result<MetricMatrix> {
    let p = theta.len();
    let d1 = rademacher(p, rng);
    let d2 = rademacher(p, rng);
    metric_qnspsa_sample_with(oracle, theta, perturbation, &d1, &d2, iteration)
}

/// [`metric_qnspsa_sample`] with caller-supplied perturbation directions.
pub fn metric_qnspsa_sample_with(
    oracle: &mut FidelityOracle<'_>,
    theta: &[f64],
    perturbation: f64,
    d1: &[f64],
    d2: &[f64],
    iteration: usize,
) -> Result<MetricMatrix> {
    if !(perturbation > 0.0 && perturbation.is_finite()) {
        return Err(VqeError::config(format!("QN-SPSA perturbation must be positive, got {perturbation}")));
    }
    oracle.template().check_theta(theta)?;
    if d1.len() != theta.len() || d2.len() != theta.len() {
        return Err(VqeError::usage("perturbation directions must match the parameter count"));
    }
    let s = perturbation;
    let point = |a: f64, b: f64| -> Vec<f64> {
        theta.iter().zip(d1.iter().zip(d2)).map(|(t, (x, y))| t + a * s * x + b * s * y).collect()
    };
    let mut f = |target: Vec<f64>| -> Result<f64> { Ok(-0.5 * oracle.fidelity(&target, theta)?) };
    let delta_f = f(point(1.0, 1.0))? - f(point(1.0, 0.0))? + f(point(-1.0, 0.0))? - f(point(-1.0, 1.0))?;
    let scale = delta_f / (4.0 * s * s);
    let u = DVector::from_column_slice(d1);
    let v = DVector::from_column_slice(d2);
    let data = (&u * v.transpose() + &v * u.transpose()) * scale;
    MetricMatrix::new(data, MetricKind::QnspsaRaw, iteration)
}

/// Running mean `H̃^k = k/(k+1) H̃^{k-1} + 1/(k+1) H̄^k`.
pub fn smooth(prev: &MetricMatrix, sample: &MetricMatrix, k: usize) -> Result<MetricMatrix> {
    if k == 0 || prev.iteration + 1 != k {
        return Err(VqeError::usage(format!(
            "smoothing step {k} expects the previous estimate from iteration {}, got {}",
            k.saturating_sub(1),
            prev.iteration
        )));
    }
    if prev.kind != MetricKind::Smoothed || sample.kind != MetricKind::QnspsaRaw {
        return Err(VqeError::usage("smoothing combines a smoothed estimate with a raw sample"));
    }
    if prev.dim() != sample.dim() {
        return Err(VqeError::usage("metric dimensions differ"));
    }
    let kf = k as f64;
    let data = &prev.data * (kf / (kf + 1.0)) + &sample.data * (1.0 / (kf + 1.0));
    MetricMatrix::new(data, MetricKind::Smoothed, k)
}

/// `|H| + β𝟙` with `|H| = V|Λ|Vᵀ`. The result has `λ_min ≥ β`.
pub fn regularize(h: &MetricMatrix, beta: f64) -> Result<MetricMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(VqeError::config(format!("regularization β must be positive, got {beta}")));
    }
    let sym = (&h.data + h.data.transpose()) * 0.5;
    let eig = symmetric_eigen(&sym)?;
    let abs = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::abs));
    let mut data = &eig.eigenvectors * abs * eig.eigenvectors.transpose();
    data = (&data + data.transpose()) * 0.5;
    for i in 0..data.nrows() {
        data[(i, i)] += beta;
    }
    MetricMatrix::new(data, MetricKind::Regularized, h.iteration)
}
