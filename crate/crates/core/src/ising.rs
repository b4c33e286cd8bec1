//! Transverse-field Ising Hamiltonian, its two-basis measurement scheme,
//! the exact ground-state oracle and the symmetry diagnostics.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VqeError};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::{Axis, Statevector};

/// Largest register the ground-state oracle will handle.
pub const MAX_ORACLE_QUBITS: usize = 14;

/// Eigenvalues within this absolute distance of `E_g` count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Registers up to this size are diagonalized densely; larger ones use Lanczos.
const DENSE_LIMIT_QUBITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Periodic chain: bond `(N-1, 0)` included.
    #[default]
    Ring,
    Open,
}

impl std::str::FromStr for Boundary {
    type Err = VqeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(Boundary::Ring),
            "open" => Ok(Boundary::Open),
            _ => Err(VqeError::config(format!("unknown boundary {s:?}, expected ring|open"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimParams {
    pub n_spins: usize,
    /// Exchange coupling `J`.
    pub j: f64,
    /// Transverse field `h`.
    pub h: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl TimParams {
    pub fn ring(n_spins: usize, j: f64, h: f64) -> Self {
        Self { n_spins, j, h, boundary: Boundary::Ring }
    }

    pub fn open(n_spins: usize, j: f64, h: f64) -> Self {
        Self { n_spins, j, h, boundary: Boundary::Open }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 2 {
            return Err(VqeError::config(format!("TIM needs at least 2 spins, got {}", self.n_spins)));
        }
        if self.n_spins > crate::state::MAX_QUBITS {
            return Err(VqeError::config(format!("{} spins exceed the simulator cap", self.n_spins)));
        }
        if !self.j.is_finite() || !self.h.is_finite() {
            return Err(VqeError::config("J and h must be finite"));
        }
        Ok(())
    }
}

/// `H = -J Σ Z_{n-1} Z_n - h Σ X_n`, bonds first then fields.
pub fn build_tim(params: &TimParams) -> Result<PauliSum> {
    params.validate()?;
    let n = params.n_spins;
    let n_bonds = match params.boundary {
        Boundary::Ring => n,
        Boundary::Open => n - 1,
    };
    let mut h = PauliSum::empty(n);
    for b in 0..n_bonds {
        let (a, c) = (b, (b + 1) % n);
        h.push(-params.j, PauliString::from_sparse(n, &[(a, Pauli::Z), (c, Pauli::Z)])?)?;
    }
    for site in 0..n {
        h.push(-params.h, PauliString::from_sparse(n, &[(site, Pauli::X)])?)?;
    }
    Ok(h)
}

/// Splits `h` into the terms measured in the computational basis (`{I,Z}`
/// strings) and those measured after rotating every qubit into the X basis.
pub fn measurement_groups(h: &PauliSum) -> Result<(PauliSum, PauliSum)> {
    let mut z_group = PauliSum::empty(h.n_qubits());
    let mut x_group = PauliSum::empty(h.n_qubits());
    for (w, p) in h.terms() {
        if p.only(Pauli::Z) {
            z_group.push(*w, p.clone())?;
        } else if p.only(Pauli::X) {
            x_group.push(*w, p.clone())?;
        } else {
            return Err(VqeError::UnsupportedGrouping(format!("term {p} mixes bases")));
        }
    }
    Ok((z_group, x_group))
}

/// Shot-based estimate of `⟨ψ|h|ψ⟩` using the two measurement groups,
/// `shots` samples per group.
pub fn estimate_expectation_shots<R: Rng + ?Sized>(
    state: &Statevector,
    h: &PauliSum,
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(VqeError::config("shots must be at least 1"));
    }
    let (z_group, x_group) = measurement_groups(h)?;
    let mut total = sampled_parity_sum(state, &z_group, shots, rng)?;
    if !x_group.is_empty() {
        let mut rotated = state.clone();
        for q in 0..rotated.n_qubits() {
            rotated.apply_rotation(Axis::Y, q, -FRAC_PI_2)?;
        }
        total += sampled_parity_sum(&rotated, &x_group, shots, rng)?;
    }
    Ok(total)
}

/// Samples bitstrings from `|C_n|²` and averages `Π (-1)^{q_i}` over the
/// support of every term.
fn sampled_parity_sum<R: Rng + ?Sized>(
    state: &Statevector,
    group: &PauliSum,
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    if group.is_empty() {
        return Ok(0.0);
    }
    let mut cumulative = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let masks: Vec<usize> = group
        .terms()
        .iter()
        .map(|(_, p)| {
            p.ops().iter().enumerate().filter(|(_, &op)| op != Pauli::I).fold(0usize, |m, (i, _)| m | (1 << i))
        })
        .collect();
    let mut sums = vec![0i64; masks.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let outcome = cumulative.partition_point(|&c| c <= u).min(state.dim() - 1);
        for (s, m) in sums.iter_mut().zip(&masks) {
            *s += if (outcome & m).count_ones() % 2 == 0 { 1 } else { -1 };
        }
    }
    Ok(group.terms().iter().zip(&sums).map(|((w, _), &s)| w * s as f64 / shots as f64).sum())
}

/// Ground state data from exact diagonalization.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub ground_energy: f64,
    pub ground_state: Statevector,
    /// Number of eigenvalues within [`DEGENERACY_TOL`] of the ground energy.
    pub degeneracy: usize,
    /// Distance to the next distinct level; infinite when none exists.
    pub gap: f64,
}

/// Lowest eigenpair, degeneracy and gap of `h`.
///
/// Small registers are diagonalized as dense Hermitian matrices. Above
/// eight qubits a matrix-free Lanczos with full reorthogonalization and
/// deflation is used, which returns the same quantities.
pub fn exact_ground(h: &PauliSum) -> Result<ExactSolution> {
    let n = h.n_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(VqeError::Resource(format!(
            "exact diagonalization limited to {MAX_ORACLE_QUBITS} qubits, got {n}"
        )));
    }
    if n <= DENSE_LIMIT_QUBITS {
        exact_ground_dense(h)
    } else {
        exact_ground_lanczos(h)
    }
}

/// Dense diagonalization regardless of size (up to the oracle cap).
pub fn exact_ground_dense(h: &PauliSum) -> Result<ExactSolution> {
    let m = h.to_dense()?;
    let dim = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    if !e0.is_finite() {
        return Err(VqeError::Numeric("non-finite eigenvalue".into()));
    }
    let degeneracy = order.iter().take_while(|&&i| eig.eigenvalues[i] - e0 <= DEGENERACY_TOL).count();
    let gap = order.get(degeneracy).map(|&i| eig.eigenvalues[i] - e0).unwrap_or(f64::INFINITY);
    let amps: Vec<Complex64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let mut ground_state = Statevector::from_amplitudes(h.n_qubits(), amps)?;
    ground_state.normalize()?;
    Ok(ExactSolution { ground_energy: e0, ground_state, degeneracy, gap })
}

fn exact_ground_lanczos(h: &PauliSum) -> Result<ExactSolution> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let mut locked: Vec<Vec<Complex64>> = Vec::new();
    let (e0, v0) = lanczos_lowest(h, &locked, 0)?;
    locked.push(v0.clone());
    let mut degeneracy = 1;
    let mut gap = f64::INFINITY;
    while locked.len() < dim {
        let (e, v) = lanczos_lowest(h, &locked, locked.len() as u64)?;
        if e - e0 <= DEGENERACY_TOL {
            degeneracy += 1;
            locked.push(v);
        } else {
            gap = e - e0;
            break;
        }
    }
    let mut ground_state = Statevector::from_amplitudes(n, v0)?;
    ground_state.normalize()?;
    Ok(ExactSolution { ground_energy: e0, ground_state, degeneracy, gap })
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn project_out(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for b in basis {
        let c = dot(b, w);
        w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest eigenpair of `h` restricted to the orthogonal complement of `locked`.
fn lanczos_lowest(h: &PauliSum, locked: &[Vec<Complex64>], stream: u64) -> Result<(f64, Vec<Complex64>)> {
    let dim = 1usize << h.n_qubits();
    let max_krylov = (dim - locked.len()).min(400);
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_1a2c_u64 ^ stream);
    let mut v: Vec<Complex64> =
        (0..dim).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    project_out(&mut v, locked);
    project_out(&mut v, locked);
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut best: Option<(f64, Vec<f64>)> = None;

    for j in 0..max_krylov {
        h.apply(&basis[j], &mut w)?;
        project_out(&mut w, locked);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // full reorthogonalization, applied twice for stability
        project_out(&mut w, &basis);
        project_out(&mut w, &basis);
        project_out(&mut w, locked);
        let b = norm(&w);

        let m = alpha.len();
        let check = m == max_krylov || b < 1e-12 || m.is_multiple_of(8);
        if check {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (imin, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .ok_or_else(|| VqeError::Numeric("empty Krylov space".into()))?;
            let y: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
            let residual = b * y[m - 1].abs();
            best = Some((theta, y));
            if residual < 1e-11 * theta.abs().max(1.0) || b < 1e-12 || m == max_krylov {
                break;
            }
        }
        beta.push(b);
        let next: Vec<Complex64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }

    let (theta, y) = best.ok_or_else(|| VqeError::Numeric("Lanczos produced no Ritz pair".into()))?;
    let mut x = vec![Complex64::new(0.0, 0.0); dim];
    for (yi, vi) in y.iter().zip(&basis) {
        x.iter_mut().zip(vi).for_each(|(xa, va)| *xa += va * *yi);
    }
    let nx = norm(&x);
    x.iter_mut().for_each(|a| *a /= nx);
    if !theta.is_finite() {
        return Err(VqeError::Numeric("non-finite Ritz value".into()));
    }
    Ok((theta, x))
}

/// Frobenius norm of the commutator `[X^{⊗N}, h]`, evaluated exactly in the
/// Pauli algebra. Strings with an odd number of `Y`/`Z` letters anticommute
/// with the global flip and contribute `2 w X^{⊗N} P`; distinct Pauli strings
/// are orthogonal with squared norm `2^N`.
pub fn check_spinflip_symmetry(h: &PauliSum) -> Result<f64> {
    let n = h.n_qubits();
    let flip = PauliString::new(vec![Pauli::X; n]);
    let mut coeffs: HashMap<PauliString, Complex64> = HashMap::new();
    for (w, p) in h.terms() {
        if p.anticommutes_with_global_flip() {
            let (phase, s) = flip.multiply(p)?;
            *coeffs.entry(s).or_default() += phase * (2.0 * w);
        }
    }
    let sq = coeffs.values().fold(0.0, |acc, c| acc + c.norm_sqr());
    Ok((sq * (1u64 << n) as f64).sqrt())
}

/// Real-representation and spin-flip diagnostics of a state's coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientReport {
    /// Largest `|Im C_n|` after the global phase is removed.
    pub max_real_angle_deviation: f64,
    /// `max_n |C_n - s C_{2^N-1-n}|` for the better sign `s`.
    pub max_spinflip_mismatch: f64,
    pub sign: i8,
}

/// Removes the global phase (largest-magnitude amplitude made real positive)
/// and checks `C_n ∈ ℝ` and `C_n = ±C_{2^N-1-n}`.
pub fn check_coefficient_structure(state: &Statevector) -> CoefficientReport {
    let amps = state.amplitudes();
    let anchor =
        amps.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap_or(Complex64::new(1.0, 0.0));
    let rot = if anchor.norm() > 0.0 { anchor.conj() / anchor.norm() } else { Complex64::new(1.0, 0.0) };
    let fixed: Vec<Complex64> = amps.iter().map(|a| a * rot).collect();
    let max_imag = fixed.iter().map(|a| a.im.abs()).fold(0.0, f64::max);
    let last = fixed.len() - 1;
    let mismatch = |s: f64| fixed.iter().enumerate().map(|(i, a)| (a - fixed[last - i] * s).norm()).fold(0.0, f64::max);
    let (plus, minus) = (mismatch(1.0), mismatch(-1.0));
    let (max_spinflip_mismatch, sign) = if minus < plus { (minus, -1) } else { (plus, 1) };
    CoefficientReport { max_real_angle_deviation: max_imag, max_spinflip_mismatch, sign }
}

/// Real degrees of freedom of an `N`-qubit state before and after using the
/// real representation and the spin-flip structure: `2^{N+1}-2 → 2^{N-1}-1`.
pub fn dof_counts(n_spins: usize) -> Result<(u64, u64)> {
    if !(1..=62).contains(&n_spins) {
        return Err(VqeError::config(format!("n_spins must lie in 1..=62, got {n_spins}")));
    }
    Ok(((1u64 << (n_spins + 1)) - 2, (1u64 << (n_spins - 1)) - 1))
}

/// `(2^{N-1} - 1)/N - 1`: the layer count at which a RealAmplitudes ansatz
/// has as many parameters as the reduced degrees of freedom.
pub fn layer_lower_bound(n_spins: usize) -> Result<f64> {
    let (_, reduced) = dof_counts(n_spins)?;
    Ok(reduced as f64 / n_spins as f64 - 1.0)
}
