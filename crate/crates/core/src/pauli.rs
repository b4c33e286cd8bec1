//! Pauli strings and real-weighted Pauli sums.
//!
//! String labels are written with qubit 0 leftmost: `"XI"` is `X` on qubit 0.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VqeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-site Paulis, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    pub fn identity(n: usize) -> Self {
        Self { ops: vec![Pauli::I; n] }
    }

    /// Identity everywhere except the listed `(site, op)` pairs.
    pub fn from_sparse(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut ops = vec![Pauli::I; n];
        for &(site, op) in sites {
            if site >= n {
                return Err(VqeError::usage(format!("site {site} out of range for {n} qubits")));
            }
            ops[site] = op;
        }
        Ok(Self { ops })
    }

    pub fn parse(label: &str) -> Result<Self> {
        label
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| VqeError::usage(format!("invalid Pauli letter {c:?} in {label:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    fn mask(&self, pred: impl Fn(Pauli) -> bool) -> usize {
        self.ops.iter().enumerate().filter(|(_, &p)| pred(p)).fold(0, |m, (i, _)| m | (1 << i))
    }

    /// `(flip_mask, sign_mask, phase)` such that
    /// `P|n⟩ = phase · (-1)^{popcount(n & sign_mask)} |n ⊕ flip_mask⟩`.
    pub fn action(&self) -> (usize, usize, Complex64) {
        let flip = self.mask(|p| matches!(p, Pauli::X | Pauli::Y));
        let sign = self.mask(|p| matches!(p, Pauli::Z | Pauli::Y));
        let n_y = self.ops.iter().filter(|&&p| p == Pauli::Y).count();
        let phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        (flip, sign, phase)
    }

    /// True when every non-identity letter equals `letter`.
    pub fn only(&self, letter: Pauli) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I || p == letter)
    }

    /// Product `self · other` as `(phase, string)`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.len() != other.len() {
            return Err(VqeError::usage("Pauli strings of different length"));
        }
        let mut phase = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                use Pauli::*;
                let (f, p) = match (a, b) {
                    (I, p) | (p, I) => (Complex64::new(1.0, 0.0), p),
                    (X, X) | (Y, Y) | (Z, Z) => (Complex64::new(1.0, 0.0), I),
                    (X, Y) => (i, Z),
                    (Y, X) => (-i, Z),
                    (Y, Z) => (i, X),
                    (Z, Y) => (-i, X),
                    (Z, X) => (i, Y),
                    (X, Z) => (-i, Y),
                };
                phase *= f;
                p
            })
            .collect();
        Ok((phase, PauliString::new(ops)))
    }

    /// Whether the string anticommutes with `X^{⊗N}`: an odd number of
    /// `Y`/`Z` letters.
    pub fn anticommutes_with_global_flip(&self) -> bool {
        self.ops.iter().filter(|&&p| matches!(p, Pauli::Y | Pauli::Z)).count() % 2 == 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ops.iter().try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

/// Real-weighted sum of Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (w, p) in &terms {
            if p.len() != n_qubits {
                return Err(VqeError::usage(format!("term {p} has {} sites, expected {n_qubits}", p.len())));
            }
            if !w.is_finite() {
                return Err(VqeError::usage(format!("non-finite weight {w} on term {p}")));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn from_labels(n_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let terms = terms.iter().map(|&(w, l)| Ok((w, PauliString::parse(l)?))).collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, weight: f64, string: PauliString) -> Result<()> {
        if string.len() != self.n_qubits || !weight.is_finite() {
            return Err(VqeError::usage(format!("cannot add term {weight} {string}")));
        }
        self.terms.push((weight, string));
        Ok(())
    }

    /// Linear combination `a·self + b·other`, terms concatenated.
    pub fn combine(&self, a: f64, other: &PauliSum, b: f64) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(VqeError::usage("cannot combine observables on different registers"));
        }
        let terms = self
            .terms
            .iter()
            .map(|(w, p)| (a * w, p.clone()))
            .chain(other.terms.iter().map(|(w, p)| (b * w, p.clone())))
            .collect();
        PauliSum::new(self.n_qubits, terms)
    }

    /// `out = H v` without materializing `H`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = 1usize << self.n_qubits;
        if v.len() != dim || out.len() != dim {
            return Err(VqeError::usage("vector length does not match the observable"));
        }
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (w, p) in &self.terms {
            let (flip, sign_mask, phase) = p.action();
            let coeff = phase * *w;
            for (n, &a) in v.iter().enumerate() {
                let s = if (n & sign_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                out[n ^ flip] += a * coeff * s;
            }
        }
        Ok(())
    }

    /// Dense `2^N × 2^N` matrix. Only sensible for small registers.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > 14 {
            return Err(VqeError::Resource(format!("dense matrix of a {}-qubit observable", self.n_qubits)));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, p) in &self.terms {
            let (flip, sign_mask, phase) = p.action();
            for n in 0..dim {
                let s = if (n & sign_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(n ^ flip, n)] += phase * (*w * s);
            }
        }
        Ok(m)
    }

    /// True when no term contains `X` or `Y`, i.e. `H` is diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.only(Pauli::Z))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (w, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{w}*{p}")?;
        }
        Ok(())
    }
}
