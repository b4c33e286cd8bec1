//! Dense statevector simulation.
//!
//! Basis index convention: qubit `i` is bit `i` of the basis index, qubit 0
//! being the least significant bit. Rotations follow the half-angle
//! convention `R_a(θ) = exp(-i θ σ_a / 2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VqeError};
use crate::pauli::{PauliString, PauliSum};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Rotation axis of a single-qubit Pauli rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(VqeError::config(format!("n_qubits must lie in 1..={MAX_QUBITS}, got {n_qubits}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The vector is taken as-is, no normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(VqeError::config(format!("n_qubits must lie in 1..={MAX_QUBITS}, got {n_qubits}")));
        }
        if amps.len() != 1 << n_qubits {
            return Err(VqeError::usage(format!(
                "expected {} amplitudes for {n_qubits} qubits, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero_state(n_qubits)?;
        if index >= state.dim() {
            return Err(VqeError::usage(format!("basis index {index} out of range")));
        }
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(VqeError::Numeric("cannot normalize a zero or non-finite state".into()));
        }
        let inv = 1.0 / norm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(VqeError::usage(format!("qubit {qubit} out of range for {} qubits", self.n_qubits)));
        }
        Ok(())
    }

    /// Applies `exp(-i angle σ_axis / 2)` to `qubit` in place.
    pub fn apply_rotation(&mut self, axis: Axis, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        if !angle.is_finite() {
            return Err(VqeError::usage(format!("rotation angle must be finite, got {angle}")));
        }
        let (s, c) = (angle / 2.0).sin_cos();
        let stride = 1usize << qubit;
        match axis {
            Axis::Y => {
                // [[c, -s], [s, c]] is real, so skip the complex matrix product
                for_each_pair(&mut self.amps, stride, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c - x1 * s;
                    *a1 = x0 * s + x1 * c;
                });
            }
            Axis::X => {
                let mis = Complex64::new(0.0, -s);
                for_each_pair(&mut self.amps, stride, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c + x1 * mis;
                    *a1 = x0 * mis + x1 * c;
                });
            }
            Axis::Z => {
                let p0 = Complex64::new(c, -s);
                let p1 = Complex64::new(c, s);
                for_each_pair(&mut self.amps, stride, |a0, a1| {
                    *a0 *= p0;
                    *a1 *= p1;
                });
            }
        }
        Ok(())
    }

    /// Multiplies by `-i σ_axis / 2` on `qubit`: the derivative of the
    /// rotation generator, inserted when building derivative states.
    pub fn apply_generator(&mut self, axis: Axis, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        let half = 0.5;
        match axis {
            // -i/2 X
            Axis::X => for_each_pair(&mut self.amps, stride, |a0, a1| {
                let (x0, x1) = (*a0, *a1);
                *a0 = Complex64::new(x1.im, -x1.re) * half;
                *a1 = Complex64::new(x0.im, -x0.re) * half;
            }),
            // -i/2 Y = -i/2 [[0, -i], [i, 0]] = 1/2 [[0, -1], [1, 0]]
            Axis::Y => for_each_pair(&mut self.amps, stride, |a0, a1| {
                let (x0, x1) = (*a0, *a1);
                *a0 = -x1 * half;
                *a1 = x0 * half;
            }),
            Axis::Z => for_each_pair(&mut self.amps, stride, |a0, a1| {
                *a0 = Complex64::new(a0.im, -a0.re) * half;
                *a1 = Complex64::new(-a1.im, a1.re) * half;
            }),
        }
        Ok(())
    }

    /// Flips the target bit of every basis state whose control bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(VqeError::usage(format!("CNOT control and target must differ, both are {control}")));
        }
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// `out = P |self⟩` for a Pauli string `P`.
    pub fn apply_pauli_string(&self, pauli: &PauliString, out: &mut [Complex64]) -> Result<()> {
        if pauli.len() != self.n_qubits || out.len() != self.amps.len() {
            return Err(VqeError::usage("Pauli string size does not match the state"));
        }
        let (flip, sign_mask, phase) = pauli.action();
        for (n, &a) in self.amps.iter().enumerate() {
            let sign = if (n & sign_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[n ^ flip] = a * phase * sign;
        }
        Ok(())
    }

    /// `Σ_n conj(self_n) · other_n`.
    pub fn inner_product(&self, other: &Statevector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(VqeError::usage(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `⟨ψ|P|ψ⟩` for a single Pauli string, without allocating.
    pub fn pauli_expectation(&self, pauli: &PauliString) -> Result<f64> {
        if pauli.len() != self.n_qubits {
            return Err(VqeError::usage(format!(
                "{}-qubit Pauli string applied to a {}-qubit state",
                pauli.len(),
                self.n_qubits
            )));
        }
        let (flip, sign_mask, phase) = pauli.action();
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &a) in self.amps.iter().enumerate() {
            let term = self.amps[n ^ flip].conj() * a;
            if (n & sign_mask).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        Ok((acc * phase).re)
    }

    /// `Σ_i w_i ⟨ψ|P_i|ψ⟩`. Weights are real, so the imaginary residue of
    /// each Hermitian term is dropped.
    pub fn expectation(&self, observable: &PauliSum) -> Result<f64> {
        if observable.n_qubits() != self.n_qubits {
            return Err(VqeError::usage(format!(
                "{}-qubit observable applied to a {}-qubit state",
                observable.n_qubits(),
                self.n_qubits
            )));
        }
        observable.terms().iter().map(|(w, p)| Ok(w * self.pauli_expectation(p)?)).sum()
    }

    /// Probabilities `|C_n|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Visits every amplitude pair `(i, i + stride)` with bit `stride` clear in `i`.
#[inline]
fn for_each_pair<F>(amps: &mut [Complex64], stride: usize, mut f: F)
where
    F: FnMut(&mut Complex64, &mut Complex64),
{
    for chunk in amps.chunks_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_state_shapes() {
        assert_eq!(Statevector::zero_state(1).unwrap().amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(
            Statevector::zero_state(2).unwrap().amplitudes(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        let s = Statevector::zero_state(12).unwrap();
        assert_eq!(s.dim(), 4096);
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(matches!(Statevector::zero_state(0), Err(VqeError::Config(_))));
        assert!(matches!(Statevector::zero_state(25), Err(VqeError::Config(_))));
    }

    #[test]
    fn rotation_examples() {
        let mut s = Statevector::zero_state(1).unwrap();
        s.apply_rotation(Axis::Y, 0, PI).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-15);

        let theta = 0.7;
        let mut s = Statevector::zero_state(1).unwrap();
        s.apply_rotation(Axis::Z, 0, theta).unwrap();
        let expected = Complex64::from_polar(1.0, -theta / 2.0);
        assert_abs_diff_eq!((s.amplitudes()[0] - expected).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(s.amplitudes()[1], c(0.0, 0.0));

        let mut s = Statevector::zero_state(1).unwrap();
        s.apply_rotation(Axis::Y, 0, FRAC_PI_2).unwrap();
        let h = 2f64.sqrt() / 2.0;
        assert_abs_diff_eq!(s.amplitudes()[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, h, epsilon = 1e-15);

        assert!(matches!(s.apply_rotation(Axis::X, 1, 0.1), Err(VqeError::Usage(_))));
    }

    #[test]
    fn rx_matches_matrix() {
        let theta = 1.3;
        let mut s = Statevector::zero_state(1).unwrap();
        s.apply_rotation(Axis::X, 0, theta).unwrap();
        assert_abs_diff_eq!((s.amplitudes()[0] - c((theta / 2.0).cos(), 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((s.amplitudes()[1] - c(0.0, -(theta / 2.0).sin())).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn cnot_examples() {
        // |10⟩ in ket notation (qubit 0 = 1) is index 1
        let mut s = Statevector::basis_state(2, 0b01).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes()[0b11], c(1.0, 0.0));

        let mut s = Statevector::zero_state(2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));

        let h = 2f64.sqrt() / 2.0;
        let mut s = Statevector::from_amplitudes(2, vec![c(h, 0.0), c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes(), &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);

        assert!(matches!(s.apply_cnot(1, 1), Err(VqeError::Usage(_))));
    }

    #[test]
    fn inner_product_examples() {
        let zero = Statevector::zero_state(1).unwrap();
        let one = Statevector::basis_state(1, 1).unwrap();
        assert_eq!(zero.inner_product(&zero).unwrap(), c(1.0, 0.0));
        assert_eq!(zero.inner_product(&one).unwrap(), c(0.0, 0.0));
        let mut r = zero.clone();
        r.apply_rotation(Axis::Y, 0, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(zero.inner_product(&r).unwrap().re, (PI / 4.0).cos(), epsilon = 1e-15);
        let two = Statevector::zero_state(2).unwrap();
        assert!(matches!(zero.inner_product(&two), Err(VqeError::Usage(_))));
    }

    #[test]
    fn expectation_examples() {
        let z = PauliSum::from_labels(1, &[(1.0, "Z")]).unwrap();
        let x = PauliSum::from_labels(1, &[(1.0, "X")]).unwrap();
        let zero = Statevector::zero_state(1).unwrap();
        assert_eq!(zero.expectation(&z).unwrap(), 1.0);
        assert_eq!(zero.expectation(&x).unwrap(), 0.0);
        for theta in [0.0, 0.4, 1.9, -2.8] {
            let mut s = zero.clone();
            s.apply_rotation(Axis::Y, 0, theta).unwrap();
            assert_abs_diff_eq!(s.expectation(&z).unwrap(), theta.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn generator_is_derivative_of_rotation() {
        // d/dθ R(θ)|ψ⟩ at θ=0 equals (-iσ/2)|ψ⟩; compare with a central difference.
        let mut base = Statevector::zero_state(2).unwrap();
        base.apply_rotation(Axis::Y, 0, 0.4).unwrap();
        base.apply_rotation(Axis::X, 1, 1.1).unwrap();
        base.apply_cnot(0, 1).unwrap();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let h = 1e-6;
            let mut plus = base.clone();
            plus.apply_rotation(axis, 1, h).unwrap();
            let mut minus = base.clone();
            minus.apply_rotation(axis, 1, -h).unwrap();
            let mut gen = base.clone();
            gen.apply_generator(axis, 1).unwrap();
            for i in 0..4 {
                let fd = (plus.amplitudes()[i] - minus.amplitudes()[i]) / (2.0 * h);
                assert_abs_diff_eq!((fd - gen.amplitudes()[i]).norm(), 0.0, epsilon = 1e-9);
            }
        }
    }
}
