//! Step-size and perturbation sequences `a_k = a₀ / k^γ`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VqeError};

/// `a_k = a₀ / k^γ` for iterations `k ≥ 1`; `γ = 0` is a constant sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub a0: f64,
    #[serde(default)]
    pub exponent: f64,
}

impl Schedule {
    pub const fn constant(value: f64) -> Self {
        Self { a0: value, exponent: 0.0 }
    }

    pub const fn power(a0: f64, exponent: f64) -> Self {
        Self { a0, exponent }
    }

    /// Value at iteration `k`, counted from 1.
    pub fn at(&self, k: usize) -> f64 {
        if self.exponent == 0.0 {
            self.a0
        } else {
            self.a0 / (k.max(1) as f64).powf(self.exponent)
        }
    }

    pub(crate) fn validate(&self, what: &str, allow_zero: bool) -> Result<()> {
        let ok = self.a0.is_finite()
            && self.exponent.is_finite()
            && self.exponent >= 0.0
            && (self.a0 > 0.0 || (allow_zero && self.a0 == 0.0));
        if ok {
            Ok(())
        } else {
            Err(VqeError::config(format!("invalid {what} schedule a0 = {}, exponent = {}", self.a0, self.exponent)))
        }
    }
}
