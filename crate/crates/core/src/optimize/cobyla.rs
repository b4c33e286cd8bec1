//! Powell's COBYLA without constraints.
//!
//! The method keeps `p + 1` interpolation points, fits the unique linear
//! model through them and moves along the model's steepest descent to the
//! trust-region boundary `ρ`. Poorly shaped simplices are repaired by
//! geometry steps, and `ρ` halves down to `rho_end` when the model stops
//! predicting progress. Every iteration of the main loop spends exactly one
//! objective evaluation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VqeError};
use crate::objective::Objective;

const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

/// Trust-region radii and evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CobylaSettings {
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Evaluation cap. `None` defers to the optimizer's iteration count.
    pub max_evals: Option<usize>,
}

impl Default for CobylaSettings {
    fn default() -> Self {
        Self { rho_begin: 0.5, rho_end: 1e-6, max_evals: None }
    }
}

impl CobylaSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_end > 0.0 && self.rho_begin > self.rho_end && self.rho_begin.is_finite()) {
            return Err(VqeError::config(format!(
                "COBYLA needs rho_begin > rho_end > 0, got {} and {}",
                self.rho_begin, self.rho_end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CobylaResult {
    pub theta: Vec<f64>,
    pub value: f64,
    pub n_evals: usize,
    /// `ρ` reached `rho_end`. False when the budget ran out first.
    pub converged: bool,
}

/// Minimizes `obj` from `theta0`. See [`cobyla_minimize_observed`].
pub fn cobyla_minimize<O: Objective + ?Sized>(
    obj: &mut O,
    theta0: &[f64],
    rho_begin: f64,
    rho_end: f64,
    max_evals: usize,
) -> Result<CobylaResult> {
    cobyla_minimize_observed(obj, theta0, rho_begin, rho_end, max_evals, |_, _, _| Ok(()))
}

struct Tracker<'o, O: ?Sized, F> {
    obj: &'o mut O,
    observer: F,
    n_evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<O: Objective + ?Sized, F: FnMut(usize, &[f64], f64) -> Result<()>> Tracker<'_, O, F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let f = self.obj.evaluate(x)?;
        if !f.is_finite() {
            return Err(VqeError::Numeric(format!("objective returned {f} at evaluation {}", self.n_evals + 1)));
        }
        self.n_evals += 1;
        if f < self.best_f {
            self.best_f = f;
            self.best_x.copy_from_slice(x);
        }
        (self.observer)(self.n_evals, &self.best_x, self.best_f)?;
        Ok(f)
    }
}

/// Like [`cobyla_minimize`], calling `observer(n_evals, best_theta, best_value)`
/// after every objective evaluation.
pub fn cobyla_minimize_observed<O, F>(
    obj: &mut O,
    theta0: &[f64],
    rho_begin: f64,
    rho_end: f64,
    max_evals: usize,
    observer: F,
) -> Result<CobylaResult>
where
    O: Objective + ?Sized,
    F: FnMut(usize, &[f64], f64) -> Result<()>,
{
    CobylaSettings { rho_begin, rho_end, max_evals: Some(max_evals) }.validate()?;
    let n = theta0.len();
    if n != obj.n_params() || n == 0 {
        return Err(VqeError::usage(format!("expected {} parameters, got {n}", obj.n_params())));
    }
    if max_evals == 0 {
        return Err(VqeError::config("COBYLA needs a positive evaluation budget"));
    }
    let mut t = Tracker { obj, observer, n_evals: 0, best_x: theta0.to_vec(), best_f: f64::INFINITY };
    let finish = |t: Tracker<'_, O, F>, converged| {
        Ok(CobylaResult { theta: t.best_x, value: t.best_f, n_evals: t.n_evals, converged })
    };

    let mut rho = rho_begin;
    // Pivot vertex x0 with value f0; column j of `sim` is vertex j minus x0.
    let mut x0 = DVector::from_column_slice(theta0);
    let mut f0 = t.eval(x0.as_slice())?;
    let mut sim = DMatrix::<f64>::identity(n, n) * rho;
    let mut fv = vec![0.0; n];
    for j in 0..n {
        if t.n_evals >= max_evals {
            return finish(t, false);
        }
        let mut x = x0.clone();
        x[j] += rho;
        let f = t.eval(x.as_slice())?;
        fv[j] = f;
        if f < f0 {
            // the new point becomes the pivot; earlier vertices shift by -ρe_j
            for k in 0..j {
                sim[(j, k)] = -rho;
            }
            sim[(j, j)] = -rho;
            fv[j] = f0;
            f0 = f;
            x0 = x;
        }
    }

    let mut ibrnch = true;
    loop {
        // make the lowest vertex the pivot
        let mut nbest = None;
        let mut fmin = f0;
        for (j, &f) in fv.iter().enumerate() {
            if f < fmin {
                nbest = Some(j);
                fmin = f;
            }
        }
        if let Some(b) = nbest {
            let shift = sim.column(b).into_owned();
            x0 += &shift;
            for k in 0..n {
                if k == b {
                    sim.set_column(k, &(-&shift));
                } else {
                    let col = sim.column(k) - &shift;
                    sim.set_column(k, &col);
                }
            }
            std::mem::swap(&mut fv[b], &mut f0);
        }
        let Some(simi) = sim.clone().try_inverse() else {
            return finish(t, false);
        };
        let error = (&simi * &sim - DMatrix::<f64>::identity(n, n)).abs().max();
        if error > 0.1 {
            // rounding errors have destroyed the simplex
            return finish(t, false);
        }

        let w = DVector::from_iterator(n, fv.iter().map(|f| f - f0));
        let grad = simi.transpose() * &w;
        let parsig = ALPHA * rho;
        let pareta = BETA * rho;
        let vsig: Vec<f64> = (0..n).map(|j| 1.0 / simi.row(j).norm()).collect();
        let veta: Vec<f64> = (0..n).map(|j| sim.column(j).norm()).collect();
        let acceptable = vsig.iter().all(|&s| s >= parsig) && veta.iter().all(|&e| e <= pareta);

        if !(ibrnch || acceptable) {
            // geometry step: move the worst-placed vertex away from its opposite face
            let mut jdrop = None;
            let mut temp = pareta;
            for (j, &e) in veta.iter().enumerate() {
                if e > temp {
                    jdrop = Some(j);
                    temp = e;
                }
            }
            if jdrop.is_none() {
                for (j, &s) in vsig.iter().enumerate() {
                    if s < temp {
                        jdrop = Some(j);
                        temp = s;
                    }
                }
            }
            let jdrop = jdrop.expect("unacceptable simplex has a vertex to move");
            let mut dx = simi.row(jdrop).transpose() * (GAMMA * rho * vsig[jdrop]);
            if grad.dot(&dx) > 0.0 {
                dx = -dx;
            }
            if t.n_evals >= max_evals {
                return finish(t, false);
            }
            let f = t.eval((&x0 + &dx).as_slice())?;
            sim.set_column(jdrop, &dx);
            fv[jdrop] = f;
            ibrnch = true;
            continue;
        }

        let gnorm = grad.norm();
        let mut improved = false;
        if gnorm > 0.0 {
            let dx = &grad * (-rho / gnorm);
            let prerem = rho * gnorm;
            if t.n_evals >= max_evals {
                return finish(t, false);
            }
            let f = t.eval((&x0 + &dx).as_slice())?;
            let trured = f0 - f;

            let mut ratio = if trured <= 0.0 { 1.0 } else { 0.0 };
            let mut jdrop = None;
            let mut sigbar = vec![0.0; n];
            for j in 0..n {
                let temp = simi.row(j).transpose().dot(&dx).abs();
                if temp > ratio {
                    jdrop = Some(j);
                    ratio = temp;
                }
                sigbar[j] = temp * vsig[j];
            }
            let mut edgmax = DELTA * rho;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= parsig || sigbar[j] >= vsig[j] {
                    let temp = if trured > 0.0 { (&dx - sim.column(j)).norm() } else { veta[j] };
                    if temp > edgmax {
                        far = Some(j);
                        edgmax = temp;
                    }
                }
            }
            if far.is_some() {
                jdrop = far;
            }
            if let Some(j) = jdrop {
                sim.set_column(j, &dx);
                fv[j] = f;
                improved = trured > 0.0 && trured >= 0.1 * prerem;
            }
        }
        if improved {
            continue;
        }
        if !acceptable {
            ibrnch = false;
            continue;
        }
        if rho <= rho_end {
            return finish(t, true);
        }
        rho *= 0.5;
        if rho <= 1.5 * rho_end {
            rho = rho_end;
        }
    }
}
