mod common;

use common::{cosine, tim_problem, Tim};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqe_lab::ansatz::{initial_parameters, EntanglementScheme};
use vqe_lab::grad::grad_psr;
use vqe_lab::metric::qgt_exact;
use vqe_lab::objective::{EnergyObjective, Evaluator, FnObjective};
use vqe_lab::optimize::cobyla_minimize;
use vqe_lab::optimize::{run_vqe, Method, OptimizerConfig, RunRecord, VqeProblem};
use vqe_lab::schedule::Schedule;

fn problem(t: &Tim) -> VqeProblem<'_> {
    VqeProblem {
        template: &t.template,
        hamiltonian: &t.hamiltonian,
        evaluator: Evaluator::Exact,
        ground_energy: t.ground_energy,
    }
}

fn run(t: &Tim, method: Method, eta: f64, iterations: usize, seed: u64) -> RunRecord {
    let mut cfg = OptimizerConfig::new(method);
    cfg.eta = Schedule::constant(eta);
    cfg.max_iterations = iterations;
    cfg.seed = seed;
    cfg.record_theta = true;
    let theta0 = initial_parameters(&t.template, &mut ChaCha8Rng::seed_from_u64(seed));
    run_vqe(&problem(t), &cfg, &theta0).unwrap()
}

/// Lowest relative error the N=4, L=2 linear ansatz reaches: BFGS from many
/// starts and the exact natural gradient all stop here.
const N4_FLOOR: f64 = 1.2668e-3;

#[test]
fn exact_natural_gradient_reaches_the_ansatz_floor() {
    let t = tim_problem(4, 2.0, 2, EntanglementScheme::Linear);
    for seed in 0..4 {
        let err = run(&t, Method::QngExactPsr, 0.03, 300, seed).final_relative_error();
        assert!(err > N4_FLOOR - 1e-7 && err < N4_FLOOR + 1e-6, "seed {seed}: {err:e}");
    }
}

#[test]
fn block_diagonal_natural_gradient_reaches_the_reference() {
    let t = tim_problem(4, 2.0, 2, EntanglementScheme::Linear);
    let reference = run(&t, Method::QngExactPsr, 0.03, 300, 1).final_relative_error();
    let errors: Vec<f64> =
        (0..4).map(|seed| run(&t, Method::QnBdaPsr, 0.03, 3000, seed).final_relative_error()).collect();
    // Starts that drift onto a flat saddle region stay there much longer
    // without the cross-block terms of the metric.
    assert!(errors.iter().cloned().fold(f64::INFINITY, f64::min) < reference + 1e-4, "{errors:?}");
    assert!(errors.iter().all(|&e| e < 2e-2), "{errors:?}");
}

#[test]
fn natural_gradient_is_a_descent_direction() {
    // Fixed-η steps are not monotone: the pseudo-inverse keeps metric
    // directions with eigenvalues barely above the cutoff, where the step
    // grows like η/√λ. Short steps along g⁺∇E always descend.
    let t = tim_problem(4, 2.0, 2, EntanglementScheme::Linear);
    let mut obj = EnergyObjective::new(&t.template, &t.hamiltonian).unwrap();
    for seed in 0..4 {
        let r = run(&t, Method::QngExactPsr, 0.05, 60, seed);
        for row in &r.rows[5..] {
            let theta = row.theta.as_ref().unwrap();
            let grad = grad_psr(&mut obj, theta).unwrap().values;
            if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < 1e-6 {
                continue;
            }
            let dir = qgt_exact(&t.template, theta).unwrap().solve(&grad).unwrap();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            assert!(grad.iter().zip(&dir).map(|(g, d)| g * d).sum::<f64>() > 0.0);
            let probe: Vec<f64> = theta.iter().zip(&dir).map(|(x, d)| x - 1e-5 * d / norm).collect();
            assert!(obj.exact_energy(&probe).unwrap() < row.energy, "seed {seed} iteration {}", row.iteration);
        }
    }
}

#[test]
fn exact_natural_gradient_reaches_the_floor_at_small_steps() {
    let t = tim_problem(4, 2.0, 2, EntanglementScheme::Linear);
    let errors: Vec<f64> =
        (0..8).map(|seed| run(&t, Method::QngExactPsr, 0.01, 300, seed).final_relative_error()).collect();
    assert!(errors.iter().all(|&e| e < N4_FLOOR + 1e-4), "{errors:?}");
}

#[test]
fn huge_beta_reduces_qnspsa_to_gradient_descent() {
    let t = tim_problem(4, 2.0, 1, EntanglementScheme::Linear);
    let beta = 1e6;
    let eta = 0.1;
    let mut cfg = OptimizerConfig::new(Method::QnSpsaPsr);
    cfg.metric.beta = beta;
    cfg.eta = Schedule::constant(eta);
    cfg.max_iterations = 10;
    cfg.record_theta = true;
    cfg.seed = 5;
    let theta0 = initial_parameters(&t.template, &mut ChaCha8Rng::seed_from_u64(5));
    let r = run_vqe(&problem(&t), &cfg, &theta0).unwrap();
    let mut obj = EnergyObjective::new(&t.template, &t.hamiltonian).unwrap();
    for w in r.rows.windows(2).skip(1) {
        let (a, b) = (w[0].theta.as_ref().unwrap(), w[1].theta.as_ref().unwrap());
        let update: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        let gd: Vec<f64> = grad_psr(&mut obj, a).unwrap().values.iter().map(|g| -eta / beta * g).collect();
        assert!(cosine(&update, &gd) > 0.999);
        let ratio = update.iter().map(|x| x * x).sum::<f64>().sqrt() / gd.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }
}

#[test]
fn cobyla_solves_the_small_ising_problem() {
    // About half of random starts settle on a flat region near 1.3e-2.
    let t = tim_problem(4, 2.0, 2, EntanglementScheme::Linear);
    let errors: Vec<f64> = (0..4)
        .map(|seed| {
            let mut cfg = OptimizerConfig::new(Method::Cobyla);
            cfg.max_iterations = 10_000;
            let theta0 = initial_parameters(&t.template, &mut ChaCha8Rng::seed_from_u64(seed));
            run_vqe(&problem(&t), &cfg, &theta0).unwrap().final_relative_error()
        })
        .collect();
    assert!(errors.iter().filter(|&&e| e < 1e-2).count() >= 2, "{errors:?}");
    assert!(errors.iter().all(|&e| e < 5e-2), "{errors:?}");
}

#[test]
fn cobyla_finds_a_shifted_minimum() {
    let mut f =
        FnObjective::new(3, |x: &[f64]| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + (x[2] - x[0]).powi(2));
    let r = cobyla_minimize(&mut f, &[0.0, 0.0, 0.0], 0.5, 1e-7, 5000).unwrap();
    assert!(r.value < 1e-10, "{}", r.value);
    assert!(r.converged);
}

#[test]
fn stochastic_runs_are_reproducible() {
    let t = tim_problem(3, 2.0, 1, EntanglementScheme::Full);
    for m in Method::ALL.into_iter().filter(|m| m.is_stochastic()) {
        let a = run(&t, m, 0.05, 25, 11);
        let b = run(&t, m, 0.05, 25, 11);
        assert_eq!(a.rows, b.rows, "{m}");
        assert_eq!(a.best_theta, b.best_theta);
    }
}

#[test]
fn traces_are_consistent() {
    let t = tim_problem(3, 1.0, 1, EntanglementScheme::Linear);
    for m in Method::ALL {
        let r = run(&t, m, 0.05, 20, 3);
        assert!(!r.failed());
        assert_eq!(r.rows[0].iteration, 0);
        for w in r.rows.windows(2) {
            assert!(w[1].objective_evals >= w[0].objective_evals);
            assert!(w[1].fidelity_evals >= w[0].fidelity_evals);
            assert_eq!(w[1].iteration, w[0].iteration + 1);
        }
        for row in &r.rows {
            let expected = (row.energy - t.ground_energy).abs() / t.ground_energy.abs();
            assert_eq!(row.relative_error, expected);
        }
        assert!(r.rows.iter().all(|row| row.energy >= r.best_energy));
    }
}
