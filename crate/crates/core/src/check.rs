//! Fast self-test of the simulator's invariants, run by `vqe check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{initial_parameters, AnsatzKind, EntanglementScheme};
use crate::error::Result;
use crate::grad::{grad_fd, grad_psr};
use crate::ising::{build_tim, check_coefficient_structure, check_spinflip_symmetry, exact_ground, TimParams};
use crate::metric::{metric_bda, qgt_exact, regularize, MetricKind, MetricMatrix};
use crate::objective::{EnergyObjective, Evaluator};
use crate::optimize::{run_vqe, Method, OptimizerConfig, VqeProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

const CHECKS: [(&str, CheckFn); 9] = [
    ("circuits preserve the norm", norm_preserved),
    ("CNOT is an involution", cnot_involution),
    ("classical limit h = 0", classical_limit),
    ("spin-flip symmetry of H", spinflip_symmetry),
    ("ground-state coefficient structure", coefficient_structure),
    ("parameter shift matches finite differences", psr_vs_fd),
    ("block-diagonal metric matches exact blocks", bda_blocks),
    ("regularized metric is bounded below by beta", regularized_floor),
    ("per-iteration evaluation counts", accounting),
];

/// Runs every check with a fixed seed. Errors count as failures.
pub fn run_checks() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    CHECKS
        .iter()
        .map(|&(name, f)| match f(&mut rng) {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome { name, passed: false, detail: format!("error: {e}") },
        })
        .collect()
}

fn norm_preserved(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = AnsatzKind::EfficientSu2.build(6, 3, EntanglementScheme::Full)?;
    let state = t.bind(&initial_parameters(&t, rng))?;
    let dev = (state.norm_sqr() - 1.0).abs();
    Ok((dev < 1e-12, format!("|<psi|psi> - 1| = {dev:e}")))
}

fn cnot_involution(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = AnsatzKind::RealAmplitudes.build(4, 1, EntanglementScheme::Full)?;
    let start = t.bind(&initial_parameters(&t, rng))?;
    let mut state = start.clone();
    state.apply_cnot(2, 0)?;
    state.apply_cnot(2, 0)?;
    let dev = (1.0 - state.inner_product(&start)?.norm()).abs();
    Ok((dev < 1e-12, format!("1 - |<psi|CNOT^2 psi>| = {dev:e}")))
}

fn classical_limit(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let sol = exact_ground(&build_tim(&TimParams::ring(6, 1.0, 0.0))?)?;
    let dev = (sol.ground_energy + 6.0).abs();
    Ok((dev < 1e-10 && sol.degeneracy == 2, format!("E_g + JN = {dev:e}, degeneracy {}", sol.degeneracy)))
}

fn spinflip_symmetry(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 2..=10 {
        for boundary in [TimParams::ring(n, 1.0, 1.3), TimParams::open(n, 0.7, 2.0)] {
            worst = worst.max(check_spinflip_symmetry(&build_tim(&boundary)?)?);
        }
    }
    Ok((worst < 1e-12, format!("max commutator norm {worst:e}")))
}

fn coefficient_structure(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let sol = exact_ground(&build_tim(&TimParams::ring(6, 1.0, 2.0))?)?;
    let r = check_coefficient_structure(&sol.ground_state);
    let worst = r.max_real_angle_deviation.max(r.max_spinflip_mismatch);
    Ok((sol.degeneracy == 1 && worst < 1e-8, format!("max deviation {worst:e}, sign {}", r.sign)))
}

fn psr_vs_fd(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = AnsatzKind::RealAmplitudes.build(4, 2, EntanglementScheme::Linear)?;
    let h = build_tim(&TimParams::ring(4, 1.0, 2.0))?;
    let theta = initial_parameters(&t, rng);
    let mut obj = EnergyObjective::with_evaluator(&t, &h, Evaluator::Exact, 0)?;
    let psr = grad_psr(&mut obj, &theta)?;
    let fd = grad_fd(&mut obj, &theta, 1e-4)?;
    let dev = psr.values.iter().zip(&fd.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((dev < 1e-6, format!("max |PSR - FD(1e-4)| = {dev:e}")))
}

fn bda_blocks(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = AnsatzKind::RealAmplitudes.build(5, 2, EntanglementScheme::Full)?;
    let theta = initial_parameters(&t, rng);
    let exact = qgt_exact(&t, &theta)?;
    let (bda, _) = metric_bda(&t, &theta)?;
    let mut worst = 0.0f64;
    for block in t.layer_blocks() {
        for i in block.clone() {
            for j in block.clone() {
                worst = worst.max((exact.data[(i, j)] - bda.data[(i, j)]).abs());
            }
        }
    }
    Ok((worst < 1e-10, format!("max block difference {worst:e}")))
}

fn regularized_floor(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = 8;
    let a = nalgebra::DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let sym = MetricMatrix::new((&a + a.transpose()) * 0.5, MetricKind::QnspsaRaw, 1)?;
    let beta = 0.01;
    let lambda_min = regularize(&sym, beta)?.eigenvalues()?[0];
    Ok((lambda_min >= beta - 1e-12, format!("lambda_min = {lambda_min:e}")))
}

fn accounting(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = AnsatzKind::RealAmplitudes.build(3, 1, EntanglementScheme::Linear)?;
    let h = build_tim(&TimParams::ring(3, 1.0, 2.0))?;
    let eg = exact_ground(&h)?.ground_energy;
    let problem = VqeProblem { template: &t, hamiltonian: &h, evaluator: Evaluator::Exact, ground_energy: eg };
    let theta0 = initial_parameters(&t, rng);
    let p = t.n_params();
    let blocks = t.layer_blocks().len();
    let mut bad = Vec::new();
    for m in Method::ALL {
        let expected = match m {
            Method::Cobyla => (1, 0, 0),
            Method::GdFd | Method::GdPsr => (2 * p, 0, 0),
            Method::GdSpsa => (2, 0, 0),
            Method::QngExactPsr => (2 * p, 0, p),
            Method::QnBdaPsr => (2 * p, 0, blocks),
            Method::QnSpsaSpsa => (2, 4, 0),
            Method::QnSpsaPsr => (2 * p, 4, 0),
        };
        let mut cfg = OptimizerConfig::new(m);
        cfg.max_iterations = 3;
        cfg.patience = usize::MAX;
        let run = run_vqe(&problem, &cfg, &theta0)?;
        let ok = run.rows.windows(2).all(|w| {
            (
                w[1].objective_evals - w[0].objective_evals,
                w[1].fidelity_evals - w[0].fidelity_evals,
                w[1].metric_circuits - w[0].metric_circuits,
            ) == expected
        });
        if !ok || run.failed() {
            bad.push(m.name());
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "all methods".into() } else { format!("mismatch: {}", bad.join(", ")) }))
}
