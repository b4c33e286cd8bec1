//! Every optimizer on the same N=6 problem and start.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqe_lab::ansatz::{initial_parameters, AnsatzKind, EntanglementScheme};
use vqe_lab::harness::tuned_method;
use vqe_lab::ising::{build_tim, exact_ground, TimParams};
use vqe_lab::objective::Evaluator;
use vqe_lab::optimize::{run_vqe, Method, VqeProblem};

fn main() -> vqe_lab::Result<()> {
    let t = AnsatzKind::RealAmplitudes.build(6, 2, EntanglementScheme::Linear)?;
    let ham = build_tim(&TimParams::ring(6, 1.0, 2.0))?;
    let ground_energy = exact_ground(&ham)?.ground_energy;
    let problem = VqeProblem { template: &t, hamiltonian: &ham, evaluator: Evaluator::Exact, ground_energy };
    let theta0 = initial_parameters(&t, &mut ChaCha8Rng::seed_from_u64(2));

    println!("E_g = {ground_energy:.8}");
    println!("{:<14} {:>12} {:>10} {:>10} {:>8}", "method", "rel. error", "obj evals", "fid evals", "status");
    for m in Method::ALL {
        let mut cfg = tuned_method(m);
        cfg.seed = 17;
        let run = run_vqe(&problem, &cfg, &theta0)?;
        let last = run.final_row();
        println!(
            "{:<14} {:>12.3e} {:>10} {:>10} {:>8?}",
            m.name(),
            last.relative_error,
            last.objective_evals,
            last.fidelity_evals,
            run.status
        );
    }
    Ok(())
}
