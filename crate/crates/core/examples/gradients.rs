//! Parameter-shift against finite differences and SPSA on a random circuit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqe_lab::ansatz::{initial_parameters, AnsatzKind, EntanglementScheme};
use vqe_lab::grad::{grad_fd, grad_psr, grad_spsa};
use vqe_lab::ising::{build_tim, TimParams};
use vqe_lab::objective::EnergyObjective;

fn main() -> vqe_lab::Result<()> {
    let t = AnsatzKind::RealAmplitudes.build(4, 2, EntanglementScheme::Linear)?;
    let ham = build_tim(&TimParams::ring(4, 1.0, 2.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let theta = initial_parameters(&t, &mut rng);
    let mut obj = EnergyObjective::new(&t, &ham)?;

    let psr = grad_psr(&mut obj, &theta)?;
    println!("PSR used {} evaluations", psr.n_evals);
    for eps in [1e-2, 1e-3, 1e-4] {
        let fd = grad_fd(&mut obj, &theta, eps)?;
        let err = psr.values.iter().zip(&fd.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("FD eps {eps:e}: max |FD - PSR| = {err:.3e}");
    }

    let draws = 2000;
    let mut mean = vec![0.0; theta.len()];
    for _ in 0..draws {
        let g = grad_spsa(&mut obj, &theta, 0.01, &mut rng)?;
        for (m, v) in mean.iter_mut().zip(&g.values) {
            *m += v / draws as f64;
        }
    }
    let cos = dot(&mean, &psr.values) / (dot(&mean, &mean) * dot(&psr.values, &psr.values)).sqrt();
    println!("mean of {draws} SPSA estimates vs PSR: cosine {cos:.4}");
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
