//! Derivative-free COBYLA on classic test functions.

use vqe_lab::objective::FnObjective;
use vqe_lab::optimize::cobyla_minimize;

fn main() -> vqe_lab::Result<()> {
    let mut sphere = FnObjective::new(4, |x: &[f64]| x.iter().map(|v| (v - 0.5).powi(2)).sum());
    let r = cobyla_minimize(&mut sphere, &[2.0, -1.0, 0.0, 1.0], 0.5, 1e-8, 2000)?;
    println!("sphere:     f = {:.3e} after {} evals at {:.6?}", r.value, r.n_evals, r.theta);

    // the curved valley needs far more evaluations than the sphere
    for budget in [2000, 20_000] {
        let mut rosen = FnObjective::new(2, |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let r = cobyla_minimize(&mut rosen, &[-1.2, 1.0], 1.0, 1e-10, budget)?;
        println!("rosenbrock: f = {:.3e} after {} evals at {:.6?}", r.value, r.n_evals, r.theta);
    }
    Ok(())
}
