//! Exact quantum geometric tensor, its block-diagonal approximation and
//! the smoothed QN-SPSA estimate at one point.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqe_lab::ansatz::{initial_parameters, AnsatzKind, EntanglementScheme};
use vqe_lab::metric::{metric_bda, metric_qnspsa_sample, qgt_exact, regularize, smooth, FidelityOracle, MetricMatrix};

fn main() -> vqe_lab::Result<()> {
    let t = AnsatzKind::RealAmplitudes.build(4, 1, EntanglementScheme::Linear)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let theta = initial_parameters(&t, &mut rng);

    let exact = qgt_exact(&t, &theta)?;
    let (bda, circuits) = metric_bda(&t, &theta)?;
    println!("exact QGT:{:.4}", exact.data);
    println!("block-diagonal ({circuits} circuits):{:.4}", bda.data);

    let mut oracle = FidelityOracle::new(&t);
    let mut h = MetricMatrix::identity_prior(t.n_params());
    for k in 1..=2000 {
        let sample = metric_qnspsa_sample(&mut oracle, &theta, 0.01, k, &mut rng)?;
        h = smooth(&h, &sample, k)?;
    }
    let dev = (&h.data - &exact.data).abs().max();
    println!("QN-SPSA after 2000 samples ({} fidelities): max deviation {dev:.3e}", oracle.evaluations());
    let reg = regularize(&h, 1e-3)?;
    let eig: Vec<String> = reg.eigenvalues()?.iter().map(|v| format!("{v:.3e}")).collect();
    println!("regularized eigenvalues: {}", eig.join(" "));
    Ok(())
}
