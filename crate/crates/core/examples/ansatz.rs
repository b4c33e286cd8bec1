//! Builds the hardware-efficient templates and prints their structure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqe_lab::ansatz::{initial_parameters, AnsatzKind, EntanglementScheme};

fn main() -> vqe_lab::Result<()> {
    for kind in [AnsatzKind::RealAmplitudes, AnsatzKind::EfficientSu2] {
        for ent in [EntanglementScheme::Linear, EntanglementScheme::Full] {
            let t = kind.build(6, 2, ent)?;
            println!(
                "{:<32} params {:>3}  cnots {:>3}  blocks {:?}",
                t.name(),
                t.n_params(),
                t.cnot_count(),
                t.layer_blocks()
            );
        }
    }

    // bound state probabilities for a small random circuit
    let t = AnsatzKind::RealAmplitudes.build(3, 1, EntanglementScheme::Linear)?;
    let theta = initial_parameters(&t, &mut ChaCha8Rng::seed_from_u64(7));
    let state = t.bind(&theta)?;
    for (i, p) in state.probabilities().iter().enumerate() {
        println!("|{i:03b}>  {p:.4}");
    }
    Ok(())
}
