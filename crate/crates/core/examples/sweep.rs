//! A small field sweep through the experiment harness, written to CSV.
//!
//! `cargo run --release --example sweep -- out/sweep`

use std::path::Path;

use vqe_lab::harness::{run_experiment, summarize, write_outputs, ExperimentConfig};

const CONFIG: &str = r#"
name = "example-sweep"
seed = 3
n_samples = 3
layers = 2

[model]
n_spins = 6

[sweep]
key = "h"
values = [0.5, 1.0, 2.0]

[[methods]]
method = "QNSPSA+PSR"
max_iterations = 150
eta = { a0 = 0.12 }
metric = { beta = 0.5 }

[[methods]]
method = "QNBDA+PSR"
max_iterations = 150
eta = { a0 = 0.04 }
"#;

fn main() -> vqe_lab::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "results/example-sweep".into());
    let config = ExperimentConfig::from_toml_str(CONFIG)?;

    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let table = run_experiment(&config, jobs)?;
    for row in summarize(&table) {
        println!(
            "{:<12} h = {:<4} mean rel. error {:.3e}  std E {:.1e}  ({} evals)",
            row.method, row.sweep_value, row.mean_rel_error, row.std_energy, row.total_evals
        );
    }
    let paths = write_outputs(&table, Path::new(&out))?;
    println!("wrote {}", paths.trace.display());
    Ok(())
}
