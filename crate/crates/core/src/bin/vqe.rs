use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vqe_lab::check::run_checks;
use vqe_lab::harness::{preset, run_experiment, write_outputs, ExperimentConfig};
use vqe_lab::ising::{build_tim, exact_ground, Boundary, TimParams};
use vqe_lab::{Result, VqeError};

#[derive(Parser)]
#[command(name = "vqe", version, about = "VQE experiments on the transverse-field Ising model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment batch from a TOML file or a preset (default paper-fig3).
    Run {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Iteration cap for every method.
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Seeds per method and sweep point.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Exact ground energy, degeneracy and gap of a TIM instance.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value = "ring")]
        boundary: Boundary,
    },
    /// Run the invariant suite.
    Check,
}

fn resolve(
    config: Option<PathBuf>,
    preset_name: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    max_iterations: Option<usize>,
    samples: Option<usize>,
) -> Result<ExperimentConfig> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::from_file(&path)?,
        None => preset(preset_name.as_deref().unwrap_or("paper-fig3"))?,
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(dir) = out {
        cfg.output = dir;
    }
    if let Some(k) = max_iterations {
        cfg.set_max_iterations(k);
    }
    if let Some(n) = samples {
        cfg.n_samples = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_config_error(e: &VqeError) -> bool {
    matches!(e, VqeError::Config(_) | VqeError::Toml(_) | VqeError::Usage(_) | VqeError::Resource(_))
}

fn fail(e: VqeError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, preset, jobs, seed, out, max_iterations, samples } => {
            let cfg = match resolve(config, preset, seed, out, max_iterations, samples) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            eprintln!("{}: {} runs on {jobs} worker(s)", cfg.name, cfg.grid_size());
            let table = match run_experiment(&cfg, jobs) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            if let Err(e) = write_outputs(&table, &cfg.output) {
                return fail(e);
            }
            let failed = table.n_failed();
            println!("wrote {} ({} runs, {failed} failed)", cfg.output.display(), table.runs.len());
            if failed > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Oracle { n, h, j, boundary } => {
            let params = TimParams { n_spins: n, j, h, boundary };
            match build_tim(&params).and_then(|ham| exact_ground(&ham)) {
                Ok(sol) => {
                    println!("E_g = {:e}", sol.ground_energy);
                    println!("degeneracy = {}", sol.degeneracy);
                    println!("gap = {:e}", sol.gap);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Check => {
            let outcomes = run_checks();
            for c in &outcomes {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if outcomes.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
