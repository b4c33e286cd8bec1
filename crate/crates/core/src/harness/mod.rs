//! Seeded experiment batches: configuration, execution and CSV/JSON output.
//!
//! A batch is the grid `sweep point × method × seed index`. Every run's
//! initial parameters and random streams are derived from the master seed,
//! so a batch is reproducible regardless of how many workers execute it.

mod config;
mod output;

pub use config::{
    preset, tuned_method, ExperimentConfig, ModelConfig, Sweep, SweepPoint, PRESETS, PRESET_FIELDS, PRESET_SIZES,
};
pub use output::{write_outputs, OutputPaths, SUMMARY_HEADER, TRACE_HEADER};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::{initial_parameters, CircuitTemplate};
use crate::error::{Result, VqeError};
use crate::ising::{build_tim, exact_ground};
use crate::optimize::{run_vqe, Method, RunStatus, TraceRow, VqeProblem};
use crate::pauli::PauliSum;
use crate::seed::{derive, fnv1a};

/// Reference data for one sweep point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: SweepPoint,
    pub ground_energy: f64,
    pub degeneracy: usize,
    pub gap: f64,
    pub n_params: usize,
}

/// One cell of the grid.
#[derive(Debug, Clone)]
pub struct RunEntry {
    pub point: usize,
    pub method: Method,
    pub seed_index: usize,
    /// Seed handed to the optimizer.
    pub run_seed: u64,
    pub status: RunStatus,
    /// Empty when the run could not start.
    pub rows: Vec<TraceRow>,
}

impl RunEntry {
    pub fn failed(&self) -> bool {
        matches!(self.status, RunStatus::Failed(_))
    }

    pub fn final_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}

/// All runs of a batch, ordered by (point, method, seed index).
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub config: ExperimentConfig,
    pub points: Vec<PointResult>,
    pub runs: Vec<RunEntry>,
}

impl ResultTable {
    pub fn n_failed(&self) -> usize {
        self.runs.iter().filter(|r| r.failed()).count()
    }

    pub fn n_trace_rows(&self) -> usize {
        self.runs.iter().map(|r| r.rows.len()).sum()
    }
}

/// Aggregate over the seeds of one (method, sweep point).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub sweep_key: &'static str,
    pub sweep_value: String,
    pub mean_energy: f64,
    /// Unbiased; zero for a single seed.
    pub std_energy: f64,
    pub mean_rel_error: f64,
    /// Objective plus fidelity evaluations summed over seeds.
    pub total_evals: usize,
    pub n_runs: usize,
    pub n_failed: usize,
}

/// Parameters every method starts from at `(seed_index, point)`.
pub fn initial_theta(master: u64, seed_index: usize, point: &SweepPoint, template: &CircuitTemplate) -> Vec<f64> {
    let tag = fnv1a(format!("init/{seed_index}/{}", point.value).as_bytes());
    initial_parameters(template, &mut ChaCha8Rng::seed_from_u64(derive(master, tag)))
}

pub fn run_seed(master: u64, method: Method, seed_index: usize, point: &SweepPoint) -> u64 {
    derive(master, fnv1a(format!("{}/{seed_index}/{}", method.name(), point.value).as_bytes()))
}

struct Prepared {
    template: CircuitTemplate,
    hamiltonian: PauliSum,
}

/// Runs the whole grid on `jobs` worker threads.
///
/// Configuration problems are errors. A run that fails is recorded with
/// [`RunStatus::Failed`] and the batch carries on.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ResultTable> {
    config.validate()?;
    if jobs == 0 {
        return Err(VqeError::config("jobs must be at least 1"));
    }
    let mut prepared = Vec::new();
    let mut points = Vec::new();
    for point in config.points() {
        let template = point.ansatz.build(point.model.n_spins, config.layers, point.entanglement)?;
        let hamiltonian = build_tim(&point.model)?;
        let exact = exact_ground(&hamiltonian)?;
        points.push(PointResult {
            ground_energy: exact.ground_energy,
            degeneracy: exact.degeneracy,
            gap: exact.gap,
            n_params: template.n_params(),
            point,
        });
        prepared.push(Prepared { template, hamiltonian });
    }

    let mut cells = Vec::with_capacity(config.grid_size());
    for point in 0..points.len() {
        for (m, _) in config.methods.iter().enumerate() {
            for seed_index in 0..config.n_samples {
                cells.push((point, m, seed_index));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| VqeError::Resource(format!("cannot start worker pool: {e}")))?;
    let runs = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, m, seed_index)| {
                let info = &points[p];
                let prep = &prepared[p];
                let mut opt = config.methods[m].clone();
                opt.seed = run_seed(config.seed, opt.method, seed_index, &info.point);
                let theta0 = initial_theta(config.seed, seed_index, &info.point, &prep.template);
                let problem = VqeProblem {
                    template: &prep.template,
                    hamiltonian: &prep.hamiltonian,
                    evaluator: config.evaluator,
                    ground_energy: info.ground_energy,
                };
                let (status, rows) = match run_vqe(&problem, &opt, &theta0) {
                    Ok(record) => (record.status, record.rows),
                    Err(e) => (RunStatus::Failed(e.to_string()), Vec::new()),
                };
                RunEntry { point: p, method: opt.method, seed_index, run_seed: opt.seed, status, rows }
            })
            .collect::<Vec<_>>()
    });

    Ok(ResultTable { config: config.clone(), points, runs })
}

// Shifted by the first sample so identical inputs give their value back exactly.
fn mean(xs: &[f64]) -> f64 {
    match xs.first() {
        None => f64::NAN,
        Some(&x0) => x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64,
    }
}

fn unbiased_std(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        1 => 0.0,
        n => {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        }
    }
}

/// Per-(method, point) statistics of final energies.
///
/// Failed runs are excluded from the statistics and counted in `n_failed`;
/// a group with no successful run reports NaN.
pub fn summarize(table: &ResultTable) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for (p, info) in table.points.iter().enumerate() {
        for m in &table.config.methods {
            let group: Vec<&RunEntry> = table.runs.iter().filter(|r| r.point == p && r.method == m.method).collect();
            let ok: Vec<&TraceRow> = group.iter().filter(|r| !r.failed()).filter_map(|r| r.final_row()).collect();
            let energies: Vec<f64> = ok.iter().map(|r| r.energy).collect();
            let errors: Vec<f64> = ok.iter().map(|r| r.relative_error).collect();
            out.push(SummaryRow {
                method: m.method,
                sweep_key: info.point.key,
                sweep_value: info.point.value.clone(),
                mean_energy: mean(&energies),
                std_energy: unbiased_std(&energies),
                mean_rel_error: mean(&errors),
                total_evals: ok.iter().map(|r| r.objective_evals + r.fidelity_evals).sum(),
                n_runs: group.len(),
                n_failed: group.len() - ok.len(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::OptimizerConfig;

    fn small(methods: &[Method], samples: usize) -> ExperimentConfig {
        let mut methods: Vec<OptimizerConfig> = methods.iter().map(|&m| tuned_method(m)).collect();
        for m in &mut methods {
            m.max_iterations = 5;
        }
        ExperimentConfig {
            model: ModelConfig { n_spins: 3, ..ModelConfig::default() },
            layers: 1,
            sweep: Some(Sweep::H(vec![0.5, 2.0])),
            methods,
            n_samples: samples,
            ..ExperimentConfig::from_toml_str("[[methods]]\nmethod = \"GD+PSR\"").unwrap()
        }
    }

    #[test]
    fn grid_is_complete_and_ordered() {
        let cfg = small(&[Method::GdPsr, Method::QnSpsaPsr], 3);
        let table = run_experiment(&cfg, 2).unwrap();
        assert_eq!(table.runs.len(), cfg.grid_size());
        let keys: Vec<_> = table.runs.iter().map(|r| (r.point, r.method, r.seed_index)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(table.n_failed(), 0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small(&[Method::GdSpsa, Method::QnSpsaSpsa], 2);
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&cfg, 3).unwrap();
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.rows, y.rows);
        }
    }

    #[test]
    fn methods_share_initial_points() {
        let cfg = small(&[Method::GdPsr, Method::Cobyla], 2);
        let table = run_experiment(&cfg, 1).unwrap();
        let first = |m, s| {
            table.runs.iter().find(|r| r.point == 0 && r.method == m && r.seed_index == s).unwrap().rows[0].energy
        };
        assert_eq!(first(Method::GdPsr, 1), first(Method::Cobyla, 1));
        assert_ne!(first(Method::GdPsr, 0), first(Method::GdPsr, 1));
    }

    #[test]
    fn single_seed_has_zero_std() {
        let table = run_experiment(&small(&[Method::GdPsr], 1), 1).unwrap();
        for row in summarize(&table) {
            assert_eq!(row.std_energy, 0.0);
            assert_eq!(row.n_runs, 1);
        }
    }

    #[test]
    fn identical_traces_summarize_to_the_trace() {
        let mut table = run_experiment(&small(&[Method::GdPsr], 1), 1).unwrap();
        table.config.n_samples = 7;
        let template = table.runs[0].clone();
        table.runs = (0..7).map(|s| RunEntry { seed_index: s, ..template.clone() }).collect();
        let row = &summarize(&table)[0];
        let last = template.final_row().unwrap();
        assert_eq!(row.mean_energy, last.energy);
        assert_eq!(row.std_energy, 0.0);
        assert_eq!(row.mean_rel_error, last.relative_error);
        assert_eq!(row.total_evals, 7 * last.objective_evals);
    }

    #[test]
    fn mean_error_is_bounded_by_worst_seed() {
        let mut cfg = small(&[Method::QnSpsaPsr], 7);
        cfg.model.n_spins = 4;
        cfg.sweep = None;
        cfg.layers = 2;
        let table = run_experiment(&cfg, 2).unwrap();
        let worst = table.runs.iter().map(|r| r.final_row().unwrap().relative_error).fold(0.0, f64::max);
        assert!(summarize(&table)[0].mean_rel_error <= worst);
    }

    #[test]
    fn failed_runs_are_kept() {
        let mut table = run_experiment(&small(&[Method::GdPsr], 2), 1).unwrap();
        table.runs[0].status = RunStatus::Failed("nan".into());
        let row = &summarize(&table)[0];
        assert_eq!((row.n_runs, row.n_failed), (2, 1));
        assert_eq!(row.std_energy, 0.0);
    }
}
