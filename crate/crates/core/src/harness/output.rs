//! CSV and JSON artifacts of a batch.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{format_float, ExperimentConfig, Sweep, PRESET_FIELDS, PRESET_SIZES};
use super::{summarize, ResultTable};
use crate::error::Result;
use crate::optimize::{Method, RunStatus};

pub const TRACE_HEADER: [&str; 9] = [
    "method",
    "seed",
    "sweep_key",
    "sweep_value",
    "iteration",
    "energy",
    "relative_error",
    "objective_evals",
    "fidelity_evals",
];

pub const SUMMARY_HEADER: [&str; 7] =
    ["method", "sweep_key", "sweep_value", "mean_energy", "std_energy", "mean_rel_error", "total_evals"];

const ORACLE_HEADER: [&str; 7] = ["sweep_key", "sweep_value", "n_spins", "h", "ground_energy", "degeneracy", "gap"];

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub oracle: PathBuf,
    pub meta: PathBuf,
}

impl OutputPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            trace: dir.join("trace.csv"),
            summary: dir.join("summary.csv"),
            oracle: dir.join("oracle.csv"),
            meta: dir.join("meta.json"),
        }
    }
}

#[derive(Serialize)]
struct PointMeta<'a> {
    sweep_key: &'a str,
    sweep_value: &'a str,
    n_spins: usize,
    h: f64,
    ansatz: &'a str,
    entanglement: &'a str,
    n_params: usize,
    ground_energy: f64,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    method: &'a str,
    seed: usize,
    sweep_value: &'a str,
    run_seed: u64,
    #[serde(flatten)]
    status: &'a RunStatus,
    rows: usize,
}

#[derive(Serialize)]
struct Meta<'a> {
    name: &'a str,
    code_version: &'a str,
    master_seed: u64,
    grid_size: usize,
    failed_runs: usize,
    /// Settings that are ours rather than taken from the reference setup.
    choices: Vec<String>,
    config: &'a ExperimentConfig,
    points: Vec<PointMeta<'a>>,
    runs: Vec<RunMeta<'a>>,
}

fn choices(config: &ExperimentConfig) -> Vec<String> {
    let mut out = Vec::new();
    for m in &config.methods {
        out.push(match m.method {
            Method::Cobyla => format!(
                "{}: {} evaluations, rho {} to {}",
                m.method,
                m.cobyla.max_evals.unwrap_or(m.max_iterations),
                m.cobyla.rho_begin,
                m.cobyla.rho_end
            ),
            Method::QnSpsaPsr | Method::QnSpsaSpsa => format!(
                "{}: {} iterations, eta {}/k^{}, beta {}",
                m.method, m.max_iterations, m.eta.a0, m.eta.exponent, m.metric.beta
            ),
            _ => format!("{}: {} iterations, eta {}/k^{}", m.method, m.max_iterations, m.eta.a0, m.eta.exponent),
        });
    }
    match &config.sweep {
        Some(Sweep::H(v)) if v[..] == PRESET_FIELDS[..] => out.push("field values of the h sweep".into()),
        Some(Sweep::NSpins(v)) if v[..] == PRESET_SIZES[..] => out.push("chain lengths of the N sweep".into()),
        _ => {}
    }
    out
}

/// Writes `trace.csv`, `summary.csv`, `oracle.csv` and `meta.json` into `dir`.
///
/// Floats use shortest round-trip scientific notation and nothing
/// time-dependent is written, so equal tables give identical bytes.
pub fn write_outputs(table: &ResultTable, dir: &Path) -> Result<OutputPaths> {
    fs::create_dir_all(dir)?;
    let paths = OutputPaths::in_dir(dir);

    let mut trace = csv::Writer::from_path(&paths.trace)?;
    trace.write_record(TRACE_HEADER)?;
    for run in &table.runs {
        let point = &table.points[run.point].point;
        for row in &run.rows {
            trace.write_record([
                run.method.name(),
                &run.seed_index.to_string(),
                point.key,
                &point.value,
                &row.iteration.to_string(),
                &format_float(row.energy),
                &format_float(row.relative_error),
                &row.objective_evals.to_string(),
                &row.fidelity_evals.to_string(),
            ])?;
        }
    }
    trace.flush()?;

    let mut summary = csv::Writer::from_path(&paths.summary)?;
    summary.write_record(SUMMARY_HEADER)?;
    for row in summarize(table) {
        summary.write_record([
            row.method.name(),
            row.sweep_key,
            &row.sweep_value,
            &format_float(row.mean_energy),
            &format_float(row.std_energy),
            &format_float(row.mean_rel_error),
            &row.total_evals.to_string(),
        ])?;
    }
    summary.flush()?;

    let mut oracle = csv::Writer::from_path(&paths.oracle)?;
    oracle.write_record(ORACLE_HEADER)?;
    for p in &table.points {
        oracle.write_record([
            p.point.key,
            &p.point.value,
            &p.point.model.n_spins.to_string(),
            &format_float(p.point.model.h),
            &format_float(p.ground_energy),
            &p.degeneracy.to_string(),
            &format_float(p.gap),
        ])?;
    }
    oracle.flush()?;

    let meta = Meta {
        name: &table.config.name,
        code_version: env!("CARGO_PKG_VERSION"),
        master_seed: table.config.seed,
        grid_size: table.runs.len(),
        failed_runs: table.n_failed(),
        choices: choices(&table.config),
        config: &table.config,
        points: table
            .points
            .iter()
            .map(|p| PointMeta {
                sweep_key: p.point.key,
                sweep_value: &p.point.value,
                n_spins: p.point.model.n_spins,
                h: p.point.model.h,
                ansatz: p.point.ansatz.name(),
                entanglement: p.point.entanglement.name(),
                n_params: p.n_params,
                ground_energy: p.ground_energy,
            })
            .collect(),
        runs: table
            .runs
            .iter()
            .map(|r| RunMeta {
                method: r.method.name(),
                seed: r.seed_index,
                sweep_value: &table.points[r.point].point.value,
                run_seed: r.run_seed,
                status: &r.status,
                rows: r.rows.len(),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&meta)?;
    json.push('\n');
    fs::write(&paths.meta, json)?;
    Ok(paths)
}
