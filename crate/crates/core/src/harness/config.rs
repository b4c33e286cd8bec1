//! Experiment configuration, sweeps and presets.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzKind, EntanglementScheme};
use crate::error::{Result, VqeError};
use crate::ising::{Boundary, TimParams, MAX_ORACLE_QUBITS};
use crate::metric::MetricConfig;
use crate::objective::Evaluator;
use crate::optimize::{Method, OptimizerConfig};
use crate::schedule::Schedule;

/// Hamiltonian parameters shared by every sweep point unless swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub n_spins: usize,
    pub j: f64,
    pub h: f64,
    pub boundary: Boundary,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { n_spins: 12, j: 1.0, h: 2.0, boundary: Boundary::Ring }
    }
}

/// One swept quantity and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "key", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    H(Vec<f64>),
    NSpins(Vec<usize>),
    Entanglement(Vec<EntanglementScheme>),
    Ansatz(Vec<AnsatzKind>),
}

impl Sweep {
    pub fn key(&self) -> &'static str {
        match self {
            Sweep::H(_) => "h",
            Sweep::NSpins(_) => "n_spins",
            Sweep::Entanglement(_) => "entanglement",
            Sweep::Ansatz(_) => "ansatz",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::H(v) => v.len(),
            Sweep::NSpins(v) => v.len(),
            Sweep::Entanglement(v) => v.len(),
            Sweep::Ansatz(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fully resolved grid coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub key: &'static str,
    /// CSV representation of the swept value.
    pub value: String,
    pub model: TimParams,
    pub ansatz: AnsatzKind,
    pub entanglement: EntanglementScheme,
}

pub(crate) fn format_float(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Master seed; every run's streams derive from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub ansatz: AnsatzKind,
    #[serde(default)]
    pub entanglement: EntanglementScheme,
    #[serde(default = "default_layers")]
    pub layers: usize,
    /// Absent means a single point at the model's `h`.
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Optimizers to compare. Their `seed` fields are replaced per run.
    pub methods: Vec<OptimizerConfig>,
    /// Seeds per method and sweep point.
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub evaluator: Evaluator,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_layers() -> usize {
    2
}
fn default_samples() -> usize {
    7
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VqeError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| VqeError::config(e.to_string()))
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let model =
            TimParams { n_spins: self.model.n_spins, j: self.model.j, h: self.model.h, boundary: self.model.boundary };
        let base = SweepPoint {
            key: "h",
            value: format_float(model.h),
            model,
            ansatz: self.ansatz,
            entanglement: self.entanglement,
        };
        let Some(sweep) = &self.sweep else {
            return vec![base];
        };
        let key = sweep.key();
        match sweep {
            Sweep::H(values) => values
                .iter()
                .map(|&h| SweepPoint { key, value: format_float(h), model: TimParams { h, ..model }, ..base.clone() })
                .collect(),
            Sweep::NSpins(values) => values
                .iter()
                .map(|&n| SweepPoint {
                    key,
                    value: n.to_string(),
                    model: TimParams { n_spins: n, ..model },
                    ..base.clone()
                })
                .collect(),
            Sweep::Entanglement(values) => values
                .iter()
                .map(|&e| SweepPoint { key, value: e.name().into(), entanglement: e, ..base.clone() })
                .collect(),
            Sweep::Ansatz(values) => {
                values.iter().map(|&a| SweepPoint { key, value: a.name().into(), ansatz: a, ..base.clone() }).collect()
            }
        }
    }

    /// Number of runs in the grid.
    pub fn grid_size(&self) -> usize {
        self.points().len() * self.methods.len() * self.n_samples
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(VqeError::config("n_samples must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(VqeError::config("at least one method is required"));
        }
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(m.method) {
                return Err(VqeError::config(format!("method {} listed twice", m.method)));
            }
            m.validate()?;
        }
        if matches!(&self.sweep, Some(s) if s.is_empty()) {
            return Err(VqeError::config("sweep values must not be empty"));
        }
        if let Evaluator::Shots(0) = self.evaluator {
            return Err(VqeError::config("shot count must be positive"));
        }
        let mut labels = BTreeSet::new();
        for p in self.points() {
            p.model.validate()?;
            if p.model.n_spins > MAX_ORACLE_QUBITS {
                return Err(VqeError::config(format!(
                    "{} spins exceed the {MAX_ORACLE_QUBITS}-spin limit of the exact reference",
                    p.model.n_spins
                )));
            }
            if !labels.insert(p.value.clone()) {
                return Err(VqeError::config(format!("sweep value {} repeated", p.value)));
            }
        }
        Ok(())
    }

    /// Overrides the iteration cap of every method.
    pub fn set_max_iterations(&mut self, iterations: usize) {
        for m in &mut self.methods {
            m.max_iterations = iterations;
        }
    }
}

/// Hyperparameters used by the presets.
///
/// Natural-gradient steps with the pseudo-inverse metric are unstable at
/// `η = 0.1` on these landscapes, so the metric-based methods use smaller
/// rates; QN-SPSA uses a larger `β` because a single rank-2 sample per
/// iteration leaves the smoothed metric noisy.
pub fn tuned_method(method: Method) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::new(method);
    match method {
        Method::QngExactPsr => cfg.eta = Schedule::constant(0.03),
        Method::QnBdaPsr => cfg.eta = Schedule::constant(0.04),
        Method::QnSpsaPsr | Method::QnSpsaSpsa => {
            cfg.eta = Schedule::constant(0.12);
            cfg.metric = MetricConfig { beta: 0.5, ..MetricConfig::default() };
        }
        _ => {}
    }
    cfg
}

pub const PRESETS: [&str; 4] = ["paper-fig3", "paper-fig4", "paper-fig5", "paper-fig6"];

/// Field values swept by `paper-fig5`.
pub const PRESET_FIELDS: [f64; 6] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
/// Chain lengths swept by `paper-fig6`.
pub const PRESET_SIZES: [usize; 5] = [4, 6, 8, 10, 12];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let six = [Method::GdSpsa, Method::QnBdaPsr, Method::GdFd, Method::Cobyla, Method::QnSpsaPsr, Method::QnSpsaSpsa];
    let three = [Method::QnSpsaSpsa, Method::QnSpsaPsr, Method::QnBdaPsr];
    let base = |sweep: Sweep, methods: &[Method]| ExperimentConfig {
        name: name.to_string(),
        seed: 0,
        model: ModelConfig::default(),
        ansatz: AnsatzKind::RealAmplitudes,
        entanglement: EntanglementScheme::Linear,
        layers: 2,
        sweep: Some(sweep),
        methods: methods.iter().map(|&m| tuned_method(m)).collect(),
        n_samples: 7,
        evaluator: Evaluator::Exact,
        output: PathBuf::from("results").join(name),
    };
    let cfg = match name {
        "paper-fig3" => base(Sweep::Entanglement(vec![EntanglementScheme::Linear, EntanglementScheme::Full]), &six),
        "paper-fig4" => base(Sweep::Ansatz(vec![AnsatzKind::RealAmplitudes, AnsatzKind::EfficientSu2]), &six),
        "paper-fig5" => base(Sweep::H(PRESET_FIELDS.to_vec()), &three),
        "paper-fig6" => base(Sweep::NSpins(PRESET_SIZES.to_vec()), &three),
        _ => return Err(VqeError::config(format!("unknown preset `{name}`, expected one of {}", PRESETS.join(", ")))),
    };
    cfg.validate()?;
    Ok(cfg)
}
