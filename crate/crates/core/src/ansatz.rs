//! Hardware-efficient circuit templates.

use std::f64::consts::PI;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VqeError};
use crate::state::{Axis, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    /// `exp(-i θ_slot σ_axis / 2)` on `qubit`.
    Rotation {
        axis: Axis,
        qubit: usize,
        slot: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// Hermitian generator `K = σ_axis / 2` of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub axis: Axis,
    pub qubit: usize,
    /// Position of the parameterized gate in the gate list.
    pub gate_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntanglementScheme {
    /// CNOT(i, i+1) for ascending i.
    #[default]
    Linear,
    /// CNOT(i, j) for all i < j in lexicographic order.
    Full,
}

impl EntanglementScheme {
    pub fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        match self {
            EntanglementScheme::Linear => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            EntanglementScheme::Full => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EntanglementScheme::Linear => "linear",
            EntanglementScheme::Full => "full",
        }
    }
}

impl std::str::FromStr for EntanglementScheme {
    type Err = VqeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "full" => Ok(Self::Full),
            _ => Err(VqeError::config(format!("unknown entanglement {s:?}, expected linear|full"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    #[default]
    RealAmplitudes,
    EfficientSu2,
}

impl AnsatzKind {
    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::RealAmplitudes => "real_amplitudes",
            AnsatzKind::EfficientSu2 => "efficient_su2",
        }
    }

    pub fn build(self, n_qubits: usize, layers: usize, ent: EntanglementScheme) -> Result<CircuitTemplate> {
        match self {
            AnsatzKind::RealAmplitudes => real_amplitudes(n_qubits, layers, ent),
            AnsatzKind::EfficientSu2 => efficient_su2(n_qubits, layers, ent),
        }
    }
}

impl std::str::FromStr for AnsatzKind {
    type Err = VqeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real_amplitudes" => Ok(Self::RealAmplitudes),
            "efficient_su2" => Ok(Self::EfficientSu2),
            _ => Err(VqeError::config(format!("unknown ansatz {s:?}, expected real_amplitudes|efficient_su2"))),
        }
    }
}

/// Parameterized circuit `U(θ) = S_L P_L(θ^L) ⋯ S_1 P_1(θ^1)` acting on `|0…0⟩`.
///
/// `layer_blocks` partitions the parameter slots into groups of mutually
/// commuting rotations. Each block's gates are contiguous in the gate list
/// and act on pairwise distinct qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitTemplate {
    name: String,
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
    layer_blocks: Vec<Range<usize>>,
    generators: Vec<Generator>,
}

impl CircuitTemplate {
    /// Validates the structural invariants and derives the generator table.
    pub fn new(
        name: impl Into<String>,
        n_qubits: usize,
        gates: Vec<Gate>,
        layer_blocks: Vec<Range<usize>>,
    ) -> Result<Self> {
        if !(1..=crate::state::MAX_QUBITS).contains(&n_qubits) {
            return Err(VqeError::config(format!("invalid qubit count {n_qubits}")));
        }
        let n_params = gates.iter().filter(|g| matches!(g, Gate::Rotation { .. })).count();
        let mut generators: Vec<Option<Generator>> = vec![None; n_params];
        for (gate_index, gate) in gates.iter().enumerate() {
            match *gate {
                Gate::Rotation { axis, qubit, slot } => {
                    if qubit >= n_qubits {
                        return Err(VqeError::usage(format!("gate {gate_index} acts on qubit {qubit}")));
                    }
                    let entry = generators
                        .get_mut(slot)
                        .ok_or_else(|| VqeError::usage(format!("slot {slot} out of range 0..{n_params}")))?;
                    if entry.is_some() {
                        return Err(VqeError::usage(format!("slot {slot} used more than once")));
                    }
                    *entry = Some(Generator { axis, qubit, gate_index });
                }
                Gate::Cnot { control, target } => {
                    if control >= n_qubits || target >= n_qubits || control == target {
                        return Err(VqeError::usage(format!("invalid CNOT({control}, {target}) at gate {gate_index}")));
                    }
                }
            }
        }
        let generators: Vec<Generator> = generators
            .into_iter()
            .enumerate()
            .map(|(slot, g)| g.ok_or_else(|| VqeError::usage(format!("slot {slot} unused"))))
            .collect::<Result<_>>()?;

        let mut next = 0;
        for block in &layer_blocks {
            if block.start != next || block.end <= block.start {
                return Err(VqeError::usage("layer blocks must partition the slots in order"));
            }
            next = block.end;
            let mut seen = vec![false; n_qubits];
            let mut gate_ids: Vec<usize> = Vec::with_capacity(block.len());
            for slot in block.clone() {
                let g = generators.get(slot).ok_or_else(|| VqeError::usage("block past last slot"))?;
                if std::mem::replace(&mut seen[g.qubit], true) {
                    return Err(VqeError::usage(format!("block {block:?} has two generators on qubit {}", g.qubit)));
                }
                gate_ids.push(g.gate_index);
            }
            gate_ids.sort_unstable();
            if gate_ids.windows(2).any(|w| w[1] != w[0] + 1) {
                return Err(VqeError::usage(format!("block {block:?} gates are not contiguous")));
            }
        }
        if next != n_params {
            return Err(VqeError::usage("layer blocks do not cover every slot"));
        }
        Ok(Self { name: name.into(), n_qubits, n_params, gates, layer_blocks, generators })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn layer_blocks(&self) -> &[Range<usize>] {
        &self.layer_blocks
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    /// Index of the first gate of `block` in the gate list.
    pub fn block_start_gate(&self, block: usize) -> usize {
        self.layer_blocks[block].clone().map(|s| self.generators[s].gate_index).min().unwrap_or(0)
    }

    pub(crate) fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(VqeError::usage(format!("expected {} parameters, got {}", self.n_params, theta.len())));
        }
        Ok(())
    }

    /// Applies gates `range` of the circuit to `state`.
    pub fn apply_gates(&self, state: &mut Statevector, theta: &[f64], range: Range<usize>) -> Result<()> {
        for gate in &self.gates[range] {
            match *gate {
                Gate::Rotation { axis, qubit, slot } => state.apply_rotation(axis, qubit, theta[slot])?,
                Gate::Cnot { control, target } => state.apply_cnot(control, target)?,
            }
        }
        Ok(())
    }

    /// `U(θ)|0…0⟩`.
    pub fn bind(&self, theta: &[f64]) -> Result<Statevector> {
        self.check_theta(theta)?;
        let mut state = Statevector::zero_state(self.n_qubits)?;
        self.apply_gates(&mut state, theta, 0..self.gates.len())?;
        Ok(state)
    }

    /// JSON description (gates + layer blocks) for run provenance.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn rotation_layer(gates: &mut Vec<Gate>, blocks: &mut Vec<Range<usize>>, axis: Axis, n: usize, slot: &mut usize) {
    let start = *slot;
    for qubit in 0..n {
        gates.push(Gate::Rotation { axis, qubit, slot: *slot });
        *slot += 1;
    }
    blocks.push(start..*slot);
}

fn entangle(gates: &mut Vec<Gate>, ent: EntanglementScheme, n: usize) {
    gates.extend(ent.pairs(n).into_iter().map(|(control, target)| Gate::Cnot { control, target }));
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits < 2 {
        return Err(VqeError::config(format!("ansatz needs at least 2 qubits, got {n_qubits}")));
    }
    Ok(())
}

/// `[Ry on every qubit]` followed by `layers` repetitions of
/// `[entanglers; Ry on every qubit]`. `p = N(L+1)`.
pub fn real_amplitudes(n_qubits: usize, layers: usize, ent: EntanglementScheme) -> Result<CircuitTemplate> {
    check_size(n_qubits)?;
    let (mut gates, mut blocks, mut slot) = (Vec::new(), Vec::new(), 0);
    rotation_layer(&mut gates, &mut blocks, Axis::Y, n_qubits, &mut slot);
    for _ in 0..layers {
        entangle(&mut gates, ent, n_qubits);
        rotation_layer(&mut gates, &mut blocks, Axis::Y, n_qubits, &mut slot);
    }
    CircuitTemplate::new(format!("real_amplitudes[{}]", ent.name()), n_qubits, gates, blocks)
}

/// Like [`real_amplitudes`] with an Ry layer followed by an Rz layer in
/// every rotation block. Each of the two sub-layers is its own commuting
/// block. `p = 2N(L+1)`.
pub fn efficient_su2(n_qubits: usize, layers: usize, ent: EntanglementScheme) -> Result<CircuitTemplate> {
    check_size(n_qubits)?;
    let (mut gates, mut blocks, mut slot) = (Vec::new(), Vec::new(), 0);
    let mut su2 = |gates: &mut Vec<Gate>, blocks: &mut Vec<Range<usize>>| {
        rotation_layer(gates, blocks, Axis::Y, n_qubits, &mut slot);
        rotation_layer(gates, blocks, Axis::Z, n_qubits, &mut slot);
    };
    su2(&mut gates, &mut blocks);
    for _ in 0..layers {
        entangle(&mut gates, ent, n_qubits);
        su2(&mut gates, &mut blocks);
    }
    CircuitTemplate::new(format!("efficient_su2[{}]", ent.name()), n_qubits, gates, blocks)
}

/// `p` values drawn i.i.d. uniform on `[-π, π]`.
pub fn initial_parameters<R: Rng + ?Sized>(template: &CircuitTemplate, rng: &mut R) -> Vec<f64> {
    (0..template.n_params()).map(|_| rng.random_range(-PI..=PI)).collect()
}
