//! Compiler passes over Can + U3 circuits and the Red/Full pipelines.

mod compact;
mod fuse;
mod hierarchical;
mod mirror;
mod partition;
mod templates;

pub use crate::circuit::count_distinct_su4;
pub use compact::{circuit_compactness, dag_compact, CompactStats, MAX_SWEEPS};
pub use fuse::{absorb_locals, fuse_2q_blocks};
pub use hierarchical::{hierarchical_synthesis, BlockReport, HierarchicalStats};
pub use mirror::{mirror_near_identity, mirror_where};
pub use partition::{blocks_with_locals, compactness, partition_blocks, Block, Partition};
pub use templates::{assemble, build_entry, extract_irs, ir_signature, Template, TemplateEntry, TemplateLibrary, TEMPLATE_SNAP};

use crate::circuit::{
    decompose_mcx, expand_ccx, infidelity, metrics, unitary_of, Circuit, CircuitError, DurationModel, GateKind, Metrics,
    MAX_UNITARY_QUBITS,
};
use crate::qasm::QasmError;
use crate::synth::SynthError;
use reqisc_core::hamiltonian::NormalForm;
use reqisc_core::scheme::{synthesize_pulse, PulseOptions, SchemeError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PassError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error("template library: {0}")]
    Library(String),
    #[error("template IRs act on three qubits, got {0}")]
    BadIr(usize),
    #[error("gate {0} must be decomposed before this pass")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("compiled circuit differs from the input (infidelity {0:.3e})")]
    Verification(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Templates, fusion and mirroring only; keeps the gate set small.
    Red,
    /// Adds DAG compacting and block re-synthesis.
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub w: usize,
    pub m_th: usize,
    /// Gates whose Weyl coordinate has L1 norm below this are mirrored.
    pub r: f64,
    pub eps: f64,
    /// Gates whose pulse would need a larger drive amplitude are mirrored too.
    pub amp_max: Option<f64>,
    pub seed: u64,
    /// Unitary check on the result when the register is small enough.
    pub verify_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { mode: Mode::Red, w: 3, m_th: 4, r: 0.15, eps: 1e-10, amp_max: None, seed: 0, verify_tol: 1e-6 }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PassError> {
        if !(2..=3).contains(&self.w) {
            return Err(PassError::Config(format!("w must be 2 or 3, got {}", self.w)));
        }
        if self.m_th < 1 {
            return Err(PassError::Config("m_th must be at least 1".into()));
        }
        if !(self.r >= 0.0) {
            return Err(PassError::Config("r must be nonnegative".into()));
        }
        if !(self.eps > 0.0) {
            return Err(PassError::Config("eps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub circuit: Circuit,
    /// Input with Toffolis expanded to CNOTs, timed conventionally.
    pub baseline: Metrics,
    pub output: Metrics,
    pub permutation: Vec<usize>,
    /// Set when the register was small enough to compare unitaries.
    pub infidelity: Option<f64>,
    /// An extra wire was appended to decompose a multi-controlled X.
    pub ancilla_added: bool,
    pub compact: Option<CompactStats>,
    pub hierarchical: Option<HierarchicalStats>,
}

/// Rewrites gates with three or more controls into Toffolis, borrowing an
/// idle wire (in any state) or appending a fresh one when none exists.
pub fn decompose_multi_controlled(c: &Circuit) -> Result<(Circuit, bool), PassError> {
    let needs_extra = c.gates.iter().any(|g| g.kind == GateKind::MCX && g.arity() > 3 && g.arity() == c.n_qubits);
    let n = c.n_qubits + usize::from(needs_extra);
    let mut out = Circuit { n_qubits: n, gates: Vec::new(), output_permutation: (0..n).collect() };
    out.output_permutation[..c.n_qubits].copy_from_slice(&c.output_permutation);
    for g in &c.gates {
        if g.kind != GateKind::MCX {
            out.gates.push(g.clone());
            continue;
        }
        let (controls, target) = g.qubits.split_at(g.arity() - 1);
        let ancilla = (0..n).find(|q| !g.qubits.contains(q));
        out.gates.extend(decompose_mcx(controls, target[0], ancilla)?);
    }
    Ok((out, needs_extra))
}

fn needs_strong_drive(nf: &NormalForm, amp_max: f64, g: &crate::circuit::Gate) -> bool {
    let m = g.matrix();
    matches!(synthesize_pulse(&m, nf, &PulseOptions { amp_max: Some(amp_max) }), Err(SchemeError::AmplitudeExceeded { .. }))
}

/// Red: multi-controlled decomposition, template assembly, fusion, mirroring.
/// Full additionally runs DAG compacting and hierarchical synthesis before
/// mirroring. The result is checked against the input when it has at most
/// seven qubits.
pub fn pipeline(
    c: &Circuit,
    cfg: &PipelineConfig,
    lib: &mut TemplateLibrary,
    model: &DurationModel,
) -> Result<PipelineOutput, PassError> {
    cfg.validate()?;
    let (work, ancilla_added) = decompose_multi_controlled(c)?;
    let baseline = metrics(&expand_ccx(&work), &DurationModel::Conventional);
    let mut cur = assemble(&work, lib)?;
    cur = fuse_2q_blocks(&cur)?;
    let mut compact = None;
    let mut hier = None;
    if cfg.mode == Mode::Full {
        let (next, cs) = dag_compact(&cur, cfg.w, cfg.m_th, cfg.eps.max(crate::synth::EXCHANGE_EPS), cfg.seed)?;
        compact = Some(cs);
        let (next, hs) = hierarchical_synthesis(&next, cfg.w, cfg.m_th, cfg.eps, cfg.seed)?;
        hier = Some(hs);
        cur = next;
    }
    let nf = match (cfg.amp_max, model) {
        (Some(_), DurationModel::Coupling { a, b, c }) => Some(NormalForm::canonical(*a, *b, *c)),
        _ => None,
    };
    let (out, permutation) = mirror_where(&cur, |g, w| {
        w.l1() < cfg.r || nf.as_ref().zip(cfg.amp_max).is_some_and(|(nf, cap)| needs_strong_drive(nf, cap, g))
    })?;
    let infidelity = if work.n_qubits <= MAX_UNITARY_QUBITS {
        let inf = infidelity(&unitary_of(&work)?, &unitary_of(&out)?);
        if inf > cfg.verify_tol {
            return Err(PassError::Verification(inf));
        }
        Some(inf)
    } else {
        None
    };
    Ok(PipelineOutput {
        output: metrics(&out, model),
        circuit: out,
        baseline,
        permutation,
        infidelity,
        ancilla_added,
        compact,
        hierarchical: hier,
    })
}
