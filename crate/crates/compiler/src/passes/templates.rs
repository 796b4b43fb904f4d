use super::fuse::fuse_2q_blocks;
use super::partition::{blocks_with_locals, partition_blocks};
use super::PassError;
use crate::circuit::{infidelity, merge_1q, unitary_of, Circuit, Gate, GateKind};
use crate::qasm::{emit_qasm, parse_qasm};
use crate::synth::{approx_synthesize, two_qubit_gates, SynthOptions};
use rayon::prelude::*;
use reqisc_core::numerics::CMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Grid for template Can parameters.
pub const TEMPLATE_SNAP: f64 = PI / 16.0;

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

#[derive(Debug, Clone)]
pub struct Template {
    pub variant: String,
    pub circuit: Circuit,
    pub infidelity: f64,
}

impl Template {
    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.circuit.gates.iter().filter(|g| g.is_two_qubit()).map(|g| sorted_pair(g.qubits[0], g.qubits[1]))
    }

    pub fn entry(&self) -> Option<(usize, usize)> {
        self.pairs().next()
    }

    pub fn exit(&self) -> Option<(usize, usize)> {
        self.pairs().last()
    }
}

#[derive(Debug, Clone)]
pub struct TemplateEntry {
    /// The IR in canonical labelling.
    pub ir: Circuit,
    pub variants: Vec<Template>,
}

#[derive(Debug, Clone, Default)]
pub struct TemplateLibrary {
    pub entries: BTreeMap<String, TemplateEntry>,
    pub eps: f64,
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn gate_key(g: &Gate) -> String {
    let qs: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
    let params = match &g.kind {
        GateKind::U3 { theta, phi, lambda } => format!("({theta:.10},{phi:.10},{lambda:.10})"),
        GateKind::Can { x, y, z } => format!("({x:.10},{y:.10},{z:.10})"),
        GateKind::RZ(t) | GateKind::RX(t) | GateKind::RY(t) => format!("({t:.10})"),
        GateKind::Unitary(m) => {
            let v: Vec<String> = m.iter().map(|z| format!("{:.8},{:.8}", z.re, z.im)).collect();
            format!("[{}]", v.join(";"))
        }
        _ => String::new(),
    };
    format!("{}{} {}", g.kind.name(), params, qs.join(","))
}

/// Signature of a three-qubit IR that does not depend on how its qubits are
/// labelled, and the relabelling (`perm[local] = canonical`) realising it.
pub fn ir_signature(ir: &Circuit) -> (String, [usize; 3]) {
    let mut best: Option<(String, [usize; 3])> = None;
    for p in PERMS3 {
        let s: Vec<String> = ir.gates.iter().map(|g| gate_key(&g.remapped(&p))).collect();
        let s = s.join(";");
        if best.as_ref().is_none_or(|(b, _)| s < *b) {
            best = Some((s, p));
        }
    }
    best.expect("six relabellings")
}

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Inverse circuit with Can gates kept in canonical form.
fn inverse_circuit(c: &Circuit) -> Circuit {
    let mut gates = Vec::new();
    for g in c.gates.iter().rev() {
        let m = g.matrix().adjoint();
        if g.is_two_qubit() {
            gates.extend(two_qubit_gates(&m, g.qubits[0], g.qubits[1]));
        } else {
            gates.push(Gate::u3_from_matrix(&m, g.qubits[0]));
        }
    }
    merge_1q(&Circuit { n_qubits: c.n_qubits, gates, output_permutation: (0..c.n_qubits).collect() })
}

fn permutation_matrix_conj(u: &CMatrix, p: &[usize; 3]) -> Result<CMatrix, PassError> {
    let c = Circuit { n_qubits: 3, gates: vec![Gate::new(GateKind::Unitary(u.clone()), p.to_vec())?], output_permutation: vec![0, 1, 2] };
    Ok(unitary_of(&c)?)
}

/// Synthesizes the base template for a canonical IR and derives its
/// equivalent variants: the inverse circuit when the IR is self-inverse, and
/// relabellings under which the IR is invariant. Every variant is checked
/// against the IR unitary.
pub fn build_entry(ir: &Circuit, eps: f64, seed: u64) -> Result<TemplateEntry, PassError> {
    let u = unitary_of(ir)?;
    let opts = SynthOptions { eps, seed, snap: Some(TEMPLATE_SNAP), ..Default::default() };
    let base = approx_synthesize(&u, 3, &opts)?;
    let mut candidates: Vec<(String, Circuit)> = vec![("base".into(), base.circuit.clone())];
    let id8 = CMatrix::identity(8, 8);
    if infidelity(&id8, &(&u * &u)) < 1e-12 {
        candidates.push(("reversed".into(), inverse_circuit(&base.circuit)));
    }
    let roots = candidates.clone();
    for p in &PERMS3[1..] {
        if infidelity(&u, &permutation_matrix_conj(&u, p)?) < 1e-12 {
            for (name, c) in &roots {
                let gates = c.gates.iter().map(|g| g.remapped(p)).collect();
                let relabelled = Circuit { n_qubits: 3, gates, output_permutation: vec![0, 1, 2] };
                candidates.push((format!("{name}+perm{}{}{}", p[0], p[1], p[2]), relabelled));
            }
        }
    }
    let mut variants: Vec<Template> = Vec::new();
    for (variant, circuit) in candidates {
        let inf = infidelity(&u, &unitary_of(&circuit)?);
        if inf > eps {
            log::debug!("variant {variant} rejected at {inf:.2e}");
            continue;
        }
        let t = Template { variant, circuit, infidelity: inf };
        let seq: Vec<_> = t.pairs().collect();
        if variants.iter().any(|v| v.pairs().collect::<Vec<_>>() == seq) {
            continue;
        }
        variants.push(t);
    }
    Ok(TemplateEntry { ir: ir.clone(), variants })
}

#[derive(Serialize, Deserialize)]
struct VariantRecord {
    name: String,
    circuit: String,
    coords: Vec<[f64; 3]>,
    infidelity: f64,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    signature: String,
    ir: String,
    variants: Vec<VariantRecord>,
}

#[derive(Serialize, Deserialize)]
struct LibraryRecord {
    schema_version: u32,
    eps: f64,
    entries: Vec<EntryRecord>,
}

impl TemplateLibrary {
    pub fn new(eps: f64) -> Self {
        Self { entries: BTreeMap::new(), eps }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical form of a three-qubit IR with its signature and relabelling.
    pub fn canonical(ir: &Circuit) -> (String, [usize; 3], Circuit) {
        let (sig, p) = ir_signature(ir);
        let gates = ir.gates.iter().map(|g| g.remapped(&p)).collect();
        (sig, p, Circuit { n_qubits: 3, gates, output_permutation: vec![0, 1, 2] })
    }

    /// Builds entries for every distinct IR of the corpus, in parallel.
    pub fn build(corpus: &[Circuit], eps: f64) -> Result<Self, PassError> {
        let mut todo: BTreeMap<String, Circuit> = BTreeMap::new();
        for ir in corpus {
            if ir.n_qubits != 3 {
                return Err(PassError::BadIr(ir.n_qubits));
            }
            let (sig, _, canon) = Self::canonical(ir);
            todo.entry(sig).or_insert(canon);
        }
        let built: Vec<(String, TemplateEntry)> = todo
            .into_par_iter()
            .map(|(sig, ir)| {
                let seed = fnv(&sig);
                build_entry(&ir, eps, seed).map(|e| (sig, e))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { entries: built.into_iter().collect(), eps })
    }

    /// Entry for a canonical IR, synthesized and inserted if missing.
    pub fn get_or_insert(&mut self, sig: &str, canon: &Circuit) -> Result<&TemplateEntry, PassError> {
        if !self.entries.contains_key(sig) {
            log::info!("synthesizing template on demand");
            let e = build_entry(canon, self.eps, fnv(sig))?;
            self.entries.insert(sig.to_string(), e);
        }
        Ok(&self.entries[sig])
    }

    /// All Can coordinates used by the stored templates.
    pub fn coordinates(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        for e in self.entries.values() {
            for v in &e.variants {
                for g in &v.circuit.gates {
                    if let Some(c) = g.weyl() {
                        out.push(c.as_array());
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String, PassError> {
        let mut entries = Vec::new();
        for (sig, e) in &self.entries {
            let mut variants = Vec::new();
            for v in &e.variants {
                variants.push(VariantRecord {
                    name: v.variant.clone(),
                    circuit: emit_qasm(&v.circuit)?,
                    coords: v.circuit.gates.iter().filter_map(|g| g.weyl()).map(|c| c.as_array()).collect(),
                    infidelity: v.infidelity,
                });
            }
            entries.push(EntryRecord { signature: sig.clone(), ir: emit_qasm(&e.ir)?, variants });
        }
        let rec = LibraryRecord { schema_version: 1, eps: self.eps, entries };
        serde_json::to_string_pretty(&rec).map_err(|e| PassError::Library(e.to_string()))
    }

    /// Loads a library and re-verifies every variant against its IR.
    pub fn from_json(text: &str) -> Result<Self, PassError> {
        let rec: LibraryRecord = serde_json::from_str(text).map_err(|e| PassError::Library(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for er in rec.entries {
            let ir = parse_qasm(&er.ir)?;
            let u = unitary_of(&ir)?;
            let mut variants = Vec::new();
            for vr in er.variants {
                let circuit = parse_qasm(&vr.circuit)?;
                let inf = infidelity(&u, &unitary_of(&circuit)?);
                if inf > rec.eps.max(vr.infidelity) * 10.0 + 1e-12 {
                    return Err(PassError::Library(format!("variant {} of {} fails verification ({inf:.2e})", vr.name, er.signature)));
                }
                variants.push(Template { variant: vr.name, circuit, infidelity: inf });
            }
            entries.insert(er.signature, TemplateEntry { ir, variants });
        }
        Ok(Self { entries, eps: rec.eps })
    }
}

/// Three-qubit IR instances of a circuit: blocks of the 3-qubit partition
/// holding a Toffoli, with their local gates, as `(qubits, circuit)`.
pub fn extract_irs(c: &Circuit) -> Vec<(Vec<usize>, Circuit)> {
    let part = partition_blocks(c, 3);
    let (_, lists) = blocks_with_locals(c, &part);
    let mut out = Vec::new();
    for (b, list) in part.blocks.iter().zip(&lists) {
        if let Some(ir) = local_ir(c, &b.qubits, list) {
            out.push((b.qubits.clone(), ir));
        }
    }
    out
}

fn local_ir(c: &Circuit, qubits: &[usize], list: &[usize]) -> Option<Circuit> {
    if qubits.len() != 3 || !list.iter().any(|&i| c.gates[i].kind == GateKind::CCX) {
        return None;
    }
    let mut map = vec![usize::MAX; c.n_qubits];
    for (l, &q) in qubits.iter().enumerate() {
        map[q] = l;
    }
    let gates = list.iter().map(|&i| c.gates[i].remapped(&map)).collect();
    Some(Circuit { n_qubits: 3, gates, output_permutation: vec![0, 1, 2] })
}

enum Item {
    Plain(Vec<Gate>),
    Ir(Vec<Vec<Gate>>),
}

/// Fusions gained by appending `gates` given the last pair seen on each wire.
fn fusions(last: &mut [Option<(usize, usize)>], gates: &[Gate]) -> usize {
    let mut n = 0;
    for g in gates.iter().filter(|g| g.is_two_qubit()) {
        let p = sorted_pair(g.qubits[0], g.qubits[1]);
        if last[p.0] == Some(p) && last[p.1] == Some(p) {
            n += 1;
        }
        last[p.0] = Some(p);
        last[p.1] = Some(p);
    }
    n
}

fn best_next(last: &[Option<(usize, usize)>], item: Option<&Item>) -> usize {
    match item {
        None => 0,
        Some(Item::Plain(g)) => fusions(&mut last.to_vec(), g),
        Some(Item::Ir(vs)) => vs.iter().map(|v| fusions(&mut last.to_vec(), v)).max().unwrap_or(0),
    }
}

/// Replaces every Toffoli-bearing three-qubit block by a library template,
/// choosing among equivalent variants greedily (with one block of
/// lookahead) to maximise same-pair fusions, then fuses the result.
/// Missing templates are synthesized and added to the library.
pub fn assemble(c: &Circuit, lib: &mut TemplateLibrary) -> Result<Circuit, PassError> {
    if let Some(g) = c.gates.iter().find(|g| g.arity() > 3 || g.kind == GateKind::MCX) {
        return Err(PassError::Unsupported(g.kind.name().into()));
    }
    let part = partition_blocks(c, 3);
    let (lead, lists) = blocks_with_locals(c, &part);
    let mut items = Vec::with_capacity(lists.len());
    for (b, list) in part.blocks.iter().zip(&lists) {
        match local_ir(c, &b.qubits, list) {
            Some(ir) => {
                let (sig, p, canon) = TemplateLibrary::canonical(&ir);
                let entry = lib.get_or_insert(&sig, &canon)?;
                // canonical label p[l] belongs to local l
                let mut back = vec![0usize; 3];
                for l in 0..3 {
                    back[p[l]] = b.qubits[l];
                }
                let variants =
                    entry.variants.iter().map(|v| v.circuit.gates.iter().map(|g| g.remapped(&back)).collect()).collect();
                items.push(Item::Ir(variants));
            }
            None => items.push(Item::Plain(list.iter().map(|&i| c.gates[i].clone()).collect())),
        }
    }
    let mut out: Vec<Gate> = lead.iter().map(|&i| c.gates[i].clone()).collect();
    let mut last: Vec<Option<(usize, usize)>> = vec![None; c.n_qubits];
    for k in 0..items.len() {
        let chosen = match &items[k] {
            Item::Plain(g) => g.clone(),
            Item::Ir(vs) => {
                let mut best = (0usize, 0usize);
                for (vi, v) in vs.iter().enumerate() {
                    let mut st = last.clone();
                    let score = fusions(&mut st, v) + best_next(&st, items.get(k + 1));
                    if vi == 0 || score > best.1 {
                        best = (vi, score);
                    }
                }
                vs[best.0].clone()
            }
        };
        fusions(&mut last, &chosen);
        out.extend(chosen);
    }
    let assembled = Circuit { n_qubits: c.n_qubits, gates: out, output_permutation: c.output_permutation.clone() };
    Ok(fuse_2q_blocks(&assembled)?)
}
