use crate::circuit::{ccx_to_cx, merge_1q, Circuit, CircuitError, Gate, GateKind};
use crate::synth::two_qubit_gates;
use reqisc_core::gates;
use reqisc_core::numerics::{kron, CMatrix};

/// `m` as seen with the pair order reversed.
pub(crate) fn flip_pair(m: &CMatrix) -> CMatrix {
    let s = gates::swap();
    &s * m * &s
}

/// Matrix of a two-qubit gate in the frame `(a, b)`.
pub(crate) fn oriented(g: &Gate, a: usize) -> CMatrix {
    let m = g.matrix();
    if g.qubits[0] == a {
        m
    } else {
        flip_pair(&m)
    }
}

fn local_on(m: &CMatrix, first: bool) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    if first {
        kron(m, &id)
    } else {
        kron(&id, m)
    }
}

struct OpenBlock {
    a: usize,
    b: usize,
    m: CMatrix,
}

enum Slot {
    Gate(Gate),
    Block(usize),
}

/// Consolidates every run of gates on one qubit pair, together with the
/// single-qubit gates interleaved on those qubits, into one Can plus U3
/// gates. Toffolis are expanded to CNOTs first; wider gates are rejected.
pub fn fuse_2q_blocks(c: &Circuit) -> Result<Circuit, CircuitError> {
    let n = c.n_qubits;
    let mut blocks: Vec<OpenBlock> = Vec::new();
    let mut open: Vec<Option<usize>> = vec![None; n];
    let mut slots: Vec<Slot> = Vec::new();
    let mut expanded = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        match (&g.kind, g.arity()) {
            (GateKind::CCX, _) => expanded.extend(ccx_to_cx(g.qubits[0], g.qubits[1], g.qubits[2])),
            (_, 1 | 2) => expanded.push(g.clone()),
            _ => return Err(CircuitError::NotEmittable(format!("{}-qubit {} in two-qubit fusion", g.arity(), g.kind.name()))),
        }
    }
    for g in expanded {
        if g.arity() == 1 {
            let q = g.qubits[0];
            match open[q] {
                Some(bi) => {
                    let blk = &mut blocks[bi];
                    let l = local_on(&g.matrix(), blk.a == q);
                    blk.m = l * &blk.m;
                }
                None => slots.push(Slot::Gate(g)),
            }
            continue;
        }
        let (p, q) = (g.qubits[0], g.qubits[1]);
        if let (Some(x), Some(y)) = (open[p], open[q]) {
            if x == y {
                let blk = &mut blocks[x];
                blk.m = oriented(&g, blk.a) * &blk.m;
                continue;
            }
        }
        for w in [p, q] {
            if let Some(bi) = open[w] {
                let (a, b) = (blocks[bi].a, blocks[bi].b);
                open[a] = None;
                open[b] = None;
            }
        }
        blocks.push(OpenBlock { a: p, b: q, m: g.matrix() });
        let bi = blocks.len() - 1;
        open[p] = Some(bi);
        open[q] = Some(bi);
        slots.push(Slot::Block(bi));
    }
    let mut out = Vec::with_capacity(slots.len() * 3);
    for s in slots {
        match s {
            Slot::Gate(g) => out.push(g),
            Slot::Block(bi) => {
                let blk = &blocks[bi];
                out.extend(two_qubit_gates(&blk.m, blk.a, blk.b));
            }
        }
    }
    Ok(merge_1q(&Circuit { n_qubits: n, gates: out, output_permutation: c.output_permutation.clone() }))
}

/// Every two-qubit gate becomes a dense block with the neighbouring
/// single-qubit gates folded in: a one-qubit gate joins the next two-qubit
/// gate on its wire, or the previous one at the end of the wire. Wires
/// without two-qubit gates keep a single U3.
pub fn absorb_locals(c: &Circuit) -> Result<Circuit, CircuitError> {
    let n = c.n_qubits;
    let mut pending: Vec<Option<CMatrix>> = vec![None; n];
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut out: Vec<Gate> = Vec::new();
    for g in &c.gates {
        match g.arity() {
            1 => {
                let q = g.qubits[0];
                let m = g.matrix();
                pending[q] = Some(match pending[q].take() {
                    Some(p) => m * p,
                    None => m,
                });
            }
            2 => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                let id = CMatrix::identity(2, 2);
                let la = pending[a].take().unwrap_or_else(|| id.clone());
                let lb = pending[b].take().unwrap_or(id);
                let m = g.matrix() * kron(&la, &lb);
                last[a] = Some(out.len());
                last[b] = Some(out.len());
                out.push(Gate::new(GateKind::Unitary(m), vec![a, b])?);
            }
            k => return Err(CircuitError::NotEmittable(format!("{k}-qubit gate in two-qubit form"))),
        }
    }
    let mut lead = Vec::new();
    for q in 0..n {
        if let Some(m) = pending[q].take() {
            match last[q] {
                Some(i) => {
                    let g = &mut out[i];
                    let first = g.qubits[0] == q;
                    if let GateKind::Unitary(u) = &mut g.kind {
                        *u = local_on(&m, first) * &*u;
                    }
                }
                None => lead.push(Gate::u3_from_matrix(&m, q)),
            }
        }
    }
    lead.extend(out);
    Ok(Circuit { n_qubits: n, gates: lead, output_permutation: c.output_permutation.clone() })
}
