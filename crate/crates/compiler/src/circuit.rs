//! Circuit IR over U3 / Can / named gates, its dependency DAG, simulation and metrics.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of a basis index,
//! i.e. qubit 0 is the most significant. Multi-qubit gate matrices act on
//! their qubit list in the same order.

use nalgebra::DVector;
use reqisc_core::gates;
use reqisc_core::numerics::{c64, max_abs, pauli, CMatrix, C64};
use reqisc_core::scheme::optimal_time;
use reqisc_core::weyl::{canonical_decompose, canonicalize_coordinate, WeylCoordinate};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use thiserror::Error;

/// Largest register for which [`unitary_of`] builds a dense matrix.
pub const MAX_UNITARY_QUBITS: usize = 7;
/// Largest register for [`statevector_run`].
pub const MAX_STATEVECTOR_QUBITS: usize = 16;
/// Default tolerance for clustering Weyl coordinates.
pub const DISTINCT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {name} expects {expected} qubits, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("gate {0} acts on repeated qubits")]
    RepeatedQubit(String),
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("{what} needs at most {max} qubits, circuit has {n}")]
    TooLarge { what: &'static str, max: usize, n: usize },
    #[error("unitary blocks may span at most 3 qubits")]
    BlockTooWide,
    #[error("output permutation is not a bijection")]
    BadPermutation,
    #[error("{0} cannot be written as OpenQASM")]
    NotEmittable(String),
    #[error("multi-controlled X with {0} controls needs an ancilla qubit")]
    NeedsAncilla(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    U3 { theta: f64, phi: f64, lambda: f64 },
    Can { x: f64, y: f64, z: f64 },
    CX,
    CZ,
    CCX,
    /// X on the last qubit controlled by all others.
    MCX,
    SWAP,
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    RZ(f64),
    RX(f64),
    RY(f64),
    Unitary(CMatrix),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::U3 { .. } => "u3",
            GateKind::Can { .. } => "can",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
            GateKind::CCX => "ccx",
            GateKind::MCX => "mcx",
            GateKind::SWAP => "swap",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::RZ(_) => "rz",
            GateKind::RX(_) => "rx",
            GateKind::RY(_) => "ry",
            GateKind::Unitary(_) => "unitary",
        }
    }

    /// Fixed arity, or `None` for variable-width kinds.
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Can { .. } | GateKind::CX | GateKind::CZ | GateKind::SWAP => Some(2),
            GateKind::CCX => Some(3),
            GateKind::MCX => None,
            GateKind::Unitary(m) => Some(m.nrows().trailing_zeros() as usize),
            _ => Some(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Self, CircuitError> {
        if let Some(k) = kind.arity() {
            if k != qubits.len() {
                return Err(CircuitError::Arity { name: kind.name().into(), expected: k, got: qubits.len() });
            }
        } else if qubits.is_empty() {
            return Err(CircuitError::Arity { name: kind.name().into(), expected: 1, got: 0 });
        }
        if let GateKind::Unitary(m) = &kind {
            if !m.nrows().is_power_of_two() || m.nrows() != m.ncols() {
                return Err(CircuitError::Arity { name: "unitary".into(), expected: 0, got: qubits.len() });
            }
            if qubits.len() > 3 {
                return Err(CircuitError::BlockTooWide);
            }
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(CircuitError::RepeatedQubit(kind.name().into()));
            }
        }
        Ok(Self { kind, qubits })
    }

    pub fn u3(theta: f64, phi: f64, lambda: f64, q: usize) -> Self {
        Self { kind: GateKind::U3 { theta, phi, lambda }, qubits: vec![q] }
    }

    /// U3 gate equal to `m` up to global phase.
    pub fn u3_from_matrix(m: &CMatrix, q: usize) -> Self {
        let (theta, phi, lambda, _) = gates::u3_params(m);
        Self::u3(theta, phi, lambda, q)
    }

    pub fn can(c: WeylCoordinate, a: usize, b: usize) -> Self {
        Self { kind: GateKind::Can { x: c.x, y: c.y, z: c.z }, qubits: vec![a, b] }
    }

    pub fn cx(c: usize, t: usize) -> Self {
        Self { kind: GateKind::CX, qubits: vec![c, t] }
    }

    pub fn ccx(c0: usize, c1: usize, t: usize) -> Self {
        Self { kind: GateKind::CCX, qubits: vec![c0, c1, t] }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Self { kind, qubits: vec![q] }
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }

    pub fn matrix(&self) -> CMatrix {
        match &self.kind {
            GateKind::U3 { theta, phi, lambda } => gates::u3(*theta, *phi, *lambda),
            GateKind::Can { x, y, z } => gates::can(*x, *y, *z),
            GateKind::CX => gates::cnot(),
            GateKind::CZ => gates::cz(),
            GateKind::CCX => gates::ccx(),
            GateKind::MCX => {
                let d = 1usize << self.qubits.len();
                let mut m = CMatrix::identity(d, d);
                m[(d - 2, d - 2)] = c64(0.0, 0.0);
                m[(d - 1, d - 1)] = c64(0.0, 0.0);
                m[(d - 2, d - 1)] = c64(1.0, 0.0);
                m[(d - 1, d - 2)] = c64(1.0, 0.0);
                m
            }
            GateKind::SWAP => gates::swap(),
            GateKind::H => gates::hadamard(),
            GateKind::X => pauli(1),
            GateKind::Y => pauli(2),
            GateKind::Z => pauli(3),
            GateKind::S => gates::s_gate(),
            GateKind::Sdg => gates::phase(-FRAC_PI_2),
            GateKind::T => gates::t_gate(),
            GateKind::Tdg => gates::phase(-FRAC_PI_4),
            GateKind::RZ(t) => gates::rz(*t),
            GateKind::RX(t) => gates::rx(*t),
            GateKind::RY(t) => gates::ry(*t),
            GateKind::Unitary(m) => m.clone(),
        }
    }

    /// Weyl coordinate of a two-qubit gate.
    pub fn weyl(&self) -> Option<WeylCoordinate> {
        if !self.is_two_qubit() {
            return None;
        }
        Some(match &self.kind {
            GateKind::Can { x, y, z } => canonicalize_coordinate(*x, *y, *z),
            GateKind::CX | GateKind::CZ => WeylCoordinate::CNOT,
            GateKind::SWAP => WeylCoordinate::SWAP,
            _ => canonical_decompose(&self.matrix()).ok()?.coordinate,
        })
    }

    pub fn remapped(&self, map: &[usize]) -> Self {
        Self { kind: self.kind.clone(), qubits: self.qubits.iter().map(|&q| map[q]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// `output_permutation[l]` is the wire holding logical qubit `l` at the end.
    pub output_permutation: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), output_permutation: (0..n_qubits).collect() }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> Result<(), CircuitError> {
        for &q in &g.qubits {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n: self.n_qubits });
            }
        }
        self.gates.push(g);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn count_2q(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn has_identity_permutation(&self) -> bool {
        self.output_permutation.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Same gates, identity output permutation.
    pub fn without_permutation(&self) -> Self {
        Self { n_qubits: self.n_qubits, gates: self.gates.clone(), output_permutation: (0..self.n_qubits).collect() }
    }

    pub fn check_permutation(&self) -> Result<(), CircuitError> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if self.output_permutation.len() != n {
            return Err(CircuitError::BadPermutation);
        }
        for &p in &self.output_permutation {
            if p >= n || seen[p] {
                return Err(CircuitError::BadPermutation);
            }
            seen[p] = true;
        }
        Ok(())
    }

    /// Appends `other`, whose wires are already in this circuit's frame, and
    /// composes the permutations.
    pub fn extend_with(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
        self.output_permutation =
            self.output_permutation.iter().map(|&w| other.output_permutation[w]).collect();
    }
}

/// Dependency DAG: an arc joins consecutive gates sharing a qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitDag {
    pub n_qubits: usize,
    pub nodes: Vec<Gate>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    pub output_permutation: Vec<usize>,
}

impl CircuitDag {
    pub fn from_circuit(c: &Circuit) -> Self {
        let n = c.gates.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let mut last: Vec<Option<usize>> = vec![None; c.n_qubits];
        for (i, g) in c.gates.iter().enumerate() {
            for &q in &g.qubits {
                if let Some(p) = last[q] {
                    if !preds[i].contains(&p) {
                        preds[i].push(p);
                        succs[p].push(i);
                    }
                }
                last[q] = Some(i);
            }
        }
        Self {
            n_qubits: c.n_qubits,
            nodes: c.gates.clone(),
            preds,
            succs,
            output_permutation: c.output_permutation.clone(),
        }
    }

    /// Kahn's algorithm, smallest ready index first (stable w.r.t. the source order).
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = self.preds.iter().map(|p| p.len()).collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
            (0..n).filter(|&i| indeg[i] == 0).map(std::cmp::Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(i)) = ready.pop() {
            order.push(i);
            for &s in &self.succs[i] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.push(std::cmp::Reverse(s));
                }
            }
        }
        order
    }

    pub fn to_circuit(&self) -> Circuit {
        let gates = self.topological_order().into_iter().map(|i| self.nodes[i].clone()).collect();
        Circuit { n_qubits: self.n_qubits, gates, output_permutation: self.output_permutation.clone() }
    }

    /// Longest path where node `i` weighs `w(i)`.
    pub fn longest_path<F: Fn(usize) -> f64>(&self, w: F) -> f64 {
        let mut best = vec![0.0f64; self.nodes.len()];
        let mut overall = 0.0f64;
        for i in self.topological_order() {
            let start = self.preds[i].iter().map(|&p| best[p]).fold(0.0, f64::max);
            best[i] = start + w(i);
            overall = overall.max(best[i]);
        }
        overall
    }
}

/// How two-qubit gates are timed in [`metrics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DurationModel {
    /// Every two-qubit gate takes `π/√2` (CNOT-based baseline).
    Conventional,
    /// Time-optimal duration under canonical coupling coefficients `(a, b, c)`.
    Coupling { a: f64, b: f64, c: f64 },
}

impl DurationModel {
    pub const CONVENTIONAL_TAU: f64 = PI / SQRT_2;

    pub fn gate_time(&self, g: &Gate) -> f64 {
        if !g.is_two_qubit() {
            return 0.0;
        }
        match self {
            DurationModel::Conventional => Self::CONVENTIONAL_TAU,
            DurationModel::Coupling { a, b, c } => match g.weyl() {
                Some(w) => optimal_time(&w, (*a, *b, *c)).tau,
                None => 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub count2q: usize,
    pub depth2q: usize,
    #[serde(rename = "duration_ginv")]
    pub duration: f64,
    pub distinct_su4: usize,
}

/// Critical-path duration: one-qubit gates take no time.
pub fn circuit_duration(c: &Circuit, model: &DurationModel) -> f64 {
    let mut t = vec![0.0f64; c.n_qubits];
    for g in &c.gates {
        let start = g.qubits.iter().map(|&q| t[q]).fold(0.0, f64::max);
        let end = start + model.gate_time(g);
        if g.arity() > 1 {
            for &q in &g.qubits {
                t[q] = end;
            }
        }
    }
    t.into_iter().fold(0.0, f64::max)
}

pub fn depth_2q(c: &Circuit) -> usize {
    let mut d = vec![0usize; c.n_qubits];
    for g in &c.gates {
        if g.arity() < 2 {
            continue;
        }
        let start = g.qubits.iter().map(|&q| d[q]).max().unwrap_or(0);
        let end = start + usize::from(g.is_two_qubit());
        for &q in &g.qubits {
            d[q] = end;
        }
    }
    d.into_iter().max().unwrap_or(0)
}

/// Number of distinct two-qubit classes, clustering coordinates greedily in
/// order of first appearance under a max-norm tolerance.
pub fn count_distinct_su4(c: &Circuit, tol: f64) -> usize {
    let mut reps: Vec<WeylCoordinate> = Vec::new();
    for w in c.gates.iter().filter_map(|g| g.weyl()) {
        if !reps.iter().any(|r| r.class_distance(&w) <= tol) {
            reps.push(w);
        }
    }
    reps.len()
}

pub fn metrics(c: &Circuit, model: &DurationModel) -> Metrics {
    Metrics {
        count2q: c.count_2q(),
        depth2q: depth_2q(c),
        duration: circuit_duration(c, model),
        distinct_su4: count_distinct_su4(c, DISTINCT_TOL),
    }
}

/// Applies the `2^k × 2^k` matrix `m` on `qubits` of an `n`-qubit state in place.
pub fn apply_matrix(state: &mut [C64], n: usize, m: &CMatrix, qubits: &[usize]) {
    let k = qubits.len();
    let dim = 1usize << k;
    let bits: Vec<usize> = qubits.iter().map(|&q| n - 1 - q).collect();
    let offsets: Vec<usize> = (0..dim)
        .map(|local| {
            (0..k).fold(0usize, |acc, j| {
                if local >> (k - 1 - j) & 1 == 1 {
                    acc | 1 << bits[j]
                } else {
                    acc
                }
            })
        })
        .collect();
    let mask: usize = bits.iter().fold(0, |acc, &b| acc | 1 << b);
    let mut buf = vec![c64(0.0, 0.0); dim];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, &off) in offsets.iter().enumerate() {
            buf[l] = state[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = c64(0.0, 0.0);
            for (l, &v) in buf.iter().enumerate() {
                acc += m[(r, l)] * v;
            }
            state[base | off] = acc;
        }
    }
}

/// Moves the content of wire `perm[l]` back to wire `l`.
fn apply_inverse_permutation(state: &[C64], n: usize, perm: &[usize]) -> Vec<C64> {
    let mut out = vec![c64(0.0, 0.0); state.len()];
    for (idx, &amp) in state.iter().enumerate() {
        let mut j = 0usize;
        for (l, &w) in perm.iter().enumerate() {
            if idx >> (n - 1 - w) & 1 == 1 {
                j |= 1 << (n - 1 - l);
            }
        }
        out[j] = amp;
    }
    out
}

/// Moves the content of wire `l` to wire `perm[l]`.
pub fn permute_state(state: &[C64], n: usize, perm: &[usize]) -> Vec<C64> {
    let mut out = vec![c64(0.0, 0.0); state.len()];
    for (idx, &amp) in state.iter().enumerate() {
        let mut j = 0usize;
        for (l, &w) in perm.iter().enumerate() {
            if idx >> (n - 1 - l) & 1 == 1 {
                j |= 1 << (n - 1 - w);
            }
        }
        out[j] = amp;
    }
    out
}

/// Runs the circuit on `state` and returns the logical output state.
pub fn statevector_run(c: &Circuit, state: &[C64]) -> Result<Vec<C64>, CircuitError> {
    let n = c.n_qubits;
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(CircuitError::TooLarge { what: "statevector simulation", max: MAX_STATEVECTOR_QUBITS, n });
    }
    c.check_permutation()?;
    let mut s = state.to_vec();
    for g in &c.gates {
        apply_matrix(&mut s, n, &g.matrix(), &g.qubits);
    }
    if c.has_identity_permutation() {
        Ok(s)
    } else {
        Ok(apply_inverse_permutation(&s, n, &c.output_permutation))
    }
}

/// Dense unitary of the circuit, including its output permutation.
pub fn unitary_of(c: &Circuit) -> Result<CMatrix, CircuitError> {
    let n = c.n_qubits;
    if n > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooLarge { what: "unitary construction", max: MAX_UNITARY_QUBITS, n });
    }
    c.check_permutation()?;
    let dim = 1usize << n;
    let mut u = CMatrix::identity(dim, dim);
    let mats: Vec<CMatrix> = c.gates.iter().map(|g| g.matrix()).collect();
    for j in 0..dim {
        let mut col: Vec<C64> = u.column(j).iter().cloned().collect();
        for (g, m) in c.gates.iter().zip(&mats) {
            apply_matrix(&mut col, n, m, &g.qubits);
        }
        if !c.has_identity_permutation() {
            col = apply_inverse_permutation(&col, n, &c.output_permutation);
        }
        u.set_column(j, &DVector::from_vec(col));
    }
    Ok(u)
}

/// `1 - |Tr(U†V)| / N`.
pub fn infidelity(u: &CMatrix, v: &CMatrix) -> f64 {
    reqisc_core::scheme::infidelity(u, v)
}

/// Infidelity between the unitaries of two circuits on the same register.
pub fn circuit_infidelity(a: &Circuit, b: &Circuit) -> Result<f64, CircuitError> {
    Ok(infidelity(&unitary_of(a)?, &unitary_of(b)?))
}

/// Remaps every gate's wire `q` to `perm[q]`; a logical qubit that ended on
/// wire `w` now ends on `perm[w]`.
pub fn rewire(c: &Circuit, perm: &[usize]) -> Result<Circuit, CircuitError> {
    let probe = Circuit { n_qubits: c.n_qubits, gates: vec![], output_permutation: perm.to_vec() };
    probe.check_permutation()?;
    Ok(Circuit {
        n_qubits: c.n_qubits,
        gates: c.gates.iter().map(|g| g.remapped(perm)).collect(),
        output_permutation: c.output_permutation.iter().map(|&w| perm[w]).collect(),
    })
}

/// Multi-controlled X as CCX/CX gates.
///
/// Three or more controls need one extra qubit `ancilla`, which may be in any
/// state (it is restored). The controls are split in halves that act as each
/// other's borrowed ancillas, recursively.
pub fn decompose_mcx(controls: &[usize], target: usize, ancilla: Option<usize>) -> Result<Vec<Gate>, CircuitError> {
    match controls.len() {
        0 => Ok(vec![Gate::single(GateKind::X, target)]),
        1 => Ok(vec![Gate::cx(controls[0], target)]),
        2 => Ok(vec![Gate::ccx(controls[0], controls[1], target)]),
        k => {
            let a = ancilla.ok_or(CircuitError::NeedsAncilla(k))?;
            let m1 = k.div_ceil(2);
            let (c1, c2) = controls.split_at(m1);
            // t ^= AND(c2, a); a ^= AND(c1); t ^= AND(c2, a); a ^= AND(c1)
            let mut c2a = c2.to_vec();
            c2a.push(a);
            let upper = decompose_mcx(&c2a, target, c1.first().copied())?;
            let lower = decompose_mcx(c1, a, c2.first().copied().or(Some(target)))?;
            let mut out = Vec::new();
            for _ in 0..2 {
                out.extend(upper.iter().cloned());
                out.extend(lower.iter().cloned());
            }
            Ok(out)
        }
    }
}

/// Standard six-CNOT expansion of a Toffoli into CX, H and T gates.
pub fn ccx_to_cx(c0: usize, c1: usize, t: usize) -> Vec<Gate> {
    use GateKind::*;
    vec![
        Gate::single(H, t),
        Gate::cx(c1, t),
        Gate::single(Tdg, t),
        Gate::cx(c0, t),
        Gate::single(T, t),
        Gate::cx(c1, t),
        Gate::single(Tdg, t),
        Gate::cx(c0, t),
        Gate::single(T, c1),
        Gate::single(T, t),
        Gate::single(H, t),
        Gate::cx(c0, c1),
        Gate::single(T, c0),
        Gate::single(Tdg, c1),
        Gate::cx(c0, c1),
    ]
}

/// Replaces CCX gates by their CNOT expansion.
pub fn expand_ccx(c: &Circuit) -> Circuit {
    let mut out = Circuit { n_qubits: c.n_qubits, gates: Vec::new(), output_permutation: c.output_permutation.clone() };
    for g in &c.gates {
        if g.kind == GateKind::CCX {
            out.gates.extend(ccx_to_cx(g.qubits[0], g.qubits[1], g.qubits[2]));
        } else {
            out.gates.push(g.clone());
        }
    }
    out
}

/// Merges runs of single-qubit gates into one U3 each, dropping identities.
pub fn merge_1q(c: &Circuit) -> Circuit {
    let n = c.n_qubits;
    let mut pending: Vec<Option<CMatrix>> = vec![None; n];
    let mut out = Vec::with_capacity(c.gates.len());
    let flush = |q: usize, pending: &mut Vec<Option<CMatrix>>, out: &mut Vec<Gate>| {
        if let Some(m) = pending[q].take() {
            if !is_identity_up_to_phase(&m, 1e-12) {
                out.push(Gate::u3_from_matrix(&m, q));
            }
        }
    };
    for g in &c.gates {
        if g.arity() == 1 {
            let q = g.qubits[0];
            let m = g.matrix();
            pending[q] = Some(match pending[q].take() {
                Some(p) => m * p,
                None => m,
            });
        } else {
            for &q in &g.qubits {
                flush(q, &mut pending, &mut out);
            }
            out.push(g.clone());
        }
    }
    for q in 0..n {
        flush(q, &mut pending, &mut out);
    }
    Circuit { n_qubits: n, gates: out, output_permutation: c.output_permutation.clone() }
}

pub fn is_identity_up_to_phase(m: &CMatrix, tol: f64) -> bool {
    let d = m.nrows();
    let ph = m[(0, 0)];
    if (ph.norm() - 1.0).abs() > tol {
        return false;
    }
    max_abs(&(m / ph - CMatrix::identity(d, d))) < tol
}

/// Normalized random state for equivalence checks.
pub fn random_state<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut v: Vec<C64> = (0..1usize << n)
        .map(|_| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// `1 - |⟨a|b⟩|²`.
pub fn state_infidelity(a: &[C64], b: &[C64]) -> f64 {
    let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (1.0 - ov.norm_sqr()).max(0.0)
}

/// Random circuit of CX and single-qubit rotations.
pub fn random_circuit<R: rand::Rng + ?Sized>(n: usize, n_gates: usize, p2q: f64, rng: &mut R) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..n_gates {
        if n >= 2 && rng.random_bool(p2q) {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            c.gates.push(Gate::cx(a, b));
        } else {
            let q = rng.random_range(0..n);
            let kind = match rng.random_range(0..4) {
                0 => GateKind::H,
                1 => GateKind::T,
                2 => GateKind::RZ(rng.random_range(-PI..PI)),
                _ => GateKind::RX(rng.random_range(-PI..PI)),
            };
            c.gates.push(Gate::single(kind, q));
        }
    }
    c
}
