//! Numerical synthesis of 2- and 3-qubit unitaries into Can + U3 circuits.

use crate::circuit::{apply_matrix, infidelity, is_identity_up_to_phase, merge_1q, unitary_of, Circuit, Gate, GateKind};
use crate::kernel;
use crate::optimize::{minimize, LbfgsOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use reqisc_core::gates;
use reqisc_core::numerics::{kron, CMatrix};
use reqisc_core::weyl::canonical_decompose;
use std::f64::consts::{FRAC_PI_4, PI};
use thiserror::Error;

pub const SYNTH_EPS: f64 = 1e-10;
pub const EXCHANGE_EPS: f64 = 1e-8;
pub const DEFAULT_BUDGET: usize = 7;
pub const DEFAULT_RESTARTS: usize = 12;
/// Starts per placement before the search narrows to the best placements.
const SCREEN_STARTS: usize = 2;
const SCREEN_KEEP: usize = 8;
/// Coordinates below this L1 norm count as an identity-class Can.
pub const IDENTITY_CAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Isa {
    Su4,
    Cnot,
}

/// Parameter-counting lower bound on the number of two-qubit gates for a
/// generic `n`-qubit unitary.
pub fn lower_bound(n: u32, isa: Isa) -> u64 {
    let num = 4u64.pow(n) - 3 * n as u64 - 1;
    let den = match isa {
        Isa::Su4 => 9,
        Isa::Cnot => 4,
    };
    num.div_ceil(den)
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("synthesis width must be 2 or 3, got {0}")]
    BadWidth(usize),
    #[error("target must be a {0}x{0} matrix")]
    BadShape(usize),
    #[error("no circuit within the gate budget reached the tolerance (best infidelity {:.3e})", best.infidelity)]
    BudgetExhausted { best: Box<SynthesisResult> },
    #[error("gates must share exactly one qubit")]
    NotAdjacent,
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub eps: f64,
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// When set, Can parameters of a successful circuit are pulled one at a
    /// time onto multiples of this step wherever the tolerance still holds,
    /// which keeps the set of distinct two-qubit gates small.
    pub snap: Option<f64>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { eps: SYNTH_EPS, budget: DEFAULT_BUDGET, restarts: DEFAULT_RESTARTS, seed: 0, max_iter: 2000, snap: None }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub circuit: Circuit,
    pub infidelity: f64,
    pub gate_count: usize,
    pub restarts_used: usize,
}

/// A fixed gate layout: one U3 per qubit, then for every placement a Can on
/// that pair followed by a U3 on each of its qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ansatz {
    pub width: usize,
    pub placements: Vec<(usize, usize)>,
}

enum Op {
    One { q: usize, m: CMatrix },
    Two { p: (usize, usize), m: CMatrix },
}

impl Op {
    fn matrix(&self) -> &CMatrix {
        match self {
            Op::One { m, .. } | Op::Two { m, .. } => m,
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match self {
            Op::One { q, .. } => vec![*q],
            Op::Two { p, .. } => vec![p.0, p.1],
        }
    }
}

impl Ansatz {
    pub fn new(width: usize, placements: Vec<(usize, usize)>) -> Self {
        Self { width, placements }
    }

    pub fn n_params(&self) -> usize {
        3 * self.width + 9 * self.placements.len()
    }

    fn ops(&self, x: &[f64]) -> Vec<Op> {
        let mut ops = Vec::with_capacity(self.width + self.placements.len());
        for q in 0..self.width {
            ops.push(Op::One { q, m: gates::u3(x[3 * q], x[3 * q + 1], x[3 * q + 2]) });
        }
        for (b, &pair) in self.placements.iter().enumerate() {
            let o = 3 * self.width + 9 * b;
            let can = gates::can(x[o], x[o + 1], x[o + 2]);
            let ua = gates::u3(x[o + 3], x[o + 4], x[o + 5]);
            let ub = gates::u3(x[o + 6], x[o + 7], x[o + 8]);
            ops.push(Op::Two { p: pair, m: kron(&ua, &ub) * can });
        }
        ops
    }

    /// Dense unitary of the ansatz at `x`.
    pub fn unitary(&self, x: &[f64]) -> CMatrix {
        let dim = 1usize << self.width;
        let mut v = CMatrix::identity(dim, dim);
        for op in self.ops(x) {
            left_apply(&mut v, self.width, op.matrix(), &op.qubits());
        }
        v
    }

    /// `1 - |Tr(U†V)|²/64` and its gradient; three-qubit ansatze only.
    pub fn cost_grad(&self, target: &CMatrix, x: &[f64], grad: &mut [f64]) -> f64 {
        assert_eq!(self.width, 3, "numerical synthesis runs on three qubits");
        kernel::cost_grad(&self.placements, &kernel::to_m8(target), x, grad)
    }

    /// The ansatz as a circuit: initial U3s, then each Can block in canonical
    /// form, with single-qubit runs merged.
    pub fn to_circuit(&self, x: &[f64]) -> Circuit {
        let mut c = Circuit::new(self.width);
        for op in self.ops(x) {
            match op {
                Op::One { q, m, .. } => c.gates.push(Gate::u3_from_matrix(&m, q)),
                Op::Two { p, m, .. } => c.gates.extend(two_qubit_gates(&m, p.0, p.1)),
            }
        }
        merge_1q(&c)
    }

    /// The blocks as 4x4 matrices, with the leading single-qubit layer folded
    /// into the first block that touches each qubit. Qubits never touched by
    /// a block keep their U3 in the second return value.
    pub fn folded_blocks(&self, x: &[f64]) -> (Vec<CMatrix>, Vec<Option<CMatrix>>) {
        let ops = self.ops(x);
        let mut pending: Vec<Option<CMatrix>> = ops[..self.width]
            .iter()
            .map(|op| Some(op.matrix().clone()))
            .collect();
        let mut blocks = Vec::new();
        for op in &ops[self.width..] {
            if let Op::Two { p, m, .. } = op {
                let id = CMatrix::identity(2, 2);
                let a = pending[p.0].take().unwrap_or_else(|| id.clone());
                let b = pending[p.1].take().unwrap_or(id);
                blocks.push(m * kron(&a, &b));
            }
        }
        (blocks, pending)
    }
}

fn left_apply(m: &mut CMatrix, n: usize, g: &CMatrix, qubits: &[usize]) {
    let dim = 1usize << n;
    let data = m.as_mut_slice();
    for col in data.chunks_mut(dim) {
        apply_matrix(col, n, g, qubits);
    }
}

/// Can + U3 gates for a 4x4 unitary on `(a, b)`; the Can is dropped when it
/// is identity-class.
pub fn two_qubit_gates(u: &CMatrix, a: usize, b: usize) -> Vec<Gate> {
    let d = match canonical_decompose(u) {
        Ok(d) => d,
        Err(_) => return vec![Gate::new(GateKind::Unitary(u.clone()), vec![a, b]).expect("4x4 block")],
    };
    let local = |m: &CMatrix, q: usize| (!is_identity_up_to_phase(m, 1e-13)).then(|| Gate::u3_from_matrix(m, q));
    if d.coordinate.l1() < IDENTITY_CAN_TOL {
        return [local(&(&d.v1 * &d.v3), a), local(&(&d.v2 * &d.v4), b)].into_iter().flatten().collect();
    }
    [
        local(&d.v3, a),
        local(&d.v4, b),
        Some(Gate::can(d.coordinate, a, b)),
        local(&d.v1, a),
        local(&d.v2, b),
    ]
    .into_iter()
    .flatten()
    .collect()
}

fn count_cans(c: &Circuit) -> usize {
    c.gates.iter().filter(|g| g.is_two_qubit()).count()
}

/// Sequences of `k` pairs over three qubits with no pair repeated back to back.
pub fn placements_w3(k: usize) -> Vec<Vec<(usize, usize)>> {
    const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];
    let mut out: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * 3);
        for seq in &out {
            for p in PAIRS {
                if seq.last() != Some(&p) {
                    let mut s = seq.clone();
                    s.push(p);
                    next.push(s);
                }
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone)]
struct Run {
    placement: usize,
    restart: usize,
    cost: f64,
    x: Vec<f64>,
}

fn random_start(ansatz: &Ansatz, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = Vec::with_capacity(ansatz.n_params());
    for _ in 0..ansatz.width {
        for _ in 0..3 {
            x.push(rng.random_range(-PI..PI));
        }
    }
    for _ in &ansatz.placements {
        for _ in 0..3 {
            x.push(rng.random_range(-FRAC_PI_4..FRAC_PI_4));
        }
        for _ in 0..6 {
            x.push(rng.random_range(-PI..PI));
        }
    }
    x
}

fn run_one(ansatz: &Ansatz, target: &kernel::M8, seed: u64, eps: f64, max_iter: usize) -> (f64, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = random_start(ansatz, &mut rng);
    let opts = LbfgsOptions { target: (eps * 1e-3).max(1e-16), max_iter, ..Default::default() };
    let r = minimize(|x, g| kernel::cost_grad(&ansatz.placements, target, x, g), x0, &opts);
    (r.f, r.x)
}

fn stream_seed(base: u64, count: usize, placement: usize, restart: usize) -> u64 {
    let mut h = base ^ 0x9e37_79b9_7f4a_7c15;
    for v in [count as u64, placement as u64, restart as u64] {
        h = (h ^ v).wrapping_mul(0x1000_0000_01b3).rotate_left(17);
    }
    h
}

fn best_run(runs: &[Run]) -> Option<&Run> {
    runs.iter().min_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.placement.cmp(&b.placement))
            .then(a.restart.cmp(&b.restart))
    })
}

/// Moves Can parameters onto the grid `step·ℤ`, nearest first, keeping each
/// move only if re-optimizing the free parameters stays within tolerance.
fn snap_parameters(ansatz: &Ansatz, target: &kernel::M8, mut x: Vec<f64>, step: f64, opts: &SynthOptions) -> Vec<f64> {
    let mut order: Vec<(f64, usize)> = (0..ansatz.placements.len())
        .flat_map(|b| (0..3).map(move |k| 3 * ansatz.width + 9 * b + k))
        .map(|i| (((x[i] / step).round() * step - x[i]).abs(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut fixed = vec![false; x.len()];
    let lopts = LbfgsOptions { target: (opts.eps * 1e-3).max(1e-16), max_iter: opts.max_iter, ..Default::default() };
    for (_, i) in order {
        let mut trial = x.clone();
        trial[i] = (x[i] / step).round() * step;
        fixed[i] = true;
        let free: Vec<usize> = (0..x.len()).filter(|&j| !fixed[j]).collect();
        let mut full_grad = vec![0.0; x.len()];
        let base = trial.clone();
        let r = minimize(
            |y, g| {
                let mut full = base.clone();
                for (k, &j) in free.iter().enumerate() {
                    full[j] = y[k];
                }
                let f = kernel::cost_grad(&ansatz.placements, target, &full, &mut full_grad);
                for (k, &j) in free.iter().enumerate() {
                    g[k] = full_grad[j];
                }
                f
            },
            free.iter().map(|&j| trial[j]).collect(),
            &lopts,
        );
        if r.f <= opts.eps {
            for (k, &j) in free.iter().enumerate() {
                trial[j] = r.x[k];
            }
            x = trial;
        } else {
            fixed[i] = false;
        }
    }
    x
}

fn finish(ansatz: &Ansatz, x: &[f64], target: &CMatrix, restarts_used: usize) -> Result<SynthesisResult, SynthError> {
    let circuit = ansatz.to_circuit(x);
    let inf = infidelity(target, &unitary_of(&circuit)?);
    Ok(SynthesisResult { gate_count: count_cans(&circuit), circuit, infidelity: inf, restarts_used })
}

/// Jobs per batch; a batch that reaches the tolerance ends the search. Fixed
/// so that results do not depend on the thread count.
const CHUNK: usize = 8;

/// Best circuit over a fixed list of candidate layouts with the same gate
/// count. Every placement first gets a couple of starts; the most promising
/// placements then get the remaining restarts.
pub fn synthesize_placements(
    target: &CMatrix,
    width: usize,
    candidates: &[Vec<(usize, usize)>],
    opts: &SynthOptions,
) -> Result<SynthesisResult, SynthError> {
    let target8 = kernel::to_m8(target);
    let count = candidates.first().map_or(0, |c| c.len());
    let ansatze: Vec<Ansatz> = candidates.iter().map(|p| Ansatz::new(width, p.clone())).collect();
    let eps = opts.eps;
    let mut runs: Vec<Run> = Vec::new();
    let hit = |runs: &[Run]| best_run(runs).is_some_and(|r| r.cost <= eps);
    let run_jobs = |jobs: Vec<(usize, usize)>, runs: &mut Vec<Run>| {
        for chunk in jobs.chunks(CHUNK) {
            let done: Vec<Run> = chunk
                .par_iter()
                .map(|&(pi, ri)| {
                    let seed = stream_seed(opts.seed, count, pi, ri);
                    let (cost, x) = run_one(&ansatze[pi], &target8, seed, eps, opts.max_iter);
                    Run { placement: pi, restart: ri, cost, x }
                })
                .collect();
            runs.extend(done);
            if hit(runs) {
                return;
            }
        }
    };
    let restarts = opts.restarts.max(1);
    let screen = if ansatze.len() > 1 { SCREEN_STARTS.min(restarts) } else { restarts };
    run_jobs((0..screen).flat_map(|r| (0..ansatze.len()).map(move |p| (p, r))).collect(), &mut runs);
    if !hit(&runs) && screen < restarts {
        let mut ranked: Vec<(f64, usize)> = (0..ansatze.len())
            .map(|p| {
                let best = runs.iter().filter(|r| r.placement == p).map(|r| r.cost).fold(f64::INFINITY, f64::min);
                (best, p)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let keep: Vec<usize> = ranked.iter().take(SCREEN_KEEP).map(|&(_, p)| p).collect();
        run_jobs((screen..restarts).flat_map(|r| keep.iter().map(move |&p| (p, r))).collect(), &mut runs);
    }
    let best = best_run(&runs).expect("at least one run");
    let (pi, x) = match opts.snap {
        Some(step) if best.cost <= eps => snap_any(&ansatze, &target8, &runs, best.placement, count, step, opts),
        _ => (best.placement, best.x.clone()),
    };
    finish(&ansatze[pi], &x, target, runs.len())
}

fn off_grid(ansatz: &Ansatz, x: &[f64], step: f64) -> usize {
    (0..ansatz.placements.len())
        .flat_map(|b| (0..3).map(move |k| 3 * ansatz.width + 9 * b + k))
        .filter(|&i| ((x[i] / step).round() * step - x[i]).abs() > 1e-9)
        .count()
}

/// Snaps the converged runs in order of cost, then fresh restarts on the
/// best layout, until every Can parameter lands on the grid. Falls back to
/// the snap leaving the fewest parameters off the grid.
fn snap_any(
    ansatze: &[Ansatz],
    target: &kernel::M8,
    runs: &[Run],
    placement: usize,
    count: usize,
    step: f64,
    opts: &SynthOptions,
) -> (usize, Vec<f64>) {
    let mut done: Vec<&Run> = runs.iter().filter(|r| r.cost <= opts.eps).collect();
    done.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.placement.cmp(&b.placement)).then(a.restart.cmp(&b.restart)));
    let mut fallback: Option<(usize, usize, Vec<f64>)> = None;
    let mut consider = |pi: usize, x: Vec<f64>| -> Option<(usize, Vec<f64>)> {
        let snapped = snap_parameters(&ansatze[pi], target, x, step, opts);
        let off = off_grid(&ansatze[pi], &snapped, step);
        if off == 0 {
            return Some((pi, snapped));
        }
        if fallback.as_ref().is_none_or(|f| off < f.0) {
            fallback = Some((off, pi, snapped));
        }
        None
    };
    for r in done {
        if let Some(hit) = consider(r.placement, r.x.clone()) {
            return hit;
        }
    }
    let base = opts.restarts.max(1);
    let extra: Vec<usize> = (base..2 * base).collect();
    for chunk in extra.chunks(CHUNK) {
        let fresh: Vec<(f64, Vec<f64>)> = chunk
            .par_iter()
            .map(|&ri| run_one(&ansatze[placement], target, stream_seed(opts.seed, count, placement, ri), opts.eps, opts.max_iter))
            .collect();
        for (cost, x) in fresh {
            if cost <= opts.eps {
                if let Some(hit) = consider(placement, x) {
                    return hit;
                }
            }
        }
    }
    let (_, pi, x) = fallback.expect("the best run converged");
    (pi, x)
}

/// Fewest-gate Can + U3 circuit within `opts.eps`, using at most
/// `opts.budget` Can gates. Two-qubit targets are handled exactly by the
/// canonical decomposition.
///
/// A circuit with `k` gates is also one with `k + 1` (the extra Can may be
/// the identity), so feasibility is monotone in the count. The search walks
/// down from the budget and stops at the first count that fails, which gives
/// the same answer as trying counts upward from zero at a fraction of the
/// cost, since failing counts are the expensive ones.
pub fn approx_synthesize(target: &CMatrix, width: usize, opts: &SynthOptions) -> Result<SynthesisResult, SynthError> {
    if !(2..=3).contains(&width) {
        return Err(SynthError::BadWidth(width));
    }
    let dim = 1usize << width;
    if target.nrows() != dim || target.ncols() != dim {
        return Err(SynthError::BadShape(dim));
    }
    if width == 2 {
        let circuit = merge_1q(&Circuit { n_qubits: 2, gates: two_qubit_gates(target, 0, 1), output_permutation: vec![0, 1] });
        let inf = infidelity(target, &unitary_of(&circuit)?);
        let r = SynthesisResult { gate_count: count_cans(&circuit), circuit, infidelity: inf, restarts_used: 0 };
        return if inf <= opts.eps { Ok(r) } else { Err(SynthError::BudgetExhausted { best: Box::new(r) }) };
    }
    let mut found: Option<SynthesisResult> = None;
    let mut used = 0;
    let mut k = opts.budget;
    loop {
        let mut r = synthesize_placements(target, 3, &placements_w3(k), opts)?;
        used += r.restarts_used;
        r.restarts_used = used;
        log::debug!("w=3 count {k}: infidelity {:.3e}", r.infidelity);
        if r.infidelity > opts.eps {
            return match found {
                Some(mut f) => {
                    f.restarts_used = used;
                    Ok(f)
                }
                None => Err(SynthError::BudgetExhausted { best: Box::new(r) }),
            };
        }
        let reached = r.gate_count.min(k);
        found = Some(r);
        if reached == 0 {
            let mut f = found.expect("just set");
            f.restarts_used = used;
            return Ok(f);
        }
        k = reached - 1;
    }
}

fn embed3(g: &Gate, map: &[(usize, usize)]) -> (CMatrix, Vec<usize>) {
    let local: Vec<usize> = g
        .qubits
        .iter()
        .map(|q| map.iter().find(|(k, _)| k == q).map(|&(_, v)| v).expect("qubit in map"))
        .collect();
    (g.matrix(), local)
}

/// Tries to reorder two gates that share one qubit: returns `(g2', g1')` with
/// `g1'·g2' ≈ g2·g1` within `eps`, each as a dense 4x4 block on the original
/// qubits of `g2` and `g1` respectively.
pub fn exchange_pair(g1: &Gate, g2: &Gate, eps: f64, seed: u64) -> Result<Option<(Gate, Gate)>, SynthError> {
    if !g1.is_two_qubit() || !g2.is_two_qubit() {
        return Err(SynthError::NotAdjacent);
    }
    let shared: Vec<usize> = g1.qubits.iter().copied().filter(|q| g2.qubits.contains(q)).collect();
    if shared.len() != 1 {
        return Err(SynthError::NotAdjacent);
    }
    let b = shared[0];
    let a = g1.qubits.iter().copied().find(|&q| q != b).expect("two distinct qubits");
    let c = g2.qubits.iter().copied().find(|&q| q != b).expect("two distinct qubits");
    let map = [(a, 0), (b, 1), (c, 2)];
    let mut target = CMatrix::identity(8, 8);
    for g in [g1, g2] {
        let (m, qs) = embed3(g, &map);
        left_apply(&mut target, 3, &m, &qs);
    }
    let as_block = |m: CMatrix, qs: Vec<usize>| Gate::new(GateKind::Unitary(m), qs).expect("4x4 block");

    // exactly commuting pairs need no search
    let (m1, q1) = embed3(g1, &map);
    let (m2, q2) = embed3(g2, &map);
    let mut swapped = CMatrix::identity(8, 8);
    left_apply(&mut swapped, 3, &m2, &q2);
    left_apply(&mut swapped, 3, &m1, &q1);
    if infidelity(&target, &swapped) <= eps {
        return Ok(Some((g2.clone(), g1.clone())));
    }

    let opts = SynthOptions { eps, seed, ..Default::default() };
    let r = synthesize_placements(&target, 3, &[vec![(1, 2), (0, 1)]], &opts)?;
    if r.infidelity > eps {
        return Ok(None);
    }
    // rebuild the two blocks from the found circuit so that all single-qubit
    // gates are absorbed
    let mut blocks: Vec<CMatrix> = vec![CMatrix::identity(4, 4), CMatrix::identity(4, 4)];
    let id = CMatrix::identity(2, 2);
    let mut seen_two = 0;
    for g in &r.circuit.gates {
        let m = g.matrix();
        if g.is_two_qubit() {
            let i = if g.qubits.contains(&2) { 0 } else { 1 };
            let oriented = if g.qubits[0] < g.qubits[1] { m } else { orient_swap(&m) };
            blocks[i] = oriented * &blocks[i];
            seen_two += 1;
            continue;
        }
        let q = g.qubits[0];
        // locals before the first block go to the block that will touch them
        // first; afterwards to the last block touching them
        let into_first = match q {
            2 => true,
            1 => seen_two == 0,
            _ => false,
        };
        let (i, pos) = if into_first { (0, if q == 1 { 0 } else { 1 }) } else { (1, if q == 0 { 0 } else { 1 }) };
        let local = if pos == 0 { kron(&m, &id) } else { kron(&id, &m) };
        blocks[i] = local * &blocks[i];
    }
    let mut check = CMatrix::identity(8, 8);
    left_apply(&mut check, 3, &blocks[0], &[1, 2]);
    left_apply(&mut check, 3, &blocks[1], &[0, 1]);
    let inf = infidelity(&target, &check);
    if inf > eps {
        log::debug!("exchange block folding lost accuracy: {inf:.3e}");
        return Ok(None);
    }
    Ok(Some((as_block(blocks[0].clone(), vec![b, c]), as_block(blocks[1].clone(), vec![a, b]))))
}

fn orient_swap(m: &CMatrix) -> CMatrix {
    let s = gates::swap();
    &s * m * &s
}

#[cfg(test)]
mod tests {
    use super::*;
    use reqisc_core::numerics::{max_abs, C64};
    use reqisc_core::weyl::{random_su4, random_unitary};

    #[test]
    fn lower_bounds() {
        assert_eq!(lower_bound(2, Isa::Su4), 1);
        assert_eq!(lower_bound(3, Isa::Su4), 6);
        assert_eq!(lower_bound(4, Isa::Su4), 27);
        assert_eq!(lower_bound(2, Isa::Cnot), 3);
        assert_eq!(lower_bound(3, Isa::Cnot), 14);
    }

    #[test]
    fn infidelity_examples() {
        let u = CMatrix::identity(4, 4);
        assert_eq!(infidelity(&u, &u), 0.0);
        assert!(infidelity(&u, &(&u * C64::from_polar(1.0, 0.7))) < 1e-15);
        assert!((infidelity(&u, &gates::cz()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let target = random_unitary(8, &mut rng);
        let ans = Ansatz::new(3, vec![(0, 1), (1, 2), (0, 2)]);
        let x = random_start(&ans, &mut rng);
        let mut g = vec![0.0; ans.n_params()];
        let f0 = ans.cost_grad(&target, &x, &mut g);
        let direct = 1.0 - infidelity_sq(&target, &ans.unitary(&x));
        assert!((f0 - direct).abs() < 1e-12);
        let h = 1e-6;
        let mut scratch = vec![0.0; ans.n_params()];
        for i in 0..ans.n_params() {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (ans.cost_grad(&target, &xp, &mut scratch) - ans.cost_grad(&target, &xm, &mut scratch)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "param {i}: {fd} vs {}", g[i]);
        }
    }

    fn infidelity_sq(u: &CMatrix, v: &CMatrix) -> f64 {
        let t = (u.adjoint() * v).trace();
        t.norm_sqr() / (u.nrows() * u.nrows()) as f64
    }

    #[test]
    fn two_qubit_targets_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let u = random_su4(&mut rng);
            let r = approx_synthesize(&u, 2, &SynthOptions::default()).unwrap();
            assert_eq!(r.gate_count, 1);
            assert_eq!(r.restarts_used, 0);
            assert!(r.infidelity < 1e-12);
        }
        let local = kron(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        assert_eq!(approx_synthesize(&local, 2, &SynthOptions::default()).unwrap().gate_count, 0);
    }

    #[test]
    fn identity_needs_no_gates() {
        let r = approx_synthesize(&CMatrix::identity(8, 8), 3, &SynthOptions::default()).unwrap();
        assert_eq!(r.gate_count, 0);
        assert!(r.infidelity < 1e-10);
    }

    #[test]
    fn two_block_target_found_with_two_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ans = Ansatz::new(3, vec![(0, 1), (1, 2)]);
        let x = random_start(&ans, &mut rng);
        let target = ans.unitary(&x);
        let r = approx_synthesize(&target, 3, &SynthOptions::default()).unwrap();
        assert!(r.gate_count <= 2);
        assert!(r.infidelity <= SYNTH_EPS);
        let re = infidelity(&target, &unitary_of(&r.circuit).unwrap());
        assert!(re <= SYNTH_EPS);
    }

    #[test]
    fn placements_have_no_immediate_repeats() {
        for k in 0..6 {
            let ps = placements_w3(k);
            assert_eq!(ps.len(), if k == 0 { 1 } else { 3 << (k - 1) });
            assert!(ps.iter().all(|p| p.windows(2).all(|w| w[0] != w[1])));
        }
    }

    #[test]
    fn folded_blocks_reproduce_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ans = Ansatz::new(3, vec![(0, 1), (1, 2), (0, 1)]);
        let x = random_start(&ans, &mut rng);
        let (blocks, rest) = ans.folded_blocks(&x);
        assert!(rest.iter().all(Option::is_none));
        let mut v = CMatrix::identity(8, 8);
        for (b, p) in blocks.iter().zip(&ans.placements) {
            left_apply(&mut v, 3, b, &[p.0, p.1]);
        }
        assert!(max_abs(&(v - ans.unitary(&x))) < 1e-12);
    }

    #[test]
    fn exchange_rejects_bad_pairs() {
        let g = Gate::can(reqisc_core::WeylCoordinate::CNOT, 0, 1);
        assert!(exchange_pair(&g, &g, EXCHANGE_EPS, 0).is_err());
        let far = Gate::can(reqisc_core::WeylCoordinate::CNOT, 2, 3);
        assert!(exchange_pair(&g, &far, EXCHANGE_EPS, 0).is_err());
    }

    #[test]
    fn zz_interactions_commute() {
        let g1 = Gate::new(GateKind::Can { x: 0.0, y: 0.0, z: 0.3 }, vec![0, 1]).unwrap();
        let g2 = Gate::new(GateKind::Can { x: 0.0, y: 0.0, z: 0.7 }, vec![1, 2]).unwrap();
        let (a, b) = exchange_pair(&g1, &g2, 1e-10, 0).unwrap().unwrap();
        let fwd = unitary_of(&Circuit::from_gates(3, vec![g1, g2]).unwrap()).unwrap();
        let rev = unitary_of(&Circuit::from_gates(3, vec![a, b]).unwrap()).unwrap();
        assert!(infidelity(&fwd, &rev) < 1e-10);
    }

    #[test]
    fn exchange_generic_pair_is_success_or_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in 0..3 {
            let g1 = Gate::new(GateKind::Unitary(random_su4(&mut rng)), vec![0, 1]).unwrap();
            let g2 = Gate::new(GateKind::Unitary(random_su4(&mut rng)), vec![1, 2]).unwrap();
            if let Some((a, b)) = exchange_pair(&g1, &g2, EXCHANGE_EPS, s).unwrap() {
                assert_eq!(a.qubits, vec![1, 2]);
                assert_eq!(b.qubits, vec![0, 1]);
                let fwd = unitary_of(&Circuit::from_gates(3, vec![g1, g2]).unwrap()).unwrap();
                let rev = unitary_of(&Circuit::from_gates(3, vec![a, b]).unwrap()).unwrap();
                assert!(infidelity(&fwd, &rev) <= EXCHANGE_EPS);
            }
        }
    }
}
