use crate::circuit::Circuit;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Sorted support.
    pub qubits: Vec<usize>,
    /// Indices into the circuit's gate list, in circuit order.
    pub gates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub w: usize,
    pub blocks: Vec<Block>,
}

impl Partition {
    pub fn block_sizes(&self, c: &Circuit) -> Vec<usize> {
        self.blocks.iter().map(|b| b.gates.iter().filter(|&&i| c.gates[i].arity() == 2).count()).collect()
    }
}


/// Multi-qubit gates with their direct predecessors among multi-qubit gates.
fn multi_dag(c: &Circuit) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut last: Vec<Option<usize>> = vec![None; c.n_qubits];
    let mut idx = Vec::new();
    let mut preds = Vec::new();
    for (i, g) in c.gates.iter().enumerate() {
        if g.arity() < 2 {
            continue;
        }
        let node = idx.len();
        let mut p: Vec<usize> = g.qubits.iter().filter_map(|&q| last[q]).collect();
        p.sort_unstable();
        p.dedup();
        for &q in &g.qubits {
            last[q] = Some(node);
        }
        idx.push(i);
        preds.push(p);
    }
    (idx, preds)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Free,
    In,
    Tainted,
}

struct Search<'a> {
    c: &'a Circuit,
    idx: &'a [usize],
    preds: &'a [Vec<usize>],
    w: usize,
}

impl Search<'_> {
    fn qubits(&self, v: usize) -> &[usize] {
        &self.c.gates[self.idx[v]].qubits
    }

    /// Convex block on `support` whose first gate is `set[start]`: a gate
    /// inside the support joins unless it depends on a gate that had to be
    /// left out after the block began.
    fn scan(&self, set: &[usize], marks: &mut [Mark], support: &[usize], start: usize) -> usize {
        let mut size = 0;
        for (k, &v) in set.iter().enumerate() {
            let m = if k < start {
                Mark::Free
            } else {
                let (mut any_in, mut any_tainted) = (false, false);
                for &p in &self.preds[v] {
                    match marks[p] {
                        Mark::In => any_in = true,
                        Mark::Tainted => any_tainted = true,
                        Mark::Free => {}
                    }
                }
                let inside = self.qubits(v).iter().all(|q| support.contains(q));
                if inside && !any_tainted {
                    Mark::In
                } else if any_in || any_tainted {
                    Mark::Tainted
                } else {
                    Mark::Free
                }
            };
            if m == Mark::In {
                size += 1;
            }
            marks[v] = m;
        }
        size
    }

    fn candidate_supports(&self, set: &[usize]) -> Vec<Vec<usize>> {
        let mut active: Vec<usize> = set.iter().flat_map(|&v| self.qubits(v).iter().copied()).collect();
        active.sort_unstable();
        active.dedup();
        if active.len() <= self.w {
            return vec![active];
        }
        let mut out: Vec<Vec<usize>> = Vec::new();
        for &v in set {
            let base = self.qubits(v);
            let mut sup: Vec<usize> = base.to_vec();
            sup.sort_unstable();
            if sup.len() == self.w {
                out.push(sup);
                continue;
            }
            // grow by qubits of gates sharing a wire with this one
            let mut extra: Vec<usize> = Vec::new();
            for &u in set {
                let qs = self.qubits(u);
                if qs.iter().any(|q| base.contains(q)) {
                    extra.extend(qs.iter().copied().filter(|q| !base.contains(q)));
                }
            }
            extra.sort_unstable();
            extra.dedup();
            let need = self.w - sup.len();
            for combo in combinations(&extra, need) {
                let mut s = sup.clone();
                s.extend(combo);
                s.sort_unstable();
                out.push(s);
            }
            if extra.len() < need {
                out.push(sup);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Largest block first, then the gates that must precede it and the
    /// gates that must follow it, recursively.
    fn split(&self, set: Vec<usize>, marks: &mut [Mark], blocks: &mut Vec<Block>) {
        if set.is_empty() {
            return;
        }
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        for sup in self.candidate_supports(&set) {
            for (k, &v) in set.iter().enumerate() {
                if !self.qubits(v).iter().all(|q| sup.contains(q)) {
                    continue;
                }
                let size = self.scan(&set, marks, &sup, k);
                if best.as_ref().is_none_or(|(n, _, _)| size > *n) {
                    best = Some((size, k, sup.clone()));
                }
            }
        }
        let (_, start, sup) = best.expect("a nonempty set has a block");
        self.scan(&set, marks, &sup, start);
        let mut before = Vec::new();
        let mut inside = Vec::new();
        let mut after = Vec::new();
        for &v in &set {
            match marks[v] {
                Mark::Free => before.push(v),
                Mark::In => inside.push(v),
                Mark::Tainted => after.push(v),
            }
        }
        self.split(before, marks, blocks);
        let mut qubits: Vec<usize> = inside.iter().flat_map(|&v| self.qubits(v).iter().copied()).collect();
        qubits.sort_unstable();
        qubits.dedup();
        blocks.push(Block { qubits, gates: inside.iter().map(|&v| self.idx[v]).collect() });
        self.split(after, marks, blocks);
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Splits the multi-qubit gates into blocks of at most `w` qubits, taking
/// the largest convex block available on any qubit subset first and then
/// partitioning what has to run before and after it. Single-qubit gates are
/// not assigned.
pub fn partition_blocks(c: &Circuit, w: usize) -> Partition {
    let (idx, preds) = multi_dag(c);
    let wide = idx.iter().map(|&i| c.gates[i].arity()).max().unwrap_or(0);
    let w = w.max(wide);
    let search = Search { c, idx: &idx, preds: &preds, w };
    let mut marks = vec![Mark::Free; idx.len()];
    let mut blocks = Vec::new();
    search.split((0..idx.len()).collect(), &mut marks, &mut blocks);
    Partition { w, blocks }
}

/// Fraction of two-qubit gates that sit in blocks holding more than `m_th`
/// of them. Zero for a partition without two-qubit gates.
pub fn compactness(c: &Circuit, p: &Partition, m_th: usize) -> f64 {
    let sizes = p.block_sizes(c);
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let big: usize = sizes.iter().filter(|&&s| s > m_th).sum();
    big as f64 / total as f64
}

/// Gate sequences of the blocks with single-qubit gates attached: a local
/// gate goes to the block holding the next multi-qubit gate on its wire, or
/// the previous one at the end of the wire. Locals on wires that never see
/// a multi-qubit gate come back separately. Concatenating the leading
/// locals and then each block in order reproduces the circuit.
pub fn blocks_with_locals(c: &Circuit, p: &Partition) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut owner = vec![usize::MAX; c.gates.len()];
    for (bi, b) in p.blocks.iter().enumerate() {
        for &g in &b.gates {
            owner[g] = bi;
        }
    }
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); p.blocks.len()];
    let mut lead = Vec::new();
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); c.n_qubits];
    let mut last_owner: Vec<Option<usize>> = vec![None; c.n_qubits];
    for (i, g) in c.gates.iter().enumerate() {
        if g.arity() == 1 {
            pending[g.qubits[0]].push(i);
            continue;
        }
        let bi = owner[i];
        for &q in &g.qubits {
            lists[bi].append(&mut pending[q]);
            last_owner[q] = Some(bi);
        }
        lists[bi].push(i);
    }
    for (q, rest) in pending.into_iter().enumerate() {
        match last_owner[q] {
            Some(bi) => lists[bi].extend(rest),
            None => lead.extend(rest),
        }
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    lead.sort_unstable();
    (lead, lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_infidelity, random_circuit, Gate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_invariants(c: &Circuit, p: &Partition) {
        let mut seen = vec![false; c.gates.len()];
        let mut pos = vec![0usize; c.gates.len()];
        let mut k = 0;
        for b in &p.blocks {
            assert!(b.qubits.len() <= p.w);
            for &g in &b.gates {
                assert!(!seen[g]);
                seen[g] = true;
                pos[g] = k;
                k += 1;
                assert!(c.gates[g].qubits.iter().all(|q| b.qubits.contains(q)));
            }
        }
        for (i, g) in c.gates.iter().enumerate() {
            assert_eq!(seen[i], g.arity() >= 2);
        }
        // gates sharing a qubit keep their order
        for i in 0..c.gates.len() {
            for j in i + 1..c.gates.len() {
                if seen[i] && seen[j] && c.gates[i].qubits.iter().any(|q| c.gates[j].qubits.contains(q)) {
                    assert!(pos[i] < pos[j]);
                }
            }
        }
    }

    #[test]
    fn single_gate_one_block() {
        let c = Circuit::from_gates(2, vec![Gate::cx(0, 1)]).unwrap();
        let p = partition_blocks(&c, 3);
        assert_eq!(p.blocks.len(), 1);
    }

    #[test]
    fn four_disjoint_pairs_need_several_blocks() {
        let c = Circuit::from_gates(8, (0..4).map(|k| Gate::cx(2 * k, 2 * k + 1)).collect()).unwrap();
        let p = partition_blocks(&c, 3);
        assert!(p.blocks.len() >= 2);
        check_invariants(&c, &p);
    }

    #[test]
    fn compactness_examples() {
        let c = Circuit::from_gates(3, (0..6).map(|k| Gate::cx(k % 2, 2)).collect()).unwrap();
        let p = partition_blocks(&c, 3);
        assert_eq!(compactness(&c, &p, 4), 1.0);
        assert_eq!(compactness(&c, &p, 6), 0.0);
        let manual = Partition {
            w: 3,
            blocks: vec![
                Block { qubits: vec![0, 1], gates: vec![0] },
                Block { qubits: vec![0, 1, 2], gates: (1..9).collect() },
                Block { qubits: vec![0, 1, 2], gates: (9..17).collect() },
            ],
        };
        let c17 = Circuit::from_gates(3, (0..17).map(|_| Gate::cx(0, 1)).collect()).unwrap();
        assert!((compactness(&c17, &manual, 4) - 16.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn random_partitions_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let c = random_circuit(6, 50, 0.6, &mut rng);
            for w in [2, 3] {
                let p = partition_blocks(&c, w);
                check_invariants(&c, &p);
                let (lead, lists) = blocks_with_locals(&c, &p);
                let order: Vec<usize> = lead.iter().chain(lists.iter().flatten()).copied().collect();
                assert_eq!(order.len(), c.gates.len());
                let re = Circuit::from_gates(c.n_qubits, order.iter().map(|&i| c.gates[i].clone()).collect()).unwrap();
                assert!(circuit_infidelity(&c, &re).unwrap() < 1e-10);
            }
        }
    }
}
