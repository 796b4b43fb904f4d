use super::fuse::{absorb_locals, fuse_2q_blocks};
use super::partition::{compactness, partition_blocks};
use super::PassError;
use crate::circuit::{Circuit, Gate};
use crate::synth::exchange_pair;
use std::collections::HashSet;

pub const MAX_SWEEPS: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CompactStats {
    pub moves: usize,
    pub attempts: usize,
    pub sweeps: usize,
}

/// Order with `j` pulled in front of `i`: gates in between that depend on
/// `i` move behind the pair. `None` unless `j` is the next gate on a qubit
/// `i` touches and the only path from `i` to `j` is that direct edge.
fn exchange_order(gates: &[Gate], i: usize, j: usize) -> Option<Vec<usize>> {
    let gi = &gates[i];
    let gj = &gates[j];
    let mut touched: Vec<usize> = gi.qubits.clone();
    let mut before = Vec::new();
    let mut after = Vec::new();
    for k in i + 1..j {
        let gk = &gates[k];
        if gk.qubits.iter().any(|q| touched.contains(q)) {
            if gk.qubits.iter().any(|q| gj.qubits.contains(q)) {
                return None;
            }
            touched.extend(gk.qubits.iter().copied());
            after.push(k);
        } else {
            before.push(k);
        }
    }
    let mut order: Vec<usize> = (0..i).collect();
    order.extend(before);
    order.push(j);
    order.push(i);
    order.extend(after);
    order.extend(j + 1..gates.len());
    Some(order)
}

/// Next gate after `i` acting on `q`.
fn next_on(gates: &[Gate], i: usize, q: usize) -> Option<usize> {
    (i + 1..gates.len()).find(|&k| gates[k].qubits.contains(&q))
}

/// Reorders pairs of two-qubit gates sharing one qubit, through approximate
/// exchange, whenever re-partitioning the reordered circuit puts strictly
/// more gates into blocks above `m_th`. Input and output are Can + U3.
pub fn dag_compact(c: &Circuit, w: usize, m_th: usize, eps: f64, seed: u64) -> Result<(Circuit, CompactStats), PassError> {
    let mut gates = absorb_locals(&fuse_2q_blocks(c)?)?.gates;
    let n = c.n_qubits;
    let mut ids: Vec<usize> = (0..gates.len()).collect();
    let mut next_id = gates.len();
    let mut failed: HashSet<(usize, usize)> = HashSet::new();
    let score = |gs: &[Gate]| {
        let t = Circuit { n_qubits: n, gates: gs.to_vec(), output_permutation: (0..n).collect() };
        compactness(&t, &partition_blocks(&t, w), m_th)
    };
    let mut cur = score(&gates);
    let mut stats = CompactStats::default();
    for _ in 0..MAX_SWEEPS {
        stats.sweeps += 1;
        let mut improved = false;
        let mut i = 0;
        while i < gates.len() {
            if !gates[i].is_two_qubit() {
                i += 1;
                continue;
            }
            let mut moved = false;
            for &q in &gates[i].qubits.clone() {
                let Some(j) = next_on(&gates, i, q) else { continue };
                let gj = &gates[j];
                let shared = gj.qubits.iter().filter(|x| gates[i].qubits.contains(x)).count();
                if !gj.is_two_qubit() || shared != 1 || failed.contains(&(ids[i], ids[j])) {
                    continue;
                }
                let Some(order) = exchange_order(&gates, i, j) else { continue };
                let trial: Vec<Gate> = order.iter().map(|&k| gates[k].clone()).collect();
                let s = score(&trial);
                if s <= cur {
                    continue;
                }
                stats.attempts += 1;
                let pair_seed = seed ^ ((stats.attempts as u64) << 20);
                match exchange_pair(&gates[i], &gates[j], eps, pair_seed)? {
                    Some((gj2, gi2)) => {
                        let mut new_ids: Vec<usize> = order.iter().map(|&k| ids[k]).collect();
                        let mut new_gates = trial;
                        let pos = order.iter().position(|&k| k == j).expect("j is in the order");
                        new_gates[pos] = gj2;
                        new_gates[pos + 1] = gi2;
                        new_ids[pos] = next_id;
                        new_ids[pos + 1] = next_id + 1;
                        next_id += 2;
                        gates = new_gates;
                        ids = new_ids;
                        cur = s;
                        stats.moves += 1;
                        improved = true;
                        moved = true;
                        log::debug!("exchange applied, compactness now {cur:.3}");
                        break;
                    }
                    None => {
                        failed.insert((ids[i], ids[j]));
                    }
                }
            }
            if !moved {
                i += 1;
            }
        }
        if !improved {
            break;
        }
    }
    let out = Circuit { n_qubits: n, gates, output_permutation: c.output_permutation.clone() };
    Ok((fuse_2q_blocks(&out)?, stats))
}

/// Compactness of a circuit under its own partition.
pub fn circuit_compactness(c: &Circuit, w: usize, m_th: usize) -> f64 {
    compactness(c, &partition_blocks(c, w), m_th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_infidelity, GateKind};
    use reqisc_core::gates;
    use reqisc_core::numerics::kron;
    use reqisc_core::weyl::random_su4;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zz(theta: f64, a: usize, b: usize) -> Gate {
        Gate::new(GateKind::Unitary(gates::can(0.0, 0.0, theta)), vec![a, b]).unwrap()
    }

    #[test]
    fn commuting_pair_joins_the_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        // a gate on (2,3) sits between a (1,2) gate and a dense (0,1,2) block
        let mut gs = vec![zz(0.3, 1, 2), zz(0.5, 2, 3)];
        for k in 0..5 {
            let pair = if k % 2 == 0 { vec![0, 1] } else { vec![1, 2] };
            gs.push(Gate::new(GateKind::Unitary(random_su4(&mut rng)), pair).unwrap());
        }
        let c = Circuit::from_gates(4, gs).unwrap();
        let fused = fuse_2q_blocks(&c).unwrap();
        let before = circuit_compactness(&fused, 3, 4);
        let (out, stats) = dag_compact(&c, 3, 4, 1e-8, 1).unwrap();
        let after = circuit_compactness(&out, 3, 4);
        assert!(stats.moves >= 1);
        assert!(after > before, "{before} -> {after}");
        assert!(circuit_infidelity(&c, &out).unwrap() < 1e-8);
    }

    #[test]
    fn no_shared_pairs_unchanged() {
        let c = Circuit::from_gates(4, vec![Gate::cx(0, 1), Gate::cx(2, 3)]).unwrap();
        let (out, stats) = dag_compact(&c, 3, 4, 1e-8, 0).unwrap();
        assert_eq!(stats.moves, 0);
        assert_eq!(out.count_2q(), 2);
    }

    #[test]
    fn order_rejects_indirect_paths() {
        let id = kron(&gates::hadamard(), &gates::hadamard());
        let u = |a, b| Gate::new(GateKind::Unitary(id.clone()), vec![a, b]).unwrap();
        // 0:(0,1) 1:(0,2) 2:(2,1): gate 2 is next on qubit 1 but also hangs off gate 1
        let gs = vec![u(0, 1), u(0, 2), u(2, 1)];
        assert!(exchange_order(&gs, 0, 2).is_none());
        let gs = vec![u(0, 1), u(0, 3), u(1, 2)];
        assert_eq!(exchange_order(&gs, 0, 2).unwrap(), vec![2, 0, 1]);
    }
}
