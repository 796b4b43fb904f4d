use super::fuse::fuse_2q_blocks;
use super::partition::{blocks_with_locals, partition_blocks};
use super::PassError;
use crate::circuit::{unitary_of, Circuit, Gate};
use crate::synth::{approx_synthesize, SynthError, SynthOptions};
use rayon::prelude::*;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockReport {
    pub qubits: Vec<usize>,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, Default)]
pub struct HierarchicalStats {
    pub blocks: Vec<BlockReport>,
    /// Summed infidelity of the accepted replacements.
    pub error: f64,
}

/// Fuses, partitions into `w`-qubit blocks, and re-synthesizes every block
/// holding more than `m_th` two-qubit gates. A block is replaced only when
/// the new circuit has strictly fewer Can gates and meets `eps`.
pub fn hierarchical_synthesis(
    c: &Circuit,
    w: usize,
    m_th: usize,
    eps: f64,
    seed: u64,
) -> Result<(Circuit, HierarchicalStats), PassError> {
    let fused = fuse_2q_blocks(c)?;
    let part = partition_blocks(&fused, w);
    let (lead, lists) = blocks_with_locals(&fused, &part);
    let sizes = part.block_sizes(&fused);

    let jobs: Vec<usize> = (0..lists.len()).filter(|&b| sizes[b] > m_th).collect();
    let results: Vec<(usize, Option<(Vec<Gate>, f64)>)> = jobs
        .par_iter()
        .map(|&b| -> Result<_, PassError> {
            let qubits = &part.blocks[b].qubits;
            let width = qubits.len();
            if !(2..=3).contains(&width) {
                return Ok((b, None));
            }
            let mut local_map = vec![usize::MAX; fused.n_qubits];
            for (l, &q) in qubits.iter().enumerate() {
                local_map[q] = l;
            }
            let gates: Vec<Gate> = lists[b].iter().map(|&i| fused.gates[i].remapped(&local_map)).collect();
            let block = Circuit { n_qubits: width, gates, output_permutation: (0..width).collect() };
            let target = unitary_of(&block)?;
            let opts = SynthOptions { eps, budget: sizes[b] - 1, seed: seed.wrapping_add(b as u64), ..Default::default() };
            match approx_synthesize(&target, width, &opts) {
                Ok(r) if r.gate_count < sizes[b] => {
                    let back: Vec<Gate> = r.circuit.gates.iter().map(|g| g.remapped(qubits)).collect();
                    Ok((b, Some((back, r.infidelity))))
                }
                Ok(_) | Err(SynthError::BudgetExhausted { .. }) => Ok((b, None)),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<_, _>>()?;

    let mut replacement: Vec<Option<Vec<Gate>>> = vec![None; lists.len()];
    let mut stats = HierarchicalStats::default();
    for (b, r) in results {
        let after = r.as_ref().map_or(sizes[b], |(g, _)| g.iter().filter(|g| g.is_two_qubit()).count());
        if let Some((g, inf)) = r {
            stats.error += inf;
            replacement[b] = Some(g);
        }
        stats.blocks.push(BlockReport { qubits: part.blocks[b].qubits.clone(), before: sizes[b], after });
    }
    let mut gates: Vec<Gate> = lead.iter().map(|&i| fused.gates[i].clone()).collect();
    for (b, list) in lists.iter().enumerate() {
        match replacement[b].take() {
            Some(g) => gates.extend(g),
            None => gates.extend(list.iter().map(|&i| fused.gates[i].clone())),
        }
    }
    let out = Circuit { n_qubits: c.n_qubits, gates, output_permutation: c.output_permutation.clone() };
    Ok((fuse_2q_blocks(&out)?, stats))
}
