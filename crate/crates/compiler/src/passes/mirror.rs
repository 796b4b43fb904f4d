use super::fuse::oriented;
use super::PassError;
use crate::circuit::{merge_1q, Circuit, Gate};
use crate::synth::{two_qubit_gates, IDENTITY_CAN_TOL};
use reqisc_core::gates;
use reqisc_core::weyl::WeylCoordinate;

/// Replaces every two-qubit gate selected by `pick` with its mirror
/// `SWAP·G` and relabels the wires of everything after it, so no SWAP is
/// ever executed. Returns the circuit, whose output permutation records the
/// relabelling, and the accumulated wire permutation itself.
pub fn mirror_where<F>(c: &Circuit, pick: F) -> Result<(Circuit, Vec<usize>), PassError>
where
    F: Fn(&Gate, &WeylCoordinate) -> bool,
{
    let n = c.n_qubits;
    // pos[w]: wire currently carrying what the input had on wire w
    let mut pos: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(c.gates.len());
    let swap = gates::swap();
    for g in &c.gates {
        let moved = g.remapped(&pos);
        if moved.is_two_qubit() {
            if let Some(w) = moved.weyl() {
                if w.l1() > IDENTITY_CAN_TOL && pick(&moved, &w) {
                    let (p, q) = (moved.qubits[0], moved.qubits[1]);
                    let m = &swap * oriented(&moved, p);
                    out.extend(two_qubit_gates(&m, p, q));
                    let (a, b) = (g.qubits[0], g.qubits[1]);
                    pos.swap(a, b);
                    continue;
                }
            }
        }
        out.push(moved);
    }
    let output_permutation = c.output_permutation.iter().map(|&w| pos[w]).collect();
    let circuit = merge_1q(&Circuit { n_qubits: n, gates: out, output_permutation });
    Ok((circuit, pos))
}

/// Mirrors every two-qubit gate whose Weyl coordinate has L1 norm below `r`.
pub fn mirror_near_identity(c: &Circuit, r: f64) -> Result<(Circuit, Vec<usize>), PassError> {
    mirror_where(c, |_, w| w.l1() < r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_state, state_infidelity, statevector_run, GateKind};
    use reqisc_core::weyl::mirror;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nothing_near_identity() {
        let c = Circuit::from_gates(3, vec![Gate::cx(0, 1), Gate::cx(1, 2)]).unwrap();
        let (out, perm) = mirror_near_identity(&c, 0.15).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);
        assert_eq!(out, c);
    }

    #[test]
    fn small_can_becomes_transposition() {
        let small = WeylCoordinate { x: 0.01, y: 0.0, z: 0.0 };
        let c = Circuit::from_gates(2, vec![Gate::can(small, 0, 1)]).unwrap();
        let (out, perm) = mirror_near_identity(&c, 0.15).unwrap();
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(out.output_permutation, vec![1, 0]);
        assert_eq!(out.count_2q(), 1);
        let w = out.gates.iter().find_map(|g| g.weyl()).unwrap();
        assert!(w.class_distance(&mirror(&small)) < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_state(2, &mut rng);
        let a = statevector_run(&c, &s).unwrap();
        let b = statevector_run(&out, &s).unwrap();
        assert!(state_infidelity(&a, &b) < 1e-12);
    }

    #[test]
    fn qft_tails_are_mirrored() {
        // controlled phases with shrinking angles, as in a QFT
        let n = 6;
        let mut gs = Vec::new();
        for i in 0..n {
            gs.push(Gate::single(GateKind::H, i));
            for j in i + 1..n {
                let theta = std::f64::consts::PI / f64::from(1 << (j - i));
                gs.push(Gate::can(WeylCoordinate { x: 0.0, y: 0.0, z: theta / 4.0 }, i, j));
            }
        }
        let c = Circuit::from_gates(n, gs).unwrap();
        let (out, _) = mirror_near_identity(&c, 0.15).unwrap();
        assert_eq!(out.count_2q(), c.count_2q());
        assert!(out.gates.iter().filter_map(|g| g.weyl()).all(|w| w.l1() >= 0.15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_state(n, &mut rng);
        let a = statevector_run(&c, &s).unwrap();
        let b = statevector_run(&out, &s).unwrap();
        assert!(state_infidelity(&a, &b) < 1e-10);
    }
}
