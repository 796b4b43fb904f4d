use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reqisc_compiler::circuit::{random_circuit, random_state, state_infidelity, statevector_run};
use reqisc_compiler::passes::fuse_2q_blocks;
use reqisc_compiler::routing::{build_graph, mirroring_sabre, sabre_route, RoutedCircuit, RoutingOptions};
use reqisc_compiler::Circuit;
use reqisc_core::weyl::mirror;

fn check(c: &Circuit, r: &RoutedCircuit, topo: &str, rng: &mut ChaCha8Rng) {
    let g = build_graph(topo).unwrap();
    for x in r.circuit.gates.iter().filter(|x| x.is_two_qubit()) {
        assert!(g.is_edge(x.qubits[0], x.qubits[1]), "{topo}: gate off the graph");
    }
    let s = random_state(c.n_qubits, rng);
    let a = statevector_run(c, &s).unwrap();
    let b = statevector_run(&r.circuit, &s).unwrap();
    assert!(state_infidelity(&a, &b) < 1e-8);
}

#[test]
fn routed_random_circuits_are_equivalent() {
    for topo in ["chain:6", "grid:2x3"] {
        let g = build_graph(topo).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (mut s_total, mut m_total) = (0, 0);
        for i in 0..100 {
            let c = fuse_2q_blocks(&random_circuit(6, 40, 0.6, &mut rng)).unwrap();
            let opts = RoutingOptions { seed: i, ..Default::default() };
            let s = sabre_route(&c, &g, &opts).unwrap();
            let m = mirroring_sabre(&c, &g, &opts).unwrap();
            check(&c, &s, topo, &mut rng);
            check(&c, &m, topo, &mut rng);
            assert!(m.swaps <= s.swaps, "{topo} circuit {i}: {} > {}", m.swaps, s.swaps);
            s_total += s.swaps;
            m_total += m.swaps;
        }
        assert!(m_total < s_total, "{topo}: absorption never helped");
    }
}

#[test]
fn routing_is_deterministic() {
    let g = build_graph("grid:2x3").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = fuse_2q_blocks(&random_circuit(6, 40, 0.6, &mut rng)).unwrap();
    let opts = RoutingOptions { seed: 3, ..Default::default() };
    let a = mirroring_sabre(&c, &g, &opts).unwrap();
    let b = mirroring_sabre(&c, &g, &opts).unwrap();
    assert_eq!(a.circuit, b.circuit);
    assert_eq!(a.final_mapping, b.final_mapping);
}

#[test]
fn absorbed_gate_is_the_mirror() {
    // the only 2Q gate ahead of the far gate is on (1,2); folding a SWAP
    // into it must land on the mirrored class
    let g = build_graph("chain:3").unwrap();
    let w = reqisc_core::WeylCoordinate { x: 0.3, y: 0.2, z: 0.1 };
    let c = Circuit::from_gates(3, vec![reqisc_compiler::Gate::can(w, 1, 2), reqisc_compiler::Gate::cx(0, 2)]).unwrap();
    let r = mirroring_sabre(&c, &g, &RoutingOptions::default()).unwrap();
    assert_eq!((r.swaps, r.absorptions), (0, 1));
    let first = r.circuit.gates.iter().find_map(|x| x.weyl()).unwrap();
    assert!(first.class_distance(&mirror(&w)) < 1e-9);
}
