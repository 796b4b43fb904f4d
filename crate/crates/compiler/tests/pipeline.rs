use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqisc_compiler::circuit::{circuit_duration, circuit_infidelity, random_circuit};
use reqisc_compiler::passes::{count_distinct_su4, pipeline, Mode, PipelineConfig, TemplateLibrary};
use reqisc_compiler::{parse_qasm, Circuit, DurationModel, Gate};
use std::f64::consts::{PI, SQRT_2};

fn corpus(n_circuits: usize, seed: u64) -> Vec<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_circuits)
        .map(|_| {
            let n = rng.random_range(2..=5);
            let mut c = random_circuit(n, rng.random_range(8..24), 0.5, &mut rng);
            if n >= 3 && rng.random_bool(0.5) {
                let at = rng.random_range(0..=c.gates.len());
                c.gates.insert(at, Gate::ccx(0, 1, 2));
            }
            c
        })
        .collect()
}

#[test]
fn red_and_full_preserve_semantics() {
    let mut lib = TemplateLibrary::new(1e-10);
    for (i, c) in corpus(10, 3).iter().enumerate() {
        for mode in [Mode::Red, Mode::Full] {
            let cfg = PipelineConfig { mode, seed: i as u64, ..Default::default() };
            let out = pipeline(c, &cfg, &mut lib, &DurationModel::Conventional).unwrap();
            // checked independently of the pipeline's own verification
            let inf = circuit_infidelity(c, &out.circuit).unwrap();
            assert!(inf < 1e-6, "circuit {i} {mode:?}: {inf:e}");
            assert!(out.output.count2q <= out.baseline.count2q, "circuit {i} {mode:?}");
        }
    }
}

/// Every source-to-sink path of the dependency graph, enumerated.
fn longest_path_brute(c: &Circuit, model: &DurationModel) -> f64 {
    let n = c.gates.len();
    let mut succs = vec![Vec::new(); n];
    let mut has_pred = vec![false; n];
    for i in 0..n {
        for j in i + 1..n {
            let shared = c.gates[i].qubits.iter().any(|q| c.gates[j].qubits.contains(q));
            let blocked = (i + 1..j).any(|k| {
                c.gates[k].qubits.iter().any(|q| c.gates[i].qubits.contains(q) && c.gates[j].qubits.contains(q))
            });
            if shared && !blocked {
                succs[i].push(j);
                has_pred[j] = true;
            }
        }
    }
    fn walk(i: usize, c: &Circuit, succs: &[Vec<usize>], model: &DurationModel) -> f64 {
        let here = model.gate_time(&c.gates[i]);
        here + succs[i].iter().map(|&s| walk(s, c, succs, model)).fold(0.0, f64::max)
    }
    (0..n).filter(|&i| !has_pred[i]).map(|i| walk(i, c, &succs, model)).fold(0.0, f64::max)
}

#[test]
fn duration_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let models = [DurationModel::Conventional, DurationModel::Coupling { a: 0.5, b: 0.5, c: 0.0 }];
    for _ in 0..30 {
        let n = rng.random_range(2..=4);
        let c = random_circuit(n, rng.random_range(1..14), 0.6, &mut rng);
        let c = reqisc_compiler::passes::fuse_2q_blocks(&c).unwrap();
        for m in &models {
            let got = circuit_duration(&c, m);
            let want = longest_path_brute(&c, m);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }
}

#[test]
fn sequential_cnots_duration() {
    let gs = (0..12).map(|i| if i % 2 == 0 { Gate::cx(0, 1) } else { Gate::cx(1, 0) }).collect();
    let c = Circuit::from_gates(2, gs).unwrap();
    let t = circuit_duration(&c, &DurationModel::Conventional);
    assert!((t - 12.0 * PI / SQRT_2).abs() < 1e-9);
    assert_eq!(format!("{t:.1}"), "26.7");
}

#[test]
fn toffoli_program_keeps_few_distinct_gates() {
    let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[5];\n\
        ccx q[0],q[1],q[2];\nccx q[1],q[2],q[3];\ncx q[3],q[4];\nccx q[2],q[3],q[4];\n\
        ccx q[0],q[1],q[2];\nh q[0];\nccx q[4],q[0],q[1];\nccx q[1],q[3],q[0];\n";
    let c = parse_qasm(src).unwrap();
    let mut lib = TemplateLibrary::new(1e-10);
    let out = pipeline(&c, &PipelineConfig::default(), &mut lib, &DurationModel::Conventional).unwrap();
    assert!(count_distinct_su4(&out.circuit, 1e-6) < 10);
    assert!(out.infidelity.unwrap() < 1e-6);
}
