use std::path::PathBuf;
use std::process::Command;

fn reqisc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_reqisc")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn scratch(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

const PROGRAM: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\n\
    ccx q[0],q[1],q[2];\ncx q[2],q[3];\nccx q[1],q[2],q[3];\nh q[0];\ncx q[0],q[3];\n";

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn compile_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let input = scratch(&dir, "in.qasm");
    let compiled = scratch(&dir, "out.qasm");
    let report = scratch(&dir, "report.json");
    let lib = scratch(&dir, "lib.json");
    std::fs::write(&input, PROGRAM).unwrap();
    let (code, stdout, err) = reqisc(&[
        "compile", "--input", input.to_str().unwrap(), "--mode", "full", "--coupling", "xy",
        "--templates", lib.to_str().unwrap(), "--emit", compiled.to_str().unwrap(),
        "--out", report.to_str().unwrap(), "--json", "--seed", "3",
    ]);
    assert_eq!(code, 0, "{err}");
    let v = json(&stdout);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["seed"], 3);
    assert!(v["after"]["count2q"].as_u64().unwrap() <= v["before"]["count2q"].as_u64().unwrap());
    assert!(v["infidelity"].as_f64().unwrap() < 1e-6);
    assert_eq!(json(&std::fs::read_to_string(&report).unwrap()), v);
    assert!(lib.exists());

    let (code, stdout, _) = reqisc(&["verify", "--original", input.to_str().unwrap(), "--compiled", compiled.to_str().unwrap(), "--json"]);
    assert_eq!(code, 0);
    assert_eq!(json(&stdout)["pass"], true);

    // a different circuit must fail verification with a nonzero exit
    let other = scratch(&dir, "other.qasm");
    std::fs::write(&other, PROGRAM.replace("h q[0];", "x q[0];")).unwrap();
    let (code, _, _) = reqisc(&["verify", "--original", other.to_str().unwrap(), "--compiled", compiled.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn route_reports_overhead() {
    let dir = tempfile::tempdir().unwrap();
    let input = scratch(&dir, "route.qasm");
    std::fs::write(&input, PROGRAM).unwrap();
    for algo in ["sabre", "mirroring"] {
        let (code, stdout, err) =
            reqisc(&["route", "--input", input.to_str().unwrap(), "--topology", "chain:4", "--algo", algo, "--json"]);
        assert_eq!(code, 0, "{err}");
        let v = json(&stdout);
        assert!(v["overhead_ratio"].as_f64().unwrap() >= 1.0);
        assert_eq!(v["final_permutation"].as_array().unwrap().len(), 4);
        assert!(v["infidelity"].as_f64().unwrap() < 1e-8);
    }
    let (code, _, err) = reqisc(&["route", "--input", input.to_str().unwrap(), "--topology", "ring:4"]);
    assert_eq!(code, 1);
    assert!(err.contains("topology"));
}

#[test]
fn pulse_json_fields() {
    let (code, stdout, _) = reqisc(&["pulse", "--gate", "cnot", "--coupling", "xy", "--json"]);
    assert_eq!(code, 0);
    let v = json(&stdout);
    assert_eq!(v["subscheme"], "ND");
    assert!((v["tau"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["corrections"]["a1"].as_array().unwrap().len(), 2);
    for key in ["omega1", "omega2", "delta", "A1", "A2"] {
        assert!(v[key].is_number(), "{key}");
    }
    let (code, _, _) = reqisc(&["pulse", "--gate", "can:0.3,0.2", "--coupling", "xy"]);
    assert_eq!(code, 1);
}

#[test]
fn bench_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = reqisc(&["bench", "duration", "--coupling", "xx", "--samples", "2000", "--json", "--seed", "1"]);
    assert_eq!(code, 0);
    let v = json(&stdout);
    assert_eq!(v["samples"], 2000);
    assert_eq!(v["basis_gates"].as_array().unwrap().len(), 4);

    let (code, stdout, _) =
        reqisc(&["bench", "duration", "--coupling", "random", "--dist", "chamber", "--samples", "500", "--json"]);
    assert_eq!(code, 0);
    let v = json(&stdout);
    assert_eq!(v["distribution"], "chamber");
    assert_eq!(v["coupling"], "random:chamber");
    let (code, _, _) = reqisc(&["bench", "duration", "--coupling", "random"]);
    assert_eq!(code, 1);

    let csv = scratch(&dir, "sweep.csv");
    let (code, _, _) = reqisc(&["bench", "sweep", "--family", "iswap", "--coupling", "xy", "--points", "5", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("s,A1,A2,delta,tau"));
    assert_eq!(text.lines().count(), 6);
}
