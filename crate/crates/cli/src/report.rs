//! Versioned JSON reports and the sweep CSV.

use crate::bench::{BasisGateRow, DurationStats, ErrorProxy};
use reqisc_compiler::circuit::Metrics;
use reqisc_compiler::passes::{BlockReport, Mode};
use reqisc_core::scheme::{PulseSolution, SweepRow};
use reqisc_core::CMatrix;
use serde::Serialize;
use std::io::Write;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    #[serde(flatten)]
    pub body: T,
}

pub fn envelope<T: Serialize>(command: &'static str, seed: u64, body: T) -> Envelope<T> {
    Envelope { schema_version: SCHEMA_VERSION, command, seed, body }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactSummary {
    pub moves: usize,
    pub attempts: usize,
    pub sweeps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompileReport {
    pub input: String,
    pub mode: Mode,
    pub coupling: String,
    pub n_qubits: usize,
    /// Input with Toffolis expanded, timed as conventional CNOT gates.
    pub before: Metrics,
    pub after: Metrics,
    pub before_error_proxy: ErrorProxy,
    pub after_error_proxy: ErrorProxy,
    pub output_permutation: Vec<usize>,
    pub infidelity: Option<f64>,
    pub ancilla_added: bool,
    pub templates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compact: Option<CompactSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub resynthesized_blocks: Vec<BlockSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSummary {
    pub qubits: Vec<usize>,
    pub before: usize,
    pub after: usize,
}

impl From<&BlockReport> for BlockSummary {
    fn from(b: &BlockReport) -> Self {
        Self { qubits: b.qubits.clone(), before: b.before, after: b.after }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteReport {
    pub input: String,
    pub topology: String,
    pub algo: String,
    pub count2q_before: usize,
    pub count2q_after: usize,
    pub overhead_ratio: f64,
    pub swaps: usize,
    pub absorptions: usize,
    /// `final_permutation[l]` is the physical qubit holding logical qubit `l`.
    pub final_permutation: Vec<usize>,
    pub infidelity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PulseReport {
    pub gate: String,
    pub coupling: String,
    pub subscheme: &'static str,
    pub tau: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    pub reflected: bool,
    pub corrections: Corrections,
    pub residual: f64,
}

/// 2×2 complex matrices as `[[[re, im], ...], ...]`.
#[derive(Debug, Clone, Serialize)]
pub struct Corrections {
    pub a1: Vec<Vec<[f64; 2]>>,
    pub a2: Vec<Vec<[f64; 2]>>,
    pub b1: Vec<Vec<[f64; 2]>>,
    pub b2: Vec<Vec<[f64; 2]>>,
}

pub fn complex_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl PulseReport {
    pub fn new(gate: &str, coupling: &str, sol: &PulseSolution, residual: f64) -> Self {
        Self {
            gate: gate.to_string(),
            coupling: coupling.to_string(),
            subscheme: sol.subscheme.name(),
            tau: sol.tau,
            omega1: sol.omega1,
            omega2: sol.omega2,
            delta: sol.delta,
            a1: sol.a1_amp,
            a2: sol.a2_amp,
            reflected: sol.reflected,
            corrections: Corrections {
                a1: complex_rows(&sol.corr_a1),
                a2: complex_rows(&sol.corr_a2),
                b1: complex_rows(&sol.corr_b1),
                b2: complex_rows(&sol.corr_b2),
            },
            residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DurationReport {
    #[serde(flatten)]
    pub stats: DurationStats,
    /// Recorded for random couplings, whose sampling law is a choice.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub basis_gates: Vec<BasisGateRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub family: String,
    pub coupling: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub original: String,
    pub compiled: String,
    pub method: &'static str,
    pub infidelity: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Writes `s,A1,A2,delta,tau` rows.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "A1", "A2", "delta", "tau"])?;
    for r in rows {
        // `+ 0.0` turns -0 into 0
        w.write_record([r.s, r.a1, r.a2, r.delta, r.tau].map(|v| (v + 0.0).to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let rows = [SweepRow { s: 0.5, a1: 1.0, a2: -1.0, delta: 0.0, tau: 2.0 }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s,A1,A2,delta,tau"));
        assert_eq!(lines.next(), Some("0.5,1,-1,0,2"));
    }

    #[test]
    fn envelope_is_versioned() {
        let v = serde_json::to_value(envelope("verify", 3, VerifyReport {
            original: "a".into(),
            compiled: "b".into(),
            method: "unitary",
            infidelity: 0.0,
            tol: 1e-6,
            pass: true,
        }))
        .unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], "verify");
        assert_eq!(v["pass"], true);
    }
}
