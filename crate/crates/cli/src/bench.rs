use crate::coupling::RandomDist;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use reqisc_compiler::circuit::{circuit_duration, Circuit, DurationModel};
use reqisc_core::hamiltonian::NormalForm;
use reqisc_core::scheme::{optimal_time, Subscheme};
use reqisc_core::weyl::{random_su4, weyl_coordinate, WeylCoordinate};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};

/// Samples per independently seeded stream; results do not depend on the
/// thread count.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubschemeShares {
    #[serde(rename = "ND")]
    pub nd: f64,
    #[serde(rename = "EA_plus")]
    pub ea_plus: f64,
    #[serde(rename = "EA_minus")]
    pub ea_minus: f64,
}

/// Durations in units of `1/g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationStats {
    pub coupling: String,
    pub samples: usize,
    pub mean_tau: f64,
    pub std_tau: f64,
    pub p95_tau: f64,
    pub subscheme_shares: SubschemeShares,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn sample_chunks<F>(n_samples: usize, seed: u64, draw: F) -> Vec<(f64, Subscheme)>
where
    F: Fn(&mut ChaCha8Rng) -> (f64, Subscheme) + Sync,
{
    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<Vec<(f64, Subscheme)>> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(n_samples - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    chunks.concat()
}

fn summarize(coupling: String, draws: &[(f64, Subscheme)]) -> DurationStats {
    let n = draws.len();
    let taus: Vec<f64> = draws.iter().map(|d| d.0).collect();
    // shifted by the first sample, so a constant input gives its value exactly
    let shift = taus[0];
    let centered: Vec<f64> = taus.iter().map(|t| t - shift).collect();
    let mean = shift + pairwise_sum(&centered) / n as f64;
    let dev: Vec<f64> = taus.iter().map(|t| (t - mean).powi(2)).collect();
    let std = if n > 1 { (pairwise_sum(&dev) / (n - 1) as f64).sqrt() } else { 0.0 };
    let mut sorted = taus;
    sorted.sort_by(f64::total_cmp);
    let p95 = sorted.get(((0.95 * n as f64).ceil() as usize).saturating_sub(1)).copied().unwrap_or(f64::NAN);
    let share = |s: Subscheme| draws.iter().filter(|d| d.1 == s).count() as f64 / n as f64;
    DurationStats {
        coupling,
        samples: n,
        mean_tau: mean,
        std_tau: std,
        p95_tau: p95,
        subscheme_shares: SubschemeShares {
            nd: share(Subscheme::Nd),
            ea_plus: share(Subscheme::EaPlus),
            ea_minus: share(Subscheme::EaMinus),
        },
    }
}

fn haar_draw(rng: &mut ChaCha8Rng, coeffs: (f64, f64, f64)) -> (f64, Subscheme) {
    let w = weyl_coordinate(&random_su4(rng)).expect("Haar samples are unitary");
    let ot = optimal_time(&w, coeffs);
    (ot.tau, ot.branch_times.binding())
}

/// Time-optimal duration of Haar-random SU(4) targets under one coupling.
pub fn haar_duration_stats(name: &str, coupling: &NormalForm, n_samples: usize, seed: u64) -> DurationStats {
    assert!(n_samples > 0, "need at least one sample");
    let coeffs = coupling.coefficients();
    summarize(name.to_string(), &sample_chunks(n_samples, seed, |rng| haar_draw(rng, coeffs)))
}

/// Like [`haar_duration_stats`], drawing a fresh unit-strength coupling for
/// every target.
pub fn random_coupling_duration_stats(dist: RandomDist, n_samples: usize, seed: u64) -> DurationStats {
    assert!(n_samples > 0, "need at least one sample");
    let draws = sample_chunks(n_samples, seed, |rng| {
        let coeffs = dist.sample(rng);
        haar_draw(rng, coeffs)
    });
    summarize(format!("random:{}", dist.name()), &draws)
}

/// Stats of a fixed target repeated `n_samples` times.
pub fn fixed_target_stats(name: &str, coupling: &NormalForm, target: &WeylCoordinate, n_samples: usize) -> DurationStats {
    let ot = optimal_time(target, coupling.coefficients());
    summarize(name.to_string(), &vec![(ot.tau, ot.branch_times.binding()); n_samples])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisGateRow {
    pub gate: String,
    pub single: f64,
    /// Gates of this kind needed on average for a Haar-random SU(4).
    pub haar_count: f64,
    pub avg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn basis_gates() -> [(&'static str, WeylCoordinate, f64); 4] {
    [
        ("CNOT", WeylCoordinate::new(FRAC_PI_4, 0.0, 0.0), 3.0),
        ("iSWAP", WeylCoordinate::new(FRAC_PI_4, FRAC_PI_4, 0.0), 3.0),
        ("SQiSW", WeylCoordinate::new(FRAC_PI_8, FRAC_PI_8, 0.0), 2.21),
        ("B", WeylCoordinate::new(FRAC_PI_4, FRAC_PI_8, 0.0), 2.0),
    ]
}

/// Single-gate duration and Haar-average cost of the usual fixed basis gates.
pub fn basis_gate_table(coupling: &NormalForm) -> Vec<BasisGateRow> {
    basis_gates()
        .into_iter()
        .map(|(gate, w, k)| {
            let single = optimal_time(&w, coupling.coefficients()).tau;
            let note = (gate == "B").then(|| {
                format!(
                    "avg uses 2 B gates per SU(4) ({:.3}); tables quoting 3x single ({:.3}) disagree with that count",
                    2.0 * single,
                    3.0 * single
                )
            });
            BasisGateRow { gate: gate.to_string(), single, haar_count: k, avg: k * single, note }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorProxyConfig {
    pub p0: f64,
    /// Duration at which a two-qubit gate has error `p0`, in `1/g`.
    pub tau0: f64,
}

impl Default for ErrorProxyConfig {
    fn default() -> Self {
        Self { p0: 0.001, tau0: PI / SQRT_2 }
    }
}

impl ErrorProxyConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.p0 > 0.0 && self.p0 < 1.0, "p0 must lie in (0, 1), got {}", self.p0);
        anyhow::ensure!(self.tau0 > 0.0, "tau0 must be positive, got {}", self.tau0);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorProxy {
    pub est_fidelity: f64,
    pub est_error: f64,
    pub duration: f64,
}

/// Depolarizing proxy: each two-qubit gate fails with probability
/// `p0·τ/τ0`, where `τ` is its duration under `model`.
pub fn error_proxy(c: &Circuit, model: &DurationModel, cfg: &ErrorProxyConfig) -> ErrorProxy {
    let est_fidelity: f64 = c
        .gates
        .iter()
        .filter(|g| g.is_two_qubit())
        .map(|g| 1.0 - (cfg.p0 * model.gate_time(g) / cfg.tau0).min(1.0))
        .product();
    ErrorProxy { est_fidelity, est_error: 1.0 - est_fidelity, duration: circuit_duration(c, model) }
}

pub fn coupling_model(nf: &NormalForm) -> DurationModel {
    DurationModel::Coupling { a: nf.a, b: nf.b, c: nf.c }
}
