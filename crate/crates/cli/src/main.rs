use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reqisc_cli::bench::{
    basis_gate_table, coupling_model, error_proxy, haar_duration_stats, random_coupling_duration_stats, ErrorProxyConfig,
};
use reqisc_cli::coupling::{parse_coupling, CouplingChoice};
use reqisc_cli::report::*;
use reqisc_cli::with_thread_cap;
use reqisc_compiler::circuit::{
    circuit_infidelity, random_state, state_infidelity, statevector_run, Circuit, DurationModel, MAX_STATEVECTOR_QUBITS,
    MAX_UNITARY_QUBITS,
};
use reqisc_compiler::passes::{fuse_2q_blocks, pipeline, Mode, PipelineConfig, TemplateLibrary};
use reqisc_compiler::routing::{build_graph, mirroring_sabre, routing_report, sabre_route, RoutingOptions};
use reqisc_compiler::{emit_qasm, parse_qasm};
use reqisc_core::gates;
use reqisc_core::scheme::{family_sweep, synthesize_pulse, verify_solution, GateFamily, PulseOptions, SchemeError};
use reqisc_core::CMatrix;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "reqisc", version, about = "Compile circuits to Can + U3 and solve time-optimal two-qubit pulses")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the red or full pipeline on a QASM file.
    Compile(CompileArgs),
    /// Map a circuit onto a coupling graph.
    Route(RouteArgs),
    /// Solve the pulse for one two-qubit gate.
    Pulse(PulseArgs),
    /// Duration statistics and gate-family sweeps.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Check that a compiled circuit implements the original.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Monte Carlo duration of Haar-random two-qubit gates.
    Duration(DurationArgs),
    /// Drive parameters along a gate family.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CouplingArgs {
    /// xy, xx, file:PATH, or random (with --dist).
    #[arg(long, default_value = "xy")]
    coupling: String,
    /// Coupling strength for the presets.
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    /// Distribution for `--coupling random`: gaussian or chamber.
    #[arg(long)]
    dist: Option<String>,
}

impl CouplingArgs {
    fn resolve(&self) -> Result<CouplingChoice> {
        parse_coupling(&self.coupling, self.g, self.dist.as_deref())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Red,
    Full,
}

#[derive(Args)]
struct CompileArgs {
    /// OpenQASM 2.0 input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "red")]
    mode: ModeArg,
    #[command(flatten)]
    coupling: CouplingArgs,
    /// Block width for re-synthesis (2 or 3).
    #[arg(long, default_value_t = 3)]
    w: usize,
    /// Blocks with more two-qubit gates than this are re-synthesized.
    #[arg(long, default_value_t = 4)]
    mth: usize,
    /// Gates with Weyl L1 norm below this are mirrored.
    #[arg(long, default_value_t = 0.15)]
    r: f64,
    /// Synthesis tolerance.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Also mirror gates whose pulse needs a larger drive amplitude.
    #[arg(long)]
    amp_max: Option<f64>,
    /// Template library JSON; read if it exists, written back with new entries.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compiled circuit as QASM.
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Sabre,
    Mirroring,
}

#[derive(Args)]
struct RouteArgs {
    #[arg(long)]
    input: PathBuf,
    /// chain:N, grid:RxC or file:PATH (edge list).
    #[arg(long)]
    topology: String,
    #[arg(long, value_enum, default_value = "mirroring")]
    algo: Algo,
    /// Lookahead weight.
    #[arg(long = "W", default_value_t = 0.5)]
    lookahead: f64,
    #[arg(long, default_value_t = 20)]
    ext: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct PulseArgs {
    /// can:X,Y,Z, cnot, iswap, sqisw, b or swap.
    #[arg(long)]
    gate: String,
    #[command(flatten)]
    coupling: CouplingArgs,
    #[arg(long)]
    amp_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DurationArgs {
    #[command(flatten)]
    coupling: CouplingArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// cnot, b, swap or iswap.
    #[arg(long)]
    family: String,
    #[command(flatten)]
    coupling: CouplingArgs,
    /// Grid s = k/points for k = 1..=points.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    compiled: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

/// Distinguishes a failed check from an error running it.
struct Outcome {
    ok: bool,
}

fn read_qasm(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_qasm(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Prints to stdout, treating a closed pipe (e.g. `| head`) as success.
fn say(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn publish<T: Serialize>(cli: &Cli, command: &'static str, out: Option<&Path>, body: T, summary: &str) -> Result<()> {
    let doc = serde_json::to_string_pretty(&envelope(command, cli.seed, body))?;
    if let Some(p) = out {
        write_text(p, &(doc.clone() + "\n"))?;
    }
    say(if cli.json { &doc } else { summary })
}

fn compile(cli: &Cli, a: &CompileArgs) -> Result<Outcome> {
    let c = read_qasm(&a.input)?;
    let choice = a.coupling.resolve()?;
    let nf = choice.fixed()?;
    let model = coupling_model(nf);
    let mode = match a.mode {
        ModeArg::Red => Mode::Red,
        ModeArg::Full => Mode::Full,
    };
    let cfg = PipelineConfig { mode, w: a.w, m_th: a.mth, r: a.r, eps: a.eps, amp_max: a.amp_max, seed: cli.seed, ..Default::default() };
    let mut lib = match &a.templates {
        Some(p) if p.exists() => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            TemplateLibrary::from_json(&text)?
        }
        _ => TemplateLibrary::new(cfg.eps),
    };
    let res = match pipeline(&c, &cfg, &mut lib, &model) {
        Ok(r) => r,
        Err(e @ reqisc_compiler::passes::PassError::Verification(_)) => {
            eprintln!("verification failed: {e}");
            return Ok(Outcome { ok: false });
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(p) = &a.templates {
        write_text(p, &lib.to_json()?)?;
    }
    if let Some(p) = &a.emit {
        write_text(p, &emit_qasm(&res.circuit)?)?;
    }
    let proxy = ErrorProxyConfig::default();
    let baseline = reqisc_compiler::circuit::expand_ccx(&c);
    let report = CompileReport {
        input: a.input.display().to_string(),
        mode,
        coupling: choice.name(),
        n_qubits: res.circuit.n_qubits,
        before: res.baseline,
        after: res.output,
        before_error_proxy: error_proxy(&baseline, &DurationModel::Conventional, &proxy),
        after_error_proxy: error_proxy(&res.circuit, &model, &proxy),
        output_permutation: res.circuit.output_permutation.clone(),
        infidelity: res.infidelity,
        ancilla_added: res.ancilla_added,
        templates: lib.len(),
        compact: res.compact.map(|s| CompactSummary { moves: s.moves, attempts: s.attempts, sweeps: s.sweeps }),
        resynthesized_blocks: res.hierarchical.map(|h| h.blocks.iter().map(BlockSummary::from).collect()).unwrap_or_default(),
    };
    let summary = format!(
        "#2Q {} -> {}, depth2Q {} -> {}, duration {:.3} -> {:.3} /g, distinct SU(4) {}",
        report.before.count2q,
        report.after.count2q,
        report.before.depth2q,
        report.after.depth2q,
        report.before.duration,
        report.after.duration,
        report.after.distinct_su4
    );
    publish(cli, "compile", a.out.as_deref(), report, &summary)?;
    Ok(Outcome { ok: true })
}

/// Infidelity up to the output permutations: unitaries when small enough,
/// otherwise the worst of a few random input states.
fn compare(a: &Circuit, b: &Circuit, seed: u64) -> Result<(f64, &'static str)> {
    if a.n_qubits != b.n_qubits {
        bail!("circuits act on {} and {} qubits", a.n_qubits, b.n_qubits);
    }
    if a.n_qubits <= MAX_UNITARY_QUBITS {
        return Ok((circuit_infidelity(a, b)?, "unitary"));
    }
    if a.n_qubits > MAX_STATEVECTOR_QUBITS {
        bail!("{} qubits is too many to simulate", a.n_qubits);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let s = random_state(a.n_qubits, &mut rng);
        worst = worst.max(state_infidelity(&statevector_run(a, &s)?, &statevector_run(b, &s)?));
    }
    Ok((worst, "statevector"))
}

fn route(cli: &Cli, a: &RouteArgs) -> Result<Outcome> {
    let raw = read_qasm(&a.input)?;
    let g = build_graph(&a.topology)?;
    let c = fuse_2q_blocks(&raw)?;
    let opts = RoutingOptions { w: a.lookahead, ext_size: a.ext, seed: cli.seed, trials: a.trials, ..Default::default() };
    let (name, r) = match a.algo {
        Algo::Sabre => ("sabre", sabre_route(&c, &g, &opts)?),
        Algo::Mirroring => ("mirroring", mirroring_sabre(&c, &g, &opts)?),
    };
    let rep = routing_report(&c, &r);
    let mut padded = c.clone();
    padded.n_qubits = g.n_phys;
    padded.output_permutation.extend(c.n_qubits..g.n_phys);
    let infidelity = (g.n_phys <= MAX_STATEVECTOR_QUBITS).then(|| compare(&padded, &r.circuit, cli.seed)).transpose()?.map(|x| x.0);
    if let Some(p) = &a.emit {
        write_text(p, &emit_qasm(&r.circuit)?)?;
    }
    let ok = infidelity.is_none_or(|f| f < 1e-8);
    let report = RouteReport {
        input: a.input.display().to_string(),
        topology: a.topology.clone(),
        algo: name.to_string(),
        count2q_before: c.count_2q(),
        count2q_after: r.circuit.count_2q(),
        overhead_ratio: rep.overhead_ratio,
        swaps: rep.swaps,
        absorptions: rep.absorptions,
        final_permutation: r.final_mapping.clone(),
        infidelity,
    };
    let summary = format!(
        "{name} on {}: #2Q {} -> {} (ratio {:.3}), {} SWAPs, {} absorbed",
        a.topology, report.count2q_before, report.count2q_after, report.overhead_ratio, report.swaps, report.absorptions
    );
    publish(cli, "route", a.out.as_deref(), report, &summary)?;
    if !ok {
        eprintln!("routed circuit differs from the input");
    }
    Ok(Outcome { ok })
}

fn gate_matrix(spec: &str) -> Result<CMatrix> {
    if let Some(args) = spec.strip_prefix("can:") {
        let v: Vec<f64> = args.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>()?;
        let [x, y, z] = v[..] else { bail!("can:X,Y,Z needs three numbers") };
        return Ok(gates::can(x, y, z));
    }
    Ok(match spec.to_ascii_lowercase().as_str() {
        "cnot" | "cx" => gates::cnot(),
        "iswap" => gates::iswap(),
        "sqisw" => gates::sqisw(),
        "b" => gates::b_gate(),
        "swap" => gates::swap(),
        _ => bail!("unknown gate `{spec}`"),
    })
}

fn pulse(cli: &Cli, a: &PulseArgs) -> Result<Outcome> {
    let choice = a.coupling.resolve()?;
    let nf = choice.fixed()?;
    let u = gate_matrix(&a.gate)?;
    let (sol, capped) = match synthesize_pulse(&u, nf, &PulseOptions { amp_max: a.amp_max }) {
        Ok(s) => (s, false),
        Err(SchemeError::AmplitudeExceeded { amplitude, cap, solution }) => {
            eprintln!("drive amplitude {amplitude:.4} exceeds cap {cap:.4}; consider mirroring this gate");
            (*solution, true)
        }
        Err(e) => return Err(e.into()),
    };
    let residual = verify_solution(&sol, &u, nf)?;
    let report = PulseReport::new(&a.gate, &choice.name(), &sol, residual);
    let summary = format!(
        "{}: {} tau {:.6} /g, omega1 {:.6}, omega2 {:.6}, delta {:.6}, residual {:.2e}",
        a.gate, report.subscheme, report.tau, report.omega1, report.omega2, report.delta, residual
    );
    publish(cli, "pulse", a.out.as_deref(), report, &summary)?;
    Ok(Outcome { ok: residual < 1e-8 && !capped })
}

fn bench_duration(cli: &Cli, a: &DurationArgs) -> Result<Outcome> {
    if a.samples == 0 {
        bail!("--samples must be positive");
    }
    let choice = a.coupling.resolve()?;
    let report = match &choice {
        CouplingChoice::Fixed { name, nf } => DurationReport {
            stats: with_thread_cap(|| haar_duration_stats(name, nf, a.samples, cli.seed)),
            distribution: None,
            basis_gates: basis_gate_table(nf),
        },
        CouplingChoice::Random(d) => DurationReport {
            stats: with_thread_cap(|| random_coupling_duration_stats(*d, a.samples, cli.seed)),
            distribution: Some(d.name().to_string()),
            basis_gates: Vec::new(),
        },
    };
    let s = &report.stats;
    let mut summary = format!(
        "{}: mean {:.4} /g, std {:.4}, p95 {:.4} over {} samples (ND {:.3}, EA+ {:.3}, EA- {:.3})",
        s.coupling,
        s.mean_tau,
        s.std_tau,
        s.p95_tau,
        s.samples,
        s.subscheme_shares.nd,
        s.subscheme_shares.ea_plus,
        s.subscheme_shares.ea_minus
    );
    for row in &report.basis_gates {
        summary += &format!("\n  {:<6} single {:.3}  avg {:.3}", row.gate, row.single, row.avg);
        if let Some(n) = &row.note {
            summary += &format!("  ({n})");
        }
    }
    publish(cli, "bench duration", a.out.as_deref(), report, &summary)?;
    Ok(Outcome { ok: true })
}

fn bench_sweep(cli: &Cli, a: &SweepArgs) -> Result<Outcome> {
    let family = GateFamily::parse(&a.family).with_context(|| format!("unknown family `{}`", a.family))?;
    if a.points == 0 {
        bail!("--points must be positive");
    }
    let choice = a.coupling.resolve()?;
    let grid: Vec<f64> = (1..=a.points).map(|k| k as f64 / a.points as f64).collect();
    let rows = family_sweep(family, &grid, choice.fixed()?)?;
    if cli.json {
        let report = SweepReport { family: a.family.clone(), coupling: choice.name(), rows: rows.clone() };
        say(&serde_json::to_string_pretty(&envelope("bench sweep", cli.seed, report))?)?;
    }
    match &a.out {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
            write_sweep_csv(f, &rows)?;
        }
        None if !cli.json => write_sweep_csv(std::io::stdout().lock(), &rows)?,
        None => {}
    }
    Ok(Outcome { ok: true })
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    let original = read_qasm(&a.original)?;
    let compiled = read_qasm(&a.compiled)?;
    let (inf, method) = compare(&original, &compiled, cli.seed)?;
    let pass = inf < a.tol;
    let report = VerifyReport {
        original: a.original.display().to_string(),
        compiled: a.compiled.display().to_string(),
        method,
        infidelity: inf,
        tol: a.tol,
        pass,
    };
    let summary = format!("{} ({method}): infidelity {inf:.3e}", if pass { "equivalent" } else { "DIFFERENT" });
    publish(cli, "verify", None, report, &summary)?;
    Ok(Outcome { ok: pass })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Compile(a) => compile(cli, a),
        Cmd::Route(a) => route(cli, a),
        Cmd::Pulse(a) => pulse(cli, a),
        Cmd::Bench(BenchCmd::Duration(a)) => bench_duration(cli, a),
        Cmd::Bench(BenchCmd::Sweep(a)) => bench_sweep(cli, a),
        Cmd::Verify(a) => verify(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome { ok: true }) => ExitCode::SUCCESS,
        Ok(Outcome { ok: false }) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
