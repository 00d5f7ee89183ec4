//! Library side of the `qsim` binary: simulation runs, benchmark
//! generation and differential checks, each returning an [`Exit`] code and
//! a serializable report.

pub mod report;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use qsim_core::circuit::{self, format_bitstring, parse, serialize, Circuit, GateKind};
use qsim_core::kernels::apply_circuit_until;
use qsim_core::measure::Hyperfunction;
use qsim_core::oracle::{run_differential_check, CaseFailure, CheckConfig, Fault, ORACLE_LIMIT};
use qsim_core::{AlgebraicAmplitude, ExactProb, Execution, SimConfig, SimError, SlicedState};

use report::*;

/// Process exit codes. The numeric values are part of the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// `check` found a mismatch.
    CheckFailed = 1,
    /// Malformed circuit or invalid arguments.
    Usage = 2,
    NodeBudget = 3,
    Timeout = 4,
    Io = 5,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Where the circuit text comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Stdin,
    Path(PathBuf),
    /// Circuit text held in memory.
    Text(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: Input,
    pub r_init: usize,
    pub reorder: bool,
    pub node_budget: usize,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    pub shots: u64,
    pub format: Format,
    pub dump_amplitudes: bool,
    /// Outcome distributions with more than `2^enum_limit` entries are
    /// omitted from the report.
    pub enum_limit: usize,
    pub exec: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            input: Input::Stdin,
            r_init: sim.r_init,
            reorder: sim.reorder,
            node_budget: sim.node_budget,
            time_limit: None,
            seed: 1,
            shots: 0,
            format: Format::Json,
            dump_amplitudes: false,
            enum_limit: sim.enum_limit,
            exec: Execution::Parallel,
        }
    }
}

/// Output of a command: exit code, stdout payload and stderr diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub exit: Exit,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn fail(exit: Exit, msg: impl Into<String>) -> Self {
        Self {
            exit,
            stdout: String::new(),
            stderr: msg.into(),
        }
    }

    /// Writes both streams and returns the exit code.
    pub fn emit(self) -> i32 {
        let _ = io::stdout().write_all(self.stdout.as_bytes());
        if !self.stderr.is_empty() {
            let _ = writeln!(io::stderr(), "qsim: {}", self.stderr.trim_end());
        }
        self.exit.code()
    }
}

fn read_input(input: &Input) -> io::Result<String> {
    match input {
        Input::Stdin => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
        Input::Path(p) => std::fs::read_to_string(p),
        Input::Text(t) => Ok(t.clone()),
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn probability(p: &ExactProb) -> Probability {
    Probability {
        exact: p.to_string(),
        approx: p.to_f64(),
    }
}

fn circuit_info(c: &Circuit) -> CircuitInfo {
    let mut by_kind = BTreeMap::new();
    for g in &c.gates {
        *by_kind.entry(g.kind.mnemonic()).or_default() += 1;
    }
    let h_layer = c.gates.len() >= c.n
        && c.gates[..c.n]
            .iter()
            .enumerate()
            .all(|(q, g)| g.kind == GateKind::H && g.targets == [q]);
    CircuitInfo {
        qubits: c.n,
        gates: c.gates.len(),
        counted_gates: c.gates.len() - if h_layer { c.n } else { 0 },
        by_kind,
        measured: c.measure.clone(),
    }
}

fn amplitude_line(bits: &[bool], a: &AlgebraicAmplitude) -> AmplitudeLine {
    let [a_, b, c, d] = a.coeffs();
    AmplitudeLine {
        bits: format_bitstring(bits),
        a: a_.to_string(),
        b: b.to_string(),
        c: c.to_string(),
        d: d.to_string(),
        k: a.k,
    }
}

/// `[a, b, c, d, k]` as decimal strings.
fn tuple_fields(x: &AlgebraicAmplitude) -> [String; 5] {
    let [a, b, c, d] = x.coeffs();
    [
        a.to_string(),
        b.to_string(),
        c.to_string(),
        d.to_string(),
        x.k.to_string(),
    ]
}

/// Parses, simulates and (when the circuit has `.measure`) measures.
pub fn cmd_run(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let text = match read_input(&cfg.input) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(Exit::Io, format!("cannot read input: {e}")),
    };
    let circuit = match parse(&text) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(Exit::Usage, format!("parse error: {e}")),
    };
    let mut timing = Timing {
        parse_ms: ms(start.elapsed()),
        ..Timing::default()
    };

    let sim = SimConfig {
        r_init: cfg.r_init,
        node_budget: cfg.node_budget,
        reorder: cfg.reorder,
        enum_limit: cfg.enum_limit,
    };
    let mut report = RunReport {
        schema: SCHEMA,
        status: "ok",
        error: None,
        circuit: circuit_info(&circuit),
        config: ConfigInfo {
            r_init: cfg.r_init,
            reorder: cfg.reorder,
            node_budget: cfg.node_budget,
            shots: cfg.shots,
            seed: cfg.seed,
        },
        state: None,
        bdd: None,
        total_probability: None,
        measurement: None,
        amplitudes: None,
        timing: Timing::default(),
        resources: Resources::default(),
    };

    let sim_start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let result = SlicedState::init_basis_state(circuit.n, &circuit.initial_bits(), sim)
        .and_then(|mut s| apply_circuit_until(&mut s, &circuit, deadline).map(|stats| (s, stats)));
    timing.simulate_ms = ms(sim_start.elapsed());

    let exit = match result {
        Ok((mut state, stats)) => {
            let peak_live_nodes = stats.iter().map(|g| g.live_nodes).max().unwrap_or(0);
            report.state = Some(StateInfo {
                gates_applied: stats.len(),
                r: state.r(),
                k: state.k(),
                growth_events: state.growth_events(),
                slice_nodes: state.slice_nodes(),
                peak_live_nodes,
            });
            if cfg.dump_amplitudes {
                report.amplitudes = Some(
                    state
                        .nonzero_amplitudes(cfg.exec)
                        .iter()
                        .map(|(bits, a)| amplitude_line(bits, a))
                        .collect(),
                );
            }
            let measure_start = Instant::now();
            report.total_probability = Some(probability(&state.total_probability()));
            let exit = match measure(&mut state, &circuit, cfg) {
                Ok(m) => {
                    report.measurement = m;
                    Exit::Ok
                }
                Err(e) => fail_status(&mut report, e),
            };
            timing.measure_ms = ms(measure_start.elapsed());
            report.bdd = Some(bdd_info(&state));
            exit
        }
        Err(e) => fail_status(&mut report, e),
    };
    timing.total_ms = ms(start.elapsed());
    report.timing = timing;
    report.resources.peak_rss_kb = peak_rss_kb();

    let stdout = match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => render_text(&report),
    };
    Outcome {
        exit,
        stdout,
        stderr: report.error.clone().unwrap_or_default(),
    }
}

fn fail_status(report: &mut RunReport, e: SimError) -> Exit {
    let (status, exit) = match e {
        SimError::NodeBudget { .. } => ("node_budget", Exit::NodeBudget),
        SimError::Timeout { .. } => ("timeout", Exit::Timeout),
        _ => ("error", Exit::Usage),
    };
    report.status = status;
    report.error = Some(e.to_string());
    exit
}

fn bdd_info(state: &SlicedState) -> BddInfo {
    let s = state.bdd().stats();
    BddInfo {
        live_nodes: s.live_nodes,
        peak_nodes: s.peak_nodes,
        cache_lookups: s.cache_lookups,
        cache_hits: s.cache_hits,
        gc_runs: s.gc_runs,
        reorders: s.reorders,
    }
}

fn measure(
    state: &mut SlicedState,
    circuit: &Circuit,
    cfg: &RunConfig,
) -> Result<Option<MeasurementInfo>, SimError> {
    let Some(qubits) = circuit.measure.clone() else {
        return Ok(None);
    };
    let h = Hyperfunction::build(state, &qubits)?;
    let first_qubit_zero = h.joint_probability(&[false])?;
    let limit = 1usize << cfg.enum_limit.min(24);
    let (outcomes, total) = match h.outcome_distribution(limit) {
        Ok(dist) => {
            let total: ExactProb = dist.iter().map(|(_, p)| p.clone()).sum();
            let list = dist
                .iter()
                .map(|(bits, p)| OutcomeProbability {
                    outcome: format_bitstring(bits),
                    probability: probability(p),
                })
                .collect();
            (Some(list), total)
        }
        Err(SimError::TooManyOutcomes { .. }) => (None, h.root_probability()),
        Err(e) => return Err(e),
    };
    let shots = (cfg.shots > 0).then(|| h.sample(cfg.shots, cfg.seed, cfg.exec));
    let info = MeasurementInfo {
        qubits,
        first_qubit_zero: probability(&first_qubit_zero),
        outcomes,
        outcome_total: probability(&total),
        shots,
    };
    Ok(Some(info))
}

fn render_text(r: &RunReport) -> String {
    let mut s = String::new();
    let c = &r.circuit;
    let _ = writeln!(s, "status: {}", r.status);
    if let Some(e) = &r.error {
        let _ = writeln!(s, "error: {e}");
    }
    let _ = writeln!(
        s,
        "qubits: {}  gates: {} ({} counted)",
        c.qubits, c.gates, c.counted_gates
    );
    if let Some(st) = &r.state {
        let _ = writeln!(
            s,
            "r: {}  k: {}  growth events: {}  slice nodes: {}",
            st.r, st.k, st.growth_events, st.slice_nodes
        );
    }
    if let Some(p) = &r.total_probability {
        let _ = writeln!(s, "total probability: {}", p.exact);
    }
    if let Some(b) = &r.bdd {
        let _ = writeln!(
            s,
            "bdd: {} live, {} peak, {} gc runs, {} reorders",
            b.live_nodes, b.peak_nodes, b.gc_runs, b.reorders
        );
    }
    if let Some(m) = &r.measurement {
        if m.qubits.len() <= 16 {
            let _ = writeln!(s, "measured: {:?}", m.qubits);
        } else {
            let _ = writeln!(s, "measured: {} qubits", m.qubits.len());
        }
        let _ = writeln!(s, "Pr[q{}=0] = {}", m.qubits[0], m.first_qubit_zero.exact);
        for o in m.outcomes.iter().flatten() {
            let _ = writeln!(
                s,
                "  {}  {}  ({:.6})",
                o.outcome, o.probability.exact, o.probability.approx
            );
        }
        for (k, v) in m.shots.iter().flatten() {
            let _ = writeln!(s, "  shots {k}: {v}");
        }
    }
    for a in r.amplitudes.iter().flatten() {
        let _ = writeln!(s, "{} {} {} {} {} {}", a.bits, a.a, a.b, a.c, a.d, a.k);
    }
    let t = &r.timing;
    let _ = writeln!(
        s,
        "time: {:.1} ms (parse {:.1}, simulate {:.1}, measure {:.1})",
        t.total_ms, t.parse_ms, t.simulate_ms, t.measure_ms
    );
    if let Some(kb) = r.resources.peak_rss_kb {
        let _ = writeln!(s, "peak rss: {kb} kB");
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Random,
    Ghz,
    Bv,
}

/// Serialized benchmark circuit. `hidden` only applies to [`Family::Bv`].
pub fn cmd_gen(family: Family, n: usize, seed: u64, hidden: Option<&str>) -> Outcome {
    let generated = match (family, hidden) {
        (Family::Bv, Some(h)) => match circuit::parse_bitstring(h) {
            Some(bits) if bits.len() + 1 == n => circuit::gen_bv_with_hidden(&bits),
            _ => {
                return Outcome::fail(
                    Exit::Usage,
                    format!(
                        "hidden string must be {} bit(s) of 0/1",
                        n.saturating_sub(1)
                    ),
                )
            }
        },
        (_, Some(_)) => return Outcome::fail(Exit::Usage, "--hidden only applies to bv"),
        (Family::Random, None) => circuit::gen_random(n, seed),
        (Family::Ghz, None) => circuit::gen_ghz(n),
        (Family::Bv, None) => circuit::gen_bv(n),
    };
    match generated {
        Ok(c) => Outcome {
            exit: Exit::Ok,
            stdout: serialize(&c),
            stderr: String::new(),
        },
        Err(e) => Outcome::fail(Exit::Usage, e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub config: CheckConfig,
    pub format: Format,
    pub exec: Execution,
    /// Corrupts every case to confirm that mismatches are caught.
    pub fault: Option<Fault>,
}

/// Differential check of the sliced simulator against the dense oracle.
pub fn cmd_check(opts: &CheckOptions) -> Outcome {
    let cfg = &opts.config;
    if cfg.n_max > ORACLE_LIMIT {
        return Outcome::fail(
            Exit::Usage,
            format!("--n-max must be at most {ORACLE_LIMIT}"),
        );
    }
    let report = match run_differential_check(cfg, opts.exec, opts.fault) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(Exit::Usage, e.to_string()),
    };
    let failure = report.failure.as_ref().map(|f| {
        let (kind, gate, first_divergence, message) = match &f.failure {
            CaseFailure::Mismatch { gate, divergence } => {
                let info = DivergenceInfo {
                    index: divergence.index,
                    bits: format_bitstring(&divergence.bits),
                    sliced: tuple_fields(&divergence.sliced),
                    dense: tuple_fields(&divergence.dense),
                };
                let msg = format!(
                    "amplitude {} differs: sliced {} vs dense {}",
                    info.bits, divergence.sliced, divergence.dense
                );
                ("mismatch", *gate, Some(info), msg)
            }
            CaseFailure::Normalization {
                gate,
                sum_u,
                sum_v,
                k,
            } => (
                "normalization",
                Some(*gate),
                None,
                format!("norm numerators ({sum_u}, {sum_v}) at k = {k}"),
            ),
            CaseFailure::Error(e) => ("error", None, None, e.to_string()),
        };
        CheckFailureInfo {
            n: f.n,
            case: f.case,
            circuit_seed: f.circuit_seed,
            kind,
            gate,
            first_divergence,
            message,
        }
    });
    let summary = CheckSummary {
        schema: SCHEMA,
        status: if failure.is_none() { "pass" } else { "fail" },
        n_min: cfg.n_min,
        n_max: cfg.n_max,
        cases: cfg.cases,
        seed: cfg.seed,
        cases_run: report.cases_run,
        gates_checked: report.gates_checked,
        failure,
    };
    let stdout = match opts.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!(
                "{}: {} case(s), {} gate(s) checked\n",
                summary.status, summary.cases_run, summary.gates_checked
            );
            if let Some(f) = &summary.failure {
                let _ = writeln!(
                    s,
                    "first failure: n = {}, case {} (circuit seed {}): {}",
                    f.n, f.case, f.circuit_seed, f.message
                );
            }
            s
        }
    };
    Outcome {
        exit: if summary.failure.is_none() {
            Exit::Ok
        } else {
            Exit::CheckFailed
        },
        stdout,
        stderr: String::new(),
    }
}
