//! JSON report schema. Fields under `timing` and `resources` vary between
//! runs; everything else is a pure function of the input and the flags.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    /// `ok`, `node_budget`, `timeout` or `error`.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub circuit: CircuitInfo,
    pub config: ConfigInfo,
    pub state: Option<StateInfo>,
    pub bdd: Option<BddInfo>,
    /// Sum of all squared amplitudes; exactly 1 for every valid run.
    pub total_probability: Option<Probability>,
    pub measurement: Option<MeasurementInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<AmplitudeLine>>,
    pub timing: Timing,
    pub resources: Resources,
}

#[derive(Debug, Serialize)]
pub struct CircuitInfo {
    pub qubits: usize,
    pub gates: usize,
    /// Gates excluding a leading layer of one H per qubit, which the
    /// random-circuit benchmarks do not count.
    pub counted_gates: usize,
    pub by_kind: BTreeMap<&'static str, usize>,
    pub measured: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct ConfigInfo {
    pub r_init: usize,
    pub reorder: bool,
    pub node_budget: usize,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct StateInfo {
    pub gates_applied: usize,
    pub r: usize,
    pub k: i64,
    pub growth_events: usize,
    pub slice_nodes: usize,
    /// Largest live node count of the BDD manager seen after any gate.
    pub peak_live_nodes: usize,
}

#[derive(Debug, Serialize)]
pub struct BddInfo {
    pub live_nodes: usize,
    pub peak_nodes: usize,
    pub cache_lookups: u64,
    pub cache_hits: u64,
    pub gc_runs: usize,
    pub reorders: usize,
}

#[derive(Debug, Serialize)]
pub struct Probability {
    /// Exact value in ℚ[√2].
    pub exact: String,
    pub approx: f64,
}

#[derive(Debug, Serialize)]
pub struct OutcomeProbability {
    pub outcome: String,
    pub probability: Probability,
}

#[derive(Debug, Serialize)]
pub struct MeasurementInfo {
    pub qubits: Vec<usize>,
    /// Probability that the first measured qubit reads 0.
    pub first_qubit_zero: Probability,
    /// Full distribution, or `None` past the outcome limit.
    pub outcomes: Option<Vec<OutcomeProbability>>,
    /// Sum over `outcomes`, or the total probability when they are omitted.
    pub outcome_total: Probability,
    pub shots: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Serialize)]
pub struct AmplitudeLine {
    pub bits: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub k: i64,
}

#[derive(Debug, Default, Serialize)]
pub struct Timing {
    pub parse_ms: f64,
    pub simulate_ms: f64,
    pub measure_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Default, Serialize)]
pub struct Resources {
    /// `VmHWM` from `/proc/self/status`; absent on other platforms.
    pub peak_rss_kb: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct CheckSummary {
    pub schema: u32,
    /// `pass` or `fail`.
    pub status: &'static str,
    pub n_min: usize,
    pub n_max: usize,
    pub cases: usize,
    pub seed: u64,
    pub cases_run: usize,
    pub gates_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<CheckFailureInfo>,
}

#[derive(Debug, Serialize)]
pub struct CheckFailureInfo {
    pub n: usize,
    pub case: usize,
    pub circuit_seed: u64,
    /// `mismatch`, `normalization` or `error`.
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_divergence: Option<DivergenceInfo>,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct DivergenceInfo {
    pub index: usize,
    pub bits: String,
    pub sliced: [String; 5],
    pub dense: [String; 5],
}

/// Peak resident set size of this process in KiB.
pub fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}
