//! Dense exact reference simulator and differential checks against the
//! bit-sliced simulator.

use num_bigint::BigInt;
use qsim_bdd::{Cube, Literal, VarId};

use crate::amplitude::{
    add_coeffs, mul_i, mul_omega, neg_coeffs, sub_coeffs, zero_coeffs, AlgebraicAmplitude, Coeffs,
};
use crate::circuit::{gen_random, Circuit, Gate, GateKind};
use crate::exact::ExactProb;
use crate::kernels::apply_gate;
use crate::par::{self, Execution};
use crate::state::{bits_to_index, index_to_bits, Family, SimConfig, SlicedState};
use crate::{Result, SimError};

/// Largest register the dense simulator accepts.
pub const ORACLE_LIMIT: usize = 16;

/// All `2^n` amplitude tuples sharing one exponent `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseState {
    pub n: usize,
    pub k: i64,
    pub amps: Vec<Coeffs>,
}

impl DenseState {
    pub fn basis(n: usize, bits: &[bool]) -> Result<Self> {
        if n > ORACLE_LIMIT {
            return Err(SimError::EnumerationLimit {
                n,
                limit: ORACLE_LIMIT,
            });
        }
        if bits.len() != n {
            return Err(SimError::BitLength {
                expected: n,
                got: bits.len(),
            });
        }
        let mut amps = vec![zero_coeffs(); 1 << n];
        amps[bits_to_index(bits)][3] = BigInt::from(1);
        Ok(Self { n, k: 0, amps })
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    /// Applies the gate's matrix directly; `√2` factors go into `k`.
    pub fn apply(&mut self, gate: &Gate, exec: Execution) {
        let old = &self.amps;
        let cmask: usize = gate.controls.iter().map(|&c| self.mask(c)).sum();
        let mt = self.mask(gate.targets[0]);
        let on = |j: usize| j & cmask == cmask;
        let new = match gate.kind {
            GateKind::X | GateKind::Cnot | GateKind::Toffoli => {
                par::map_range(old.len(), exec, |j| {
                    if on(j) {
                        old[j ^ mt].clone()
                    } else {
                        old[j].clone()
                    }
                })
            }
            GateKind::Fredkin => {
                let mu = self.mask(gate.targets[1]);
                par::map_range(old.len(), exec, |j| {
                    if on(j) && (j & mt == 0) != (j & mu == 0) {
                        old[j ^ mt ^ mu].clone()
                    } else {
                        old[j].clone()
                    }
                })
            }
            GateKind::Z | GateKind::Cz => par::map_range(old.len(), exec, |j| {
                if on(j) && j & mt != 0 {
                    neg_coeffs(&old[j])
                } else {
                    old[j].clone()
                }
            }),
            GateKind::S => phase(old, mt, exec, mul_i),
            GateKind::T => phase(old, mt, exec, mul_omega),
            GateKind::Y => par::map_range(old.len(), exec, |j| {
                if j & mt == 0 {
                    neg_coeffs(&mul_i(&old[j | mt]))
                } else {
                    mul_i(&old[j & !mt])
                }
            }),
            GateKind::H => par::map_range(old.len(), exec, |j| {
                let (a0, a1) = (&old[j & !mt], &old[j | mt]);
                if j & mt == 0 {
                    add_coeffs(a0, a1)
                } else {
                    sub_coeffs(a0, a1)
                }
            }),
            GateKind::Rx90 => par::map_range(old.len(), exec, |j| {
                sub_coeffs(&old[j], &mul_i(&old[j ^ mt]))
            }),
            GateKind::Ry90 => par::map_range(old.len(), exec, |j| {
                let (a0, a1) = (&old[j & !mt], &old[j | mt]);
                if j & mt == 0 {
                    sub_coeffs(a0, a1)
                } else {
                    add_coeffs(a0, a1)
                }
            }),
        };
        self.amps = new;
        if gate.kind.increments_k() {
            self.k += 1;
        }
    }

    pub fn amplitude(&self, index: usize) -> AlgebraicAmplitude {
        AlgebraicAmplitude::from_coeffs(self.amps[index].clone(), self.k)
    }

    pub fn amplitudes(&self) -> Vec<AlgebraicAmplitude> {
        (0..self.amps.len()).map(|i| self.amplitude(i)).collect()
    }

    /// `(Σu, Σv)` over the `|α|²` numerators; normalized iff `(2^k, 0)`.
    pub fn norm_numerators(&self) -> (BigInt, BigInt) {
        let mut su = BigInt::from(0);
        let mut sv = BigInt::from(0);
        for i in 0..self.amps.len() {
            let (u, v) = self.amplitude(i).abs2_numerators();
            su += u;
            sv += v;
        }
        (su, sv)
    }

    /// Brute-force probability that `qubits[i]` reads `outcome[i]` for all `i`.
    pub fn marginal(&self, qubits: &[usize], outcome: &[bool]) -> ExactProb {
        (0..self.amps.len())
            .filter(|&j| {
                qubits
                    .iter()
                    .zip(outcome)
                    .all(|(&q, &b)| (j & self.mask(q) != 0) == b)
            })
            .map(|j| self.amplitude(j).abs2_exact())
            .sum()
    }
}

fn phase(old: &[Coeffs], mt: usize, exec: Execution, f: fn(&Coeffs) -> Coeffs) -> Vec<Coeffs> {
    par::map_range(old.len(), exec, |j| {
        if j & mt != 0 {
            f(&old[j])
        } else {
            old[j].clone()
        }
    })
}

/// Runs the circuit on the dense simulator.
pub fn simulate_dense(circuit: &Circuit) -> Result<DenseState> {
    simulate_dense_with(circuit, Execution::default())
}

pub fn simulate_dense_with(circuit: &Circuit, exec: Execution) -> Result<DenseState> {
    let mut st = DenseState::basis(circuit.n, &circuit.initial_bits())?;
    for (index, gate) in circuit.gates.iter().enumerate() {
        gate.validate(circuit.n)
            .map_err(|source| SimError::InvalidGate { index, source })?;
        st.apply(gate, exec);
    }
    Ok(st)
}

/// First basis index at which the two simulators disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub index: usize,
    pub bits: Vec<bool>,
    pub sliced: AlgebraicAmplitude,
    pub dense: AlgebraicAmplitude,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompareReport {
    pub first_divergence: Option<Divergence>,
}

impl CompareReport {
    pub fn is_equal(&self) -> bool {
        self.first_divergence.is_none()
    }
}

/// Compares every amplitude after bringing both sides to a common `k`.
pub fn compare(state: &SlicedState, dense: &DenseState) -> Result<CompareReport> {
    if state.num_qubits() != dense.n {
        return Err(SimError::QubitCountMismatch {
            circuit: dense.n,
            state: state.num_qubits(),
        });
    }
    let sliced = state.decode_all()?;
    let first_divergence = sliced.into_iter().enumerate().find_map(|(index, s)| {
        let d = dense.amplitude(index);
        (!s.value_eq(&d)).then(|| Divergence {
            index,
            bits: index_to_bits(index, dense.n),
            sliced: s,
            dense: d,
        })
    });
    Ok(CompareReport { first_divergence })
}

/// Deliberate corruption used to confirm that checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Flips bit 0 of the `d` integer at `index` after gate `after_gate`
    /// (or at the end if the circuit is shorter).
    FlipBit { after_gate: usize, index: usize },
}

/// Applies a fault to the sliced state.
pub fn inject(state: &mut SlicedState, fault: Fault) -> Result<()> {
    let Fault::FlipBit { index, .. } = fault;
    let n = state.num_qubits();
    let bits = index_to_bits(index, n);
    let cube = Cube::new(
        bits.iter()
            .enumerate()
            .map(|(q, &b)| Literal::new(VarId(q as u32), b)),
    )?;
    let d0 = state.slice(Family::D, 0);
    let bdd = state.bdd_mut();
    let minterm = bdd.cube(&cube)?;
    let flipped = bdd.xor(d0, minterm)?;
    state.set_slice(Family::D, 0, flipped);
    Ok(())
}

/// Parameters of a randomized differential run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub cases: usize,
    pub seed: u64,
    pub r_init: usize,
    /// Compare and check normalization after every gate, not just at the end.
    pub per_gate: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 10,
            cases: 20,
            seed: 1,
            r_init: 32,
            per_gate: false,
        }
    }
}

/// Why a case failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseFailure {
    Mismatch {
        gate: Option<usize>,
        divergence: Box<Divergence>,
    },
    /// `(Σu, Σv) ≠ (2^k, 0)` after a gate.
    Normalization {
        gate: usize,
        sum_u: BigInt,
        sum_v: BigInt,
        k: i64,
    },
    Error(SimError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    pub n: usize,
    pub case: usize,
    pub circuit_seed: u64,
    pub failure: CaseFailure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub cases_run: usize,
    pub gates_checked: usize,
    /// First failure in `(n, case)` order.
    pub failure: Option<CheckFailure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Seed of the circuit for case `case` at `n` qubits.
pub fn case_seed(seed: u64, n: usize, case: usize) -> u64 {
    // splitmix64 finalizer over the packed coordinates
    let mut z = seed
        .wrapping_add((n as u64) << 32 | case as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_case(
    circuit: &Circuit,
    cfg: &CheckConfig,
    fault: Option<Fault>,
) -> std::result::Result<usize, CaseFailure> {
    let sim = SimConfig {
        r_init: cfg.r_init,
        enum_limit: ORACLE_LIMIT,
        ..SimConfig::default()
    };
    let err = CaseFailure::Error;
    let mut state =
        SlicedState::init_basis_state(circuit.n, &circuit.initial_bits(), sim).map_err(err)?;
    let mut dense = DenseState::basis(circuit.n, &circuit.initial_bits()).map_err(err)?;
    let last = circuit.gates.len().saturating_sub(1);
    let fault_at = fault.map(|Fault::FlipBit { after_gate, .. }| after_gate.min(last));
    for (i, gate) in circuit.gates.iter().enumerate() {
        apply_gate(&mut state, gate).map_err(err)?;
        dense.apply(gate, Execution::Sequential);
        if fault_at == Some(i) {
            inject(&mut state, fault.expect("fault set")).map_err(err)?;
        }
        if cfg.per_gate {
            let report = compare(&state, &dense).map_err(err)?;
            if let Some(divergence) = report.first_divergence {
                return Err(CaseFailure::Mismatch {
                    gate: Some(i),
                    divergence: Box::new(divergence),
                });
            }
            let (sum_u, sum_v) = state.norm_numerators();
            if sum_u != BigInt::from(1) << state.k() as usize || sum_v != BigInt::from(0) {
                return Err(CaseFailure::Normalization {
                    gate: i,
                    sum_u,
                    sum_v,
                    k: state.k(),
                });
            }
        }
    }
    let report = compare(&state, &dense).map_err(err)?;
    if let Some(divergence) = report.first_divergence {
        return Err(CaseFailure::Mismatch {
            gate: None,
            divergence: Box::new(divergence),
        });
    }
    Ok(circuit.gates.len())
}

/// Runs `cases` random circuits for every `n` in `n_min..=n_max` through
/// both simulators.
pub fn run_differential_check(
    cfg: &CheckConfig,
    exec: Execution,
    fault: Option<Fault>,
) -> Result<CheckReport> {
    if cfg.n_max > ORACLE_LIMIT {
        return Err(SimError::EnumerationLimit {
            n: cfg.n_max,
            limit: ORACLE_LIMIT,
        });
    }
    let jobs: Vec<(usize, usize)> = (cfg.n_min.max(2)..=cfg.n_max)
        .flat_map(|n| (0..cfg.cases).map(move |c| (n, c)))
        .collect();
    let results = par::map_slice(&jobs, exec, |&(n, case)| {
        let circuit_seed = case_seed(cfg.seed, n, case);
        let circuit = gen_random(n, circuit_seed).expect("n >= 2");
        (circuit_seed, run_case(&circuit, cfg, fault))
    });
    let mut gates_checked = 0;
    let mut failure = None;
    for (&(n, case), (circuit_seed, res)) in jobs.iter().zip(results) {
        match res {
            Ok(g) => gates_checked += g,
            Err(f) => {
                failure.get_or_insert(CheckFailure {
                    n,
                    case,
                    circuit_seed,
                    failure: f,
                });
            }
        }
    }
    Ok(CheckReport {
        cases_run: jobs.len(),
        gates_checked,
        failure,
    })
}
