#![allow(dead_code)]

use proptest::prelude::*;
use qsim_core::circuit::{Circuit, Gate, GateKind};
use qsim_core::kernels::apply_gate;
use qsim_core::oracle::DenseState;
use qsim_core::{Execution, SimConfig, SlicedState};

pub fn config(r_init: usize) -> SimConfig {
    SimConfig {
        r_init,
        ..SimConfig::default()
    }
}

/// Operand shapes that are legal for `kind` on `n` qubits.
pub fn arity(kind: GateKind, n: usize) -> Option<(usize, usize)> {
    let (c, t) = match kind {
        GateKind::Cnot | GateKind::Cz => (1, 1),
        GateKind::Toffoli => (2.min(n.saturating_sub(1)).max(1), 1),
        GateKind::Fredkin => (1.min(n.saturating_sub(2)), 2),
        _ => (0, 1),
    };
    (c + t <= n).then_some((c, t))
}

/// A random gate of any kind with distinct operands.
pub fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let kinds: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|&k| arity(k, n).is_some())
        .collect();
    (
        proptest::sample::select(kinds),
        Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
    )
        .prop_map(move |(kind, qs)| {
            let (c, t) = arity(kind, n).expect("filtered");
            Gate::new(kind, qs[..c].to_vec(), qs[c..c + t].to_vec())
        })
}

pub fn circuit_strategy(n: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    proptest::collection::vec(gate_strategy(n), 0..=max_gates).prop_map(move |gates| {
        let mut c = Circuit::new(n);
        c.gates = gates;
        c
    })
}

/// Runs `circuit` on both simulators, checking equality after every gate.
pub fn run_both(circuit: &Circuit, r_init: usize) -> (SlicedState, DenseState) {
    let bits = circuit.initial_bits();
    let mut s = SlicedState::init_basis_state(circuit.n, &bits, config(r_init)).unwrap();
    let mut d = DenseState::basis(circuit.n, &bits).unwrap();
    for g in &circuit.gates {
        apply_gate(&mut s, g).unwrap();
        d.apply(g, Execution::Sequential);
    }
    (s, d)
}
