//! Benchmark circuit generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Gate, GateKind};

/// Gates drawn by [`gen_random`]; the 90° rotations are excluded.
pub const RANDOM_GATE_POOL: [GateKind; 10] = [
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::H,
    GateKind::S,
    GateKind::T,
    GateKind::Cnot,
    GateKind::Cz,
    GateKind::Toffoli,
    GateKind::Fredkin,
];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("{family} circuits need at least {min} qubit(s), got {n}")]
    TooFewQubits {
        family: &'static str,
        n: usize,
        min: usize,
    },
    #[error("hidden string has length {got}, expected {expected}")]
    HiddenLength { got: usize, expected: usize },
}

fn require(family: &'static str, n: usize, min: usize) -> Result<(), GenError> {
    if n < min {
        Err(GenError::TooFewQubits { family, n, min })
    } else {
        Ok(())
    }
}

/// `n` Hadamards followed by `3n` gates drawn uniformly from
/// [`RANDOM_GATE_POOL`] with distinct, uniformly chosen operands.
///
/// Toffoli takes 2 controls and Fredkin 1 control. With `n = 2` both lose a
/// control so that every pool gate stays drawable.
pub fn gen_random(n: usize, seed: u64) -> Result<Circuit, GenError> {
    require("random", n, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::h(q));
    }
    let wide = n >= 3;
    for _ in 0..3 * n {
        let kind = RANDOM_GATE_POOL[rng.random_range(0..RANDOM_GATE_POOL.len())];
        let (controls, targets) = match kind {
            GateKind::Cnot | GateKind::Cz => (1, 1),
            GateKind::Toffoli => (if wide { 2 } else { 1 }, 1),
            GateKind::Fredkin => (if wide { 1 } else { 0 }, 2),
            _ => (0, 1),
        };
        let ops = sample(&mut rng, n, controls + targets).into_vec();
        let (cs, ts) = ops.split_at(controls);
        c.push(Gate::new(kind, cs.to_vec(), ts.to_vec()));
    }
    Ok(c)
}

/// GHZ preparation: `H(0)` then a CNOT chain; measures qubit 0.
pub fn gen_ghz(n: usize) -> Result<Circuit, GenError> {
    require("ghz", n, 1)?;
    let mut c = Circuit::new(n);
    c.push(Gate::h(0));
    for i in 0..n - 1 {
        c.push(Gate::cx(i, i + 1));
    }
    c.measure = Some(vec![0]);
    Ok(c)
}

/// Bernstein-Vazirani with the all-ones hidden string over qubits
/// `0..n-1`; qubit `n-1` is the ancilla.
pub fn gen_bv(n: usize) -> Result<Circuit, GenError> {
    require("bv", n, 2)?;
    gen_bv_with_hidden(&vec![true; n - 1])
}

/// Bernstein-Vazirani over `hidden.len() + 1` qubits.
pub fn gen_bv_with_hidden(hidden: &[bool]) -> Result<Circuit, GenError> {
    let n = hidden.len() + 1;
    require("bv", n, 2)?;
    let anc = n - 1;
    let mut c = Circuit::new(n);
    c.push(Gate::x(anc));
    for q in 0..n {
        c.push(Gate::h(q));
    }
    for (i, _) in hidden.iter().enumerate().filter(|(_, &b)| b) {
        c.push(Gate::cx(i, anc));
    }
    for q in 0..anc {
        c.push(Gate::h(q));
    }
    c.measure = Some((0..anc).collect());
    Ok(c)
}
