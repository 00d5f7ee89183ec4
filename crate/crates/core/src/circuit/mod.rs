//! Circuit representation, the QSIM text format and benchmark generators.

mod gen;
mod parse;

use std::collections::HashSet;
use std::fmt;

pub use gen::{gen_bv, gen_bv_with_hidden, gen_ghz, gen_random, GenError, RANDOM_GATE_POOL};
pub use parse::{parse, serialize, ParseError, ParseErrorKind};

/// Largest register the text format accepts. Each qubit becomes a BDD
/// variable, so this is far beyond anything that simulates.
pub const MAX_QUBITS: usize = 1 << 20;

/// Gate library: Clifford+T plus the reversible Toffoli/Fredkin family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    T,
    Rx90,
    Ry90,
    Cnot,
    Cz,
    Toffoli,
    Fredkin,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::T,
        GateKind::Rx90,
        GateKind::Ry90,
        GateKind::Cnot,
        GateKind::Cz,
        GateKind::Toffoli,
        GateKind::Fredkin,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::T => "t",
            GateKind::Rx90 => "rx",
            GateKind::Ry90 => "ry",
            GateKind::Cnot => "cx",
            GateKind::Cz => "cz",
            GateKind::Toffoli => "ccx",
            GateKind::Fredkin => "fredkin",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        GateKind::ALL.into_iter().find(|g| g.mnemonic() == s)
    }

    /// Whether the gate scales amplitudes by 1/√2.
    pub fn increments_k(self) -> bool {
        matches!(self, GateKind::H | GateKind::Rx90 | GateKind::Ry90)
    }

    /// Gates that only permute basis states.
    pub fn is_permutation(self) -> bool {
        matches!(
            self,
            GateKind::X | GateKind::Cnot | GateKind::Toffoli | GateKind::Fredkin
        )
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// A gate with its operands.
///
/// `cz a b` is stored with `a` as control and `b` as target; the gate is
/// symmetric so the distinction only matters for printing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
}

/// Structural problems with a gate's operands.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OperandError {
    #[error("{kind} expects {expected}, got {controls} control(s) and {targets} target(s)")]
    Arity {
        kind: GateKind,
        expected: &'static str,
        controls: usize,
        targets: usize,
    },
    #[error("qubit index {index} out of range for {n} qubit(s)")]
    OutOfRange { index: usize, n: usize },
    #[error("qubit {0} used more than once")]
    Duplicate(usize),
}

impl Gate {
    pub fn new(kind: GateKind, controls: Vec<usize>, targets: Vec<usize>) -> Self {
        Self {
            kind,
            controls,
            targets,
        }
    }

    pub fn single(kind: GateKind, t: usize) -> Self {
        Self::new(kind, vec![], vec![t])
    }

    pub fn x(t: usize) -> Self {
        Self::single(GateKind::X, t)
    }

    pub fn h(t: usize) -> Self {
        Self::single(GateKind::H, t)
    }

    pub fn cx(c: usize, t: usize) -> Self {
        Self::new(GateKind::Cnot, vec![c], vec![t])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a], vec![b])
    }

    pub fn toffoli(controls: Vec<usize>, t: usize) -> Self {
        Self::new(GateKind::Toffoli, controls, vec![t])
    }

    pub fn fredkin(controls: Vec<usize>, t1: usize, t2: usize) -> Self {
        Self::new(GateKind::Fredkin, controls, vec![t1, t2])
    }

    /// All operands, controls first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(&self.targets).copied()
    }

    fn arity_ok(&self) -> Result<(), &'static str> {
        let (c, t) = (self.controls.len(), self.targets.len());
        let (ok, expected) = match self.kind {
            GateKind::Cnot | GateKind::Cz => (c == 1 && t == 1, "1 control and 1 target"),
            GateKind::Toffoli => (c >= 1 && t == 1, "at least 1 control and 1 target"),
            GateKind::Fredkin => (t == 2, "any number of controls and 2 targets"),
            _ => (c == 0 && t == 1, "1 target"),
        };
        if ok {
            Ok(())
        } else {
            Err(expected)
        }
    }

    /// Checks arity, range and operand distinctness for an `n`-qubit register.
    pub fn validate(&self, n: usize) -> Result<(), OperandError> {
        self.arity_ok().map_err(|expected| OperandError::Arity {
            kind: self.kind,
            expected,
            controls: self.controls.len(),
            targets: self.targets.len(),
        })?;
        let mut seen = HashSet::new();
        for q in self.qubits() {
            if q >= n {
                return Err(OperandError::OutOfRange { index: q, n });
            }
            if !seen.insert(q) {
                return Err(OperandError::Duplicate(q));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.mnemonic())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// An ordered gate list over `n` qubits with an optional initial basis
/// state and measured-qubit list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub n: usize,
    /// Initial basis state, qubit 0 first; all-zero when absent.
    pub init: Option<Vec<bool>>,
    pub gates: Vec<Gate>,
    pub measure: Option<Vec<usize>>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            init: None,
            gates: Vec::new(),
            measure: None,
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn initial_bits(&self) -> Vec<bool> {
        self.init.clone().unwrap_or_else(|| vec![false; self.n])
    }
}

/// Parses a `0`/`1` string into bits.
pub fn parse_bitstring(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn format_bitstring(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_errors() {
        assert!(Gate::cx(0, 1).validate(2).is_ok());
        assert_eq!(Gate::cx(0, 0).validate(2), Err(OperandError::Duplicate(0)));
        assert_eq!(
            Gate::h(3).validate(2),
            Err(OperandError::OutOfRange { index: 3, n: 2 })
        );
        assert!(matches!(
            Gate::toffoli(vec![], 1).validate(2),
            Err(OperandError::Arity { .. })
        ));
        assert!(Gate::fredkin(vec![], 0, 1).validate(2).is_ok());
    }

    #[test]
    fn mnemonics_round_trip() {
        for g in GateKind::ALL {
            assert_eq!(GateKind::from_mnemonic(g.mnemonic()), Some(g));
        }
        assert_eq!(GateKind::from_mnemonic("swap"), None);
    }
}
