//! Deterministic fuzz corpus for the circuit text format.
//!
//! Shared with the acceptance suite of the CLI crate through `#[path]`.

#![allow(dead_code)]

use qsim_core::circuit::{serialize, Circuit, Gate, GateKind, ParseErrorKind, MAX_QUBITS};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One corpus entry.
#[derive(Debug)]
pub enum Case {
    /// Must parse to exactly this circuit.
    Valid { text: String, circuit: Circuit },
    /// Must be rejected at `line` with a diagnostic of class `class`.
    Malformed {
        text: String,
        line: usize,
        class: Class,
    },
    /// Arbitrary input; any outcome except a panic is acceptable.
    Garbage { text: String },
}

/// Malformed-input classes, one per diagnostic the parser can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    MissingQubits,
    InvalidQubitCount,
    UnknownDirective,
    UnknownMnemonic,
    DirectiveOrder,
    DuplicateDirective,
    InvalidIndex,
    InvalidBitstring,
    Arity,
    IndexOutOfRange,
    DuplicateOperand,
    EmptyMeasure,
}

impl Class {
    pub const ALL: [Class; 12] = [
        Class::MissingQubits,
        Class::InvalidQubitCount,
        Class::UnknownDirective,
        Class::UnknownMnemonic,
        Class::DirectiveOrder,
        Class::DuplicateDirective,
        Class::InvalidIndex,
        Class::InvalidBitstring,
        Class::Arity,
        Class::IndexOutOfRange,
        Class::DuplicateOperand,
        Class::EmptyMeasure,
    ];

    pub fn of(kind: &ParseErrorKind) -> Class {
        match kind {
            ParseErrorKind::MissingQubits => Class::MissingQubits,
            ParseErrorKind::InvalidQubitCount(_) => Class::InvalidQubitCount,
            ParseErrorKind::UnknownDirective(_) => Class::UnknownDirective,
            ParseErrorKind::UnknownMnemonic(_) => Class::UnknownMnemonic,
            ParseErrorKind::DirectiveOrder(_) => Class::DirectiveOrder,
            ParseErrorKind::DuplicateDirective(_) => Class::DuplicateDirective,
            ParseErrorKind::InvalidIndex(_) => Class::InvalidIndex,
            ParseErrorKind::InvalidBitstring(_) => Class::InvalidBitstring,
            ParseErrorKind::Arity { .. } => Class::Arity,
            ParseErrorKind::IndexOutOfRange { .. } => Class::IndexOutOfRange,
            ParseErrorKind::DuplicateOperand(_) => Class::DuplicateOperand,
            ParseErrorKind::EmptyMeasure => Class::EmptyMeasure,
        }
    }
}

pub fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    loop {
        let kind = *GateKind::ALL.choose(rng).unwrap();
        let (c, t) = match kind {
            GateKind::Cnot | GateKind::Cz => (1, 1),
            GateKind::Toffoli => (rng.random_range(1..n.max(2)), 1),
            GateKind::Fredkin => (rng.random_range(0..n.max(2) - 1), 2),
            _ => (0, 1),
        };
        if c + t > n {
            continue;
        }
        let mut qs: Vec<usize> = (0..n).collect();
        qs.shuffle(rng);
        return Gate::new(kind, qs[..c].to_vec(), qs[c..c + t].to_vec());
    }
}

pub fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let n = rng.random_range(1..=12);
    let mut c = Circuit::new(n);
    if rng.random_bool(0.3) {
        c.init = Some((0..n).map(|_| rng.random_bool(0.5)).collect());
    }
    for _ in 0..rng.random_range(0..30) {
        c.push(random_gate(rng, n));
    }
    if rng.random_bool(0.4) {
        let mut qs: Vec<usize> = (0..n).collect();
        qs.shuffle(rng);
        qs.truncate(rng.random_range(1..=n));
        c.measure = Some(qs);
    }
    c
}

/// Re-renders `text` with comments, blank lines, odd spacing and CRLF
/// endings, none of which change its meaning.
fn add_noise(rng: &mut ChaCha8Rng, text: &str) -> String {
    let eol = if rng.random_bool(0.2) { "\r\n" } else { "\n" };
    let mut out = String::new();
    for line in text.lines() {
        if rng.random_bool(0.2) {
            out += &format!("# {}{eol}", rng.random::<u32>());
        }
        if rng.random_bool(0.1) {
            out += eol;
        }
        let sep = [" ", "  ", "\t", " \t "];
        let lead = if rng.random_bool(0.2) { "  " } else { "" };
        let body = line
            .split(' ')
            .collect::<Vec<_>>()
            .join(sep.choose(rng).unwrap());
        let tail = if rng.random_bool(0.2) {
            " # trailing"
        } else {
            ""
        };
        out += &format!("{lead}{body}{tail}{eol}");
    }
    out
}

fn lines_of(c: &Circuit) -> Vec<String> {
    serialize(c).lines().map(str::to_owned).collect()
}

/// Index of the first line after the `.qubits`/`.init` preamble.
fn first_gate_line(c: &Circuit) -> usize {
    1 + c.init.is_some() as usize
}

fn malformed(rng: &mut ChaCha8Rng, class: Class) -> Case {
    // three or more qubits leave room for every gate shape
    let mut c = random_circuit(rng);
    while c.n < 3 {
        c = random_circuit(rng);
    }
    let n = c.n;
    let mut lines = lines_of(&c);
    let gates_from = first_gate_line(&c);
    let gates_to = gates_from + c.gates.len();
    let at = rng.random_range(gates_from..=gates_to);
    let insert = |lines: &mut Vec<String>, at: usize, text: String| {
        lines.insert(at, text);
        at + 1
    };
    let line = match class {
        Class::MissingQubits => {
            lines.remove(0);
            if lines.is_empty() || rng.random_bool(0.3) {
                lines.insert(0, "h 0".into());
            }
            // first meaningful line is now the culprit
            1
        }
        Class::InvalidQubitCount => {
            let bad = ["0", "-3", "abc", "", "3 4", "1e3", "0x10"];
            let big = (MAX_QUBITS + 1).to_string();
            let v = if rng.random_bool(0.15) {
                big.as_str()
            } else {
                bad.choose(rng).unwrap()
            };
            lines[0] = format!(".qubits {v}");
            1
        }
        Class::UnknownDirective => {
            let d = [".reset 0", ".qubit 3", ".QUBITS 2", ".", ".measure_all"];
            insert(&mut lines, at.max(1), d.choose(rng).unwrap().to_string())
        }
        Class::UnknownMnemonic => {
            let m = [
                "cnot 0 1",
                "H 0",
                "u3 0",
                "toffoli 0 1 2",
                "swap 0 1",
                "rz 0",
                "xx",
            ];
            insert(&mut lines, at, m.choose(rng).unwrap().to_string())
        }
        Class::DirectiveOrder => {
            if rng.random_bool(0.5) {
                // `.init` after a gate
                let bits: String = (0..n).map(|_| '0').collect();
                lines.retain(|l| !l.starts_with(".init"));
                let g = 1;
                lines.insert(g, "x 0".into());
                insert(&mut lines, g + 1, format!(".init {bits}"))
            } else {
                // gate after `.measure`
                lines.retain(|l| !l.starts_with(".measure"));
                lines.push(".measure 0".into());
                let at = lines.len();
                insert(&mut lines, at, "h 1".into())
            }
        }
        Class::DuplicateDirective => match rng.random_range(0..3) {
            0 => insert(&mut lines, 1, format!(".qubits {n}")),
            1 => {
                lines.retain(|l| !l.starts_with(".init"));
                let bits: String = (0..n).map(|_| '1').collect();
                lines.insert(1, format!(".init {bits}"));
                insert(&mut lines, 2, format!(".init {bits}"))
            }
            _ => {
                lines.retain(|l| !l.starts_with(".measure"));
                lines.push(".measure 0".into());
                let at = lines.len();
                insert(&mut lines, at, ".measure 1".into())
            }
        },
        Class::InvalidIndex => {
            let bad = [
                "-1",
                "a",
                "1.5",
                "+2",
                "99999999999999999999999",
                "0x1",
                "١",
            ];
            let b = bad.choose(rng).unwrap();
            let text = match rng.random_range(0..3) {
                0 => format!("h {b}"),
                1 => format!("cx 0 {b}"),
                _ => format!("ccx {b} 1 2"),
            };
            insert(&mut lines, at, text)
        }
        Class::InvalidBitstring => {
            lines.retain(|l| !l.starts_with(".init"));
            let bad = match rng.random_range(0..4) {
                0 => "0".repeat(n + 1),
                1 => "0".repeat(n - 1),
                2 => format!("{}2", "0".repeat(n - 1)),
                _ => format!("{} 0", "0".repeat(n)),
            };
            insert(&mut lines, 1, format!(".init {bad}"))
        }
        Class::Arity => {
            let t = [
                "cx 0",
                "cz 0 1 2",
                "h 0 1",
                "h",
                "ccx 0",
                "fredkin 1",
                "t 0 1 2",
            ];
            insert(&mut lines, at, t.choose(rng).unwrap().to_string())
        }
        Class::IndexOutOfRange => {
            let text = match rng.random_range(0..3) {
                0 => format!("x {n}"),
                1 => format!("cx 0 {}", n + rng.random_range(0..100)),
                _ => format!("fredkin {n} 0 1"),
            };
            insert(&mut lines, at, text)
        }
        Class::DuplicateOperand => {
            let text = match rng.random_range(0..3) {
                0 => "cx 1 1".to_string(),
                1 => "ccx 0 2 0".to_string(),
                _ => "fredkin 0 1 1".to_string(),
            };
            insert(&mut lines, at, text)
        }
        Class::EmptyMeasure => {
            lines.retain(|l| !l.starts_with(".measure"));
            lines.push(".measure".into());
            lines.len()
        }
    };
    Case::Malformed {
        text: lines.join("\n") + "\n",
        line,
        class,
    }
}

fn garbage(rng: &mut ChaCha8Rng) -> String {
    const PIECES: [&str; 24] = [
        ".qubits",
        ".init",
        ".measure",
        "h",
        "cx",
        "ccx",
        "fredkin",
        "rx",
        "0",
        "1",
        "7",
        "18446744073709551616",
        "-",
        "#",
        " ",
        "\t",
        "\n",
        "\r\n",
        "é",
        "ω",
        "\u{0}",
        ".",
        "x",
        "01",
    ];
    let mut s = String::new();
    if rng.random_bool(0.5) {
        s += &format!(".qubits {}\n", rng.random_range(0..6));
    }
    for _ in 0..rng.random_range(0..60) {
        if rng.random_bool(0.1) {
            s.push(char::from_u32(rng.random_range(0..0x3000)).unwrap_or('?'));
        } else {
            s += PIECES.choose(rng).unwrap();
        }
        if rng.random_bool(0.4) {
            s.push(' ');
        }
    }
    s
}

/// The `index`-th corpus case; the same index always yields the same case.
pub fn case(index: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + index);
    match index % 4 {
        0 | 1 => {
            let circuit = random_circuit(&mut rng);
            let text = serialize(&circuit);
            let text = if index % 4 == 1 {
                add_noise(&mut rng, &text)
            } else {
                text
            };
            Case::Valid { text, circuit }
        }
        2 => {
            let class = Class::ALL[(index / 4) as usize % Class::ALL.len()];
            malformed(&mut rng, class)
        }
        _ => Case::Garbage {
            text: garbage(&mut rng),
        },
    }
}

/// Checks one case; `Err` describes the violation.
pub fn check(case: &Case) -> Result<(), String> {
    use qsim_core::circuit::parse;
    match case {
        Case::Valid { text, circuit } => {
            let parsed = parse(text).map_err(|e| format!("valid input rejected: {e}\n{text}"))?;
            if &parsed != circuit {
                return Err(format!("parsed circuit differs\n{text}"));
            }
            let again = parse(&serialize(&parsed)).map_err(|e| e.to_string())?;
            if &again != circuit {
                return Err("serialize round trip differs".into());
            }
            Ok(())
        }
        Case::Malformed { text, line, class } => match parse(text) {
            Ok(_) => Err(format!("{class:?} accepted\n{text}")),
            Err(e) if Class::of(&e.kind) != *class || e.line != *line => Err(format!(
                "expected {class:?} on line {line}, got line {}: {e}\n{text}",
                e.line
            )),
            Err(e) if e.column == 0 || e.to_string().is_empty() => {
                Err(format!("bad diagnostic {e:?}"))
            }
            Err(_) => Ok(()),
        },
        Case::Garbage { text } => match parse(text) {
            Ok(c) => {
                // whatever was accepted must survive a round trip
                let again = parse(&serialize(&c)).map_err(|e| e.to_string())?;
                (again == c)
                    .then_some(())
                    .ok_or_else(|| "garbage round trip differs".into())
            }
            Err(e) => {
                let lines = text.lines().count().max(1);
                if e.line == 0 || e.line > lines || e.column == 0 {
                    return Err(format!("diagnostic position out of range: {e:?}"));
                }
                Ok(())
            }
        },
    }
}
