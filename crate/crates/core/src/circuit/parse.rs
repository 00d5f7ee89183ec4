//! The QSIM line-oriented circuit format.
//!
//! ```text
//! # comment
//! .qubits 3
//! .init 010          (optional, before the first gate)
//! h 0
//! cx 0 1
//! ccx 0 1 2          (any number of controls, target last)
//! fredkin 0 1 2      (any number of controls, two targets last)
//! .measure 0 1 2     (optional, last)
//! ```

use std::collections::HashSet;
use std::fmt;

use super::{format_bitstring, parse_bitstring, Circuit, Gate, GateKind, OperandError, MAX_QUBITS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingQubits,
    InvalidQubitCount(String),
    UnknownDirective(String),
    UnknownMnemonic(String),
    DirectiveOrder(&'static str),
    DuplicateDirective(&'static str),
    InvalidIndex(String),
    InvalidBitstring(String),
    Arity { mnemonic: String, operands: usize },
    IndexOutOfRange { index: usize, n: usize },
    DuplicateOperand(usize),
    EmptyMeasure,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            MissingQubits => write!(f, "expected `.qubits <n>` before anything else"),
            InvalidQubitCount(s) => write!(f, "invalid qubit count `{s}`"),
            UnknownDirective(s) => write!(f, "unknown directive `{s}`"),
            UnknownMnemonic(s) => write!(f, "unknown gate `{s}`"),
            DirectiveOrder(s) => write!(f, "{s}"),
            DuplicateDirective(s) => write!(f, "duplicate `{s}` directive"),
            InvalidIndex(s) => write!(f, "invalid qubit index `{s}`"),
            InvalidBitstring(s) => write!(f, "invalid initial state `{s}`"),
            Arity { mnemonic, operands } => {
                write!(f, "wrong number of operands for `{mnemonic}`: {operands}")
            }
            IndexOutOfRange { index, n } => {
                write!(f, "qubit index {index} out of range for {n} qubit(s)")
            }
            DuplicateOperand(q) => write!(f, "qubit {q} used more than once"),
            EmptyMeasure => write!(f, "`.measure` needs at least one qubit"),
        }
    }
}

/// A diagnostic with 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &code[s..i],
                    column: code[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &code[s..],
            column: code[..s].chars().count() + 1,
        });
    }
    tokens
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
enum Section {
    Header,
    Preamble,
    Gates,
    Done,
}

struct Parser {
    line: usize,
    section: Section,
    circuit: Circuit,
}

impl Parser {
    fn err(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column,
            kind,
        }
    }

    fn index(&self, tok: Token<'_>) -> Result<usize, ParseError> {
        if !tok.text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.err(tok.column, ParseErrorKind::InvalidIndex(tok.text.into())));
        }
        tok.text
            .parse()
            .map_err(|_| self.err(tok.column, ParseErrorKind::InvalidIndex(tok.text.into())))
    }

    fn directive(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        let head = toks[0];
        match head.text {
            ".qubits" => {
                if self.section != Section::Header {
                    return Err(
                        self.err(head.column, ParseErrorKind::DuplicateDirective(".qubits"))
                    );
                }
                let n = match toks {
                    [_, t] => match self.index(*t) {
                        Ok(n) if (1..=MAX_QUBITS).contains(&n) => n,
                        _ => {
                            return Err(self
                                .err(t.column, ParseErrorKind::InvalidQubitCount(t.text.into())))
                        }
                    },
                    _ => {
                        let col = toks.get(2).map_or(head.column, |t| t.column);
                        let text = toks[1..]
                            .iter()
                            .map(|t| t.text)
                            .collect::<Vec<_>>()
                            .join(" ");
                        return Err(self.err(col, ParseErrorKind::InvalidQubitCount(text)));
                    }
                };
                self.circuit.n = n;
                self.section = Section::Preamble;
            }
            ".init" => {
                match self.section {
                    Section::Header => {
                        return Err(self.err(head.column, ParseErrorKind::MissingQubits))
                    }
                    Section::Preamble if self.circuit.init.is_some() => {
                        return Err(
                            self.err(head.column, ParseErrorKind::DuplicateDirective(".init"))
                        )
                    }
                    Section::Preamble => {}
                    _ => {
                        return Err(self.err(
                            head.column,
                            ParseErrorKind::DirectiveOrder("`.init` must precede all gates"),
                        ))
                    }
                }
                let [_, t] = toks else {
                    let text = toks[1..]
                        .iter()
                        .map(|t| t.text)
                        .collect::<Vec<_>>()
                        .join(" ");
                    return Err(self.err(head.column, ParseErrorKind::InvalidBitstring(text)));
                };
                match parse_bitstring(t.text) {
                    Some(bits) if bits.len() == self.circuit.n => self.circuit.init = Some(bits),
                    _ => {
                        return Err(
                            self.err(t.column, ParseErrorKind::InvalidBitstring(t.text.into()))
                        )
                    }
                }
            }
            ".measure" => {
                match self.section {
                    Section::Header => {
                        return Err(self.err(head.column, ParseErrorKind::MissingQubits))
                    }
                    Section::Done => {
                        return Err(
                            self.err(head.column, ParseErrorKind::DuplicateDirective(".measure"))
                        )
                    }
                    _ => {}
                }
                if toks.len() < 2 {
                    return Err(self.err(head.column, ParseErrorKind::EmptyMeasure));
                }
                let n = self.circuit.n;
                let mut seen = HashSet::new();
                let mut qubits = Vec::new();
                for t in &toks[1..] {
                    let q = self.index(*t)?;
                    if q >= n {
                        return Err(
                            self.err(t.column, ParseErrorKind::IndexOutOfRange { index: q, n })
                        );
                    }
                    if !seen.insert(q) {
                        return Err(self.err(t.column, ParseErrorKind::DuplicateOperand(q)));
                    }
                    qubits.push(q);
                }
                self.circuit.measure = Some(qubits);
                self.section = Section::Done;
            }
            other => {
                return Err(self.err(head.column, ParseErrorKind::UnknownDirective(other.into())));
            }
        }
        Ok(())
    }

    fn gate(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        let head = toks[0];
        match self.section {
            Section::Header => return Err(self.err(head.column, ParseErrorKind::MissingQubits)),
            Section::Done => {
                return Err(self.err(
                    head.column,
                    ParseErrorKind::DirectiveOrder("gates may not follow `.measure`"),
                ))
            }
            _ => {}
        }
        let kind = GateKind::from_mnemonic(head.text).ok_or_else(|| {
            self.err(
                head.column,
                ParseErrorKind::UnknownMnemonic(head.text.into()),
            )
        })?;
        let operands = &toks[1..];
        let indices = operands
            .iter()
            .map(|t| self.index(*t))
            .collect::<Result<Vec<_>, _>>()?;
        let arity = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(self.err(
                    head.column,
                    ParseErrorKind::Arity {
                        mnemonic: head.text.into(),
                        operands: indices.len(),
                    },
                ))
            }
        };
        let gate = match kind {
            GateKind::Cnot | GateKind::Cz => {
                arity(indices.len() == 2)?;
                Gate::new(kind, vec![indices[0]], vec![indices[1]])
            }
            GateKind::Toffoli => {
                arity(indices.len() >= 2)?;
                let (c, t) = indices.split_at(indices.len() - 1);
                Gate::new(kind, c.to_vec(), t.to_vec())
            }
            GateKind::Fredkin => {
                arity(indices.len() >= 2)?;
                let (c, t) = indices.split_at(indices.len() - 2);
                Gate::new(kind, c.to_vec(), t.to_vec())
            }
            _ => {
                arity(indices.len() == 1)?;
                Gate::single(kind, indices[0])
            }
        };
        if let Err(e) = gate.validate(self.circuit.n) {
            // locate the offending operand for the diagnostic
            let (q, kind) = match e {
                OperandError::OutOfRange { index, n } => {
                    (index, ParseErrorKind::IndexOutOfRange { index, n })
                }
                OperandError::Duplicate(q) => (q, ParseErrorKind::DuplicateOperand(q)),
                OperandError::Arity { .. } => unreachable!("arity checked above"),
            };
            let mut hits = operands.iter().zip(&indices).filter(|(_, &i)| i == q);
            let first = hits.next().map(|(t, _)| t.column);
            let col = match kind {
                ParseErrorKind::DuplicateOperand(_) => hits.next().map(|(t, _)| t.column),
                _ => first,
            };
            return Err(self.err(col.unwrap_or(head.column), kind));
        }
        self.circuit.gates.push(gate);
        self.section = Section::Gates;
        Ok(())
    }
}

/// Parses and validates a circuit in the QSIM text format.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut p = Parser {
        line: 0,
        section: Section::Header,
        circuit: Circuit::new(0),
    };
    for (i, line) in text.lines().enumerate() {
        p.line = i + 1;
        let toks = tokenize(line);
        let Some(head) = toks.first() else { continue };
        if head.text.starts_with('.') {
            p.directive(&toks)?;
        } else {
            p.gate(&toks)?;
        }
    }
    if p.section == Section::Header {
        return Err(ParseError {
            line: p.line.max(1),
            column: 1,
            kind: ParseErrorKind::MissingQubits,
        });
    }
    Ok(p.circuit)
}

/// Renders a circuit in the QSIM text format.
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = format!(".qubits {}\n", circuit.n);
    if let Some(bits) = &circuit.init {
        out.push_str(&format!(".init {}\n", format_bitstring(bits)));
    }
    for g in &circuit.gates {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    if let Some(m) = &circuit.measure {
        out.push_str(".measure");
        for q in m {
            out.push_str(&format!(" {q}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind_of(text: &str) -> (usize, usize, ParseErrorKind) {
        let e = parse(text).unwrap_err();
        (e.line, e.column, e.kind)
    }

    #[test]
    fn bell_circuit() {
        let c = parse(".qubits 2\nh 0\ncx 0 1\n.measure 0 1").unwrap();
        assert_eq!(c.n, 2);
        assert_eq!(c.gates, vec![Gate::h(0), Gate::cx(0, 1)]);
        assert_eq!(c.measure, Some(vec![0, 1]));
    }

    #[test]
    fn toffoli_operands() {
        let c = parse(".qubits 3\nccx 0 1 2").unwrap();
        assert_eq!(c.gates, vec![Gate::toffoli(vec![0, 1], 2)]);
        let c = parse(".qubits 4\nfredkin 3 0 1 2 # comment").unwrap();
        assert_eq!(c.gates, vec![Gate::fredkin(vec![3, 0], 1, 2)]);
    }

    #[test]
    fn comments_blank_lines_and_init() {
        let c = parse("# header\n\n.qubits 3 # three\n.init 010\n  x 1  \n").unwrap();
        assert_eq!(c.init, Some(vec![false, true, false]));
        assert_eq!(c.gates, vec![Gate::x(1)]);
    }

    #[test]
    fn missing_qubits() {
        assert_eq!(kind_of("x 0"), (1, 1, ParseErrorKind::MissingQubits));
        assert_eq!(kind_of(""), (1, 1, ParseErrorKind::MissingQubits));
        assert_eq!(
            kind_of("# only a comment\n"),
            (1, 1, ParseErrorKind::MissingQubits)
        );
    }

    #[test]
    fn diagnostics_carry_positions() {
        assert_eq!(
            kind_of(".qubits 2\nfoo 0"),
            (2, 1, ParseErrorKind::UnknownMnemonic("foo".into()))
        );
        assert_eq!(
            kind_of(".qubits 2\nh 0\ncx 0 2"),
            (3, 6, ParseErrorKind::IndexOutOfRange { index: 2, n: 2 })
        );
        assert_eq!(
            kind_of(".qubits 3\nccx 1 0 1"),
            (2, 9, ParseErrorKind::DuplicateOperand(1))
        );
        assert_eq!(
            kind_of(".qubits 2\n  cx 0"),
            (
                2,
                3,
                ParseErrorKind::Arity {
                    mnemonic: "cx".into(),
                    operands: 1
                }
            )
        );
        assert_eq!(
            kind_of(".qubits 2\nh -1"),
            (2, 3, ParseErrorKind::InvalidIndex("-1".into()))
        );
        assert_eq!(
            kind_of(".qubits 0"),
            (1, 9, ParseErrorKind::InvalidQubitCount("0".into()))
        );
        assert_eq!(
            kind_of(".qubits 2\n.measure 0\nh 0"),
            (
                3,
                1,
                ParseErrorKind::DirectiveOrder("gates may not follow `.measure`")
            )
        );
        assert_eq!(
            kind_of(".qubits 2\nh 0\n.init 00"),
            (
                3,
                1,
                ParseErrorKind::DirectiveOrder("`.init` must precede all gates")
            )
        );
        assert_eq!(
            kind_of(".qubits 2\n.init 0"),
            (2, 7, ParseErrorKind::InvalidBitstring("0".into()))
        );
        assert_eq!(
            kind_of(".qubits 2\n.measure"),
            (2, 1, ParseErrorKind::EmptyMeasure)
        );
        assert_eq!(
            kind_of(".qubits 2\n.qubits 2"),
            (2, 1, ParseErrorKind::DuplicateDirective(".qubits"))
        );
        assert_eq!(
            kind_of(".qubits 2\n.reset"),
            (2, 1, ParseErrorKind::UnknownDirective(".reset".into()))
        );
    }

    #[test]
    fn empty_circuit_serializes_to_header() {
        let c = Circuit::new(3);
        assert_eq!(serialize(&c), ".qubits 3\n");
        assert_eq!(parse(&serialize(&c)).unwrap(), c);
    }

    #[test]
    fn serialize_round_trip() {
        let text =
            ".qubits 3\n.init 101\nh 0\nrx 1\nry 2\ncz 0 2\nccx 1 2\nfredkin 0 1\n.measure 2 0\n";
        let c = parse(text).unwrap();
        assert_eq!(serialize(&c), text);
    }

    #[test]
    fn error_display() {
        let e = parse("x 0").unwrap_err();
        assert_eq!(
            e.to_string(),
            "line 1, column 1: expected `.qubits <n>` before anything else"
        );
    }
}
