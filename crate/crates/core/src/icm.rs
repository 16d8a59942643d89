//! ICM circuits: initializations, CNOTs and measurements over indexed qubit lines.
//!
//! Text format (`.icm`), one statement per line or separated by `;`:
//!
//! ```text
//! # comment
//! name dist7          (optional)
//! qubits 2
//! input 0             (optional: line 0 enters the circuit instead of being initialized)
//! output 1            (optional: line 1 leaves the circuit instead of being measured)
//! init 1 X+           bases: Z0 X+ A Y
//! cnot 0 1            control, target
//! measure 0 Z corr    bases: Z X; optional correction flag
//! ```
//!
//! Corrections are opaque flags on measurements; there is no feed-forward.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitBasis {
    Z0,
    XPlus,
    A,
    Y,
}

impl fmt::Display for InitBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitBasis::Z0 => "Z0",
            InitBasis::XPlus => "X+",
            InitBasis::A => "A",
            InitBasis::Y => "Y",
        })
    }
}

impl FromStr for InitBasis {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "Z0" => Ok(InitBasis::Z0),
            "X+" => Ok(InitBasis::XPlus),
            "A" => Ok(InitBasis::A),
            "Y" => Ok(InitBasis::Y),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureBasis {
    Z,
    X,
}

impl fmt::Display for MeasureBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureBasis::Z => "Z",
            MeasureBasis::X => "X",
        })
    }
}

impl FromStr for MeasureBasis {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "Z" => Ok(MeasureBasis::Z),
            "X" => Ok(MeasureBasis::X),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IcmEvent {
    Init { qubit: usize, basis: InitBasis },
    Cnot { control: usize, target: usize },
    Measure { qubit: usize, basis: MeasureBasis, flag: Option<String> },
}

impl fmt::Display for IcmEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcmEvent::Init { qubit, basis } => write!(f, "init {qubit} {basis}"),
            IcmEvent::Cnot { control, target } => write!(f, "cnot {control} {target}"),
            IcmEvent::Measure { qubit, basis, flag: None } => write!(f, "measure {qubit} {basis}"),
            IcmEvent::Measure { qubit, basis, flag: Some(flag) } => write!(f, "measure {qubit} {basis} {flag}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcmCircuit {
    pub name: String,
    pub num_qubits: usize,
    pub events: Vec<IcmEvent>,
    /// Lines that enter the circuit from outside (no init event).
    pub inputs: BTreeSet<usize>,
    /// Lines that leave the circuit (no measure event).
    pub outputs: BTreeSet<usize>,
}

impl IcmCircuit {
    pub fn cnot_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, IcmEvent::Cnot { .. })).count()
    }

    pub fn init_basis(&self, q: usize) -> Option<InitBasis> {
        self.events.iter().find_map(|e| match e {
            IcmEvent::Init { qubit, basis } if *qubit == q => Some(*basis),
            _ => None,
        })
    }

    pub fn measurement(&self, q: usize) -> Option<(MeasureBasis, Option<&str>)> {
        self.events.iter().find_map(|e| match e {
            IcmEvent::Measure { qubit, basis, flag } if *qubit == q => Some((*basis, flag.as_deref())),
            _ => None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcmErrorCode {
    Syntax,
    MissingHeader,
    IndexOutOfRange,
    DoubleInit,
    UseBeforeInit,
    UseAfterMeasure,
    CnotSelfTarget,
    DoubleMeasure,
    MissingInit,
    MissingMeasure,
}

/// One ordering or index problem found by [`validate_icm`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcmIssue {
    pub code: IcmErrorCode,
    /// Offending event, or `None` for whole-line problems found at the end.
    pub event: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{line}:{column}: {message}")]
pub struct IcmError {
    pub code: IcmErrorCode,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LineState {
    Fresh,
    Live,
    Done,
}

/// Lists every ordering and index violation; empty when the circuit is well formed.
pub fn validate_icm(c: &IcmCircuit) -> Vec<IcmIssue> {
    let mut issues = Vec::new();
    let n = c.num_qubits;
    let mut state: Vec<LineState> =
        (0..n).map(|q| if c.inputs.contains(&q) { LineState::Live } else { LineState::Fresh }).collect();
    let issue = |code, event: usize, message: String| IcmIssue { code, event: Some(event), message };

    for q in c.inputs.iter().chain(c.outputs.iter()) {
        if *q >= n {
            issues.push(IcmIssue {
                code: IcmErrorCode::IndexOutOfRange,
                event: None,
                message: format!("io designation of qubit {q} outside 0..{n}"),
            });
        }
    }

    for (i, e) in c.events.iter().enumerate() {
        let qubits: Vec<usize> = match e {
            IcmEvent::Init { qubit, .. } | IcmEvent::Measure { qubit, .. } => vec![*qubit],
            IcmEvent::Cnot { control, target } => vec![*control, *target],
        };
        if let Some(q) = qubits.iter().find(|&&q| q >= n) {
            issues.push(issue(IcmErrorCode::IndexOutOfRange, i, format!("qubit {q} outside 0..{n}")));
            continue;
        }
        match e {
            IcmEvent::Init { qubit, .. } => {
                if state[*qubit] != LineState::Fresh {
                    issues.push(issue(IcmErrorCode::DoubleInit, i, format!("qubit {qubit} initialized twice")));
                }
                state[*qubit] = LineState::Live;
            }
            IcmEvent::Cnot { control, target } => {
                if control == target {
                    issues.push(issue(IcmErrorCode::CnotSelfTarget, i, format!("CNOT self-target on qubit {control}")));
                    continue;
                }
                for q in [*control, *target] {
                    match state[q] {
                        LineState::Fresh => issues.push(issue(
                            IcmErrorCode::UseBeforeInit,
                            i,
                            format!("qubit {q} used before initialization"),
                        )),
                        LineState::Done => issues.push(issue(
                            IcmErrorCode::UseAfterMeasure,
                            i,
                            format!("qubit {q} used after measurement"),
                        )),
                        LineState::Live => {}
                    }
                }
            }
            IcmEvent::Measure { qubit, .. } => {
                match state[*qubit] {
                    LineState::Fresh => issues.push(issue(
                        IcmErrorCode::UseBeforeInit,
                        i,
                        format!("qubit {qubit} measured before initialization"),
                    )),
                    LineState::Done => issues.push(issue(
                        IcmErrorCode::DoubleMeasure,
                        i,
                        format!("qubit {qubit} measured twice"),
                    )),
                    LineState::Live => {}
                }
                if c.outputs.contains(qubit) {
                    issues.push(issue(
                        IcmErrorCode::DoubleMeasure,
                        i,
                        format!("output qubit {qubit} must not be measured"),
                    ));
                }
                state[*qubit] = LineState::Done;
            }
        }
    }
    for (q, s) in state.iter().enumerate() {
        match s {
            LineState::Fresh => issues.push(IcmIssue {
                code: IcmErrorCode::MissingInit,
                event: None,
                message: format!("qubit {q} is never initialized"),
            }),
            LineState::Live if !c.outputs.contains(&q) => issues.push(IcmIssue {
                code: IcmErrorCode::MissingMeasure,
                event: None,
                message: format!("qubit {q} is never measured"),
            }),
            _ => {}
        }
    }
    issues
}

struct Statement<'a> {
    line: usize,
    column: usize,
    words: Vec<&'a str>,
}

fn statements(text: &str) -> Vec<Statement<'_>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for part in body.split(';') {
            let lead = part.len() - part.trim_start().len();
            let words: Vec<&str> = part.split_whitespace().collect();
            if !words.is_empty() {
                out.push(Statement { line: ln + 1, column: offset + lead + 1, words });
            }
            offset += part.len() + 1;
        }
    }
    out
}

/// Parses and validates `.icm` text.
pub fn parse_icm(text: &str) -> Result<IcmCircuit, IcmError> {
    let mut c = IcmCircuit::default();
    let mut header: Option<(usize, usize)> = None;
    let mut positions = Vec::new();
    let mut last_pos = (1, 1);

    for st in statements(text) {
        let err = |code, message: String| IcmError { code, line: st.line, column: st.column, message };
        let syntax = |m: &str| err(IcmErrorCode::Syntax, m.to_string());
        let index = |w: Option<&&str>| -> Result<usize, IcmError> {
            w.ok_or_else(|| syntax("missing qubit index"))?
                .parse::<usize>()
                .map_err(|_| syntax("qubit index must be a non-negative integer"))
        };
        last_pos = (st.line, st.column);
        let w = &st.words;
        let needs_header = !matches!(w[0], "qubits" | "name");
        if needs_header && header.is_none() {
            return Err(err(IcmErrorCode::MissingHeader, "\"qubits N\" must come first".into()));
        }
        match w[0] {
            "name" => c.name = w[1..].join(" "),
            "qubits" => {
                if header.is_some() {
                    return Err(syntax("duplicate \"qubits\" header"));
                }
                if w.len() != 2 {
                    return Err(syntax("expected \"qubits N\""));
                }
                c.num_qubits = index(w.get(1))?;
                header = Some((st.line, st.column));
            }
            "input" | "output" => {
                if w.len() != 2 {
                    return Err(syntax("expected one qubit index"));
                }
                let q = index(w.get(1))?;
                if q >= c.num_qubits {
                    return Err(err(IcmErrorCode::IndexOutOfRange, format!("qubit {q} outside 0..{}", c.num_qubits)));
                }
                if w[0] == "input" {
                    c.inputs.insert(q);
                } else {
                    c.outputs.insert(q);
                }
            }
            "init" => {
                if w.len() != 3 {
                    return Err(syntax("expected \"init q BASIS\""));
                }
                let basis = w[2].parse().map_err(|_| syntax("init basis must be one of Z0, X+, A, Y"))?;
                c.events.push(IcmEvent::Init { qubit: index(w.get(1))?, basis });
                positions.push((st.line, st.column));
            }
            "cnot" => {
                if w.len() != 3 {
                    return Err(syntax("expected \"cnot control target\""));
                }
                c.events.push(IcmEvent::Cnot { control: index(w.get(1))?, target: index(w.get(2))? });
                positions.push((st.line, st.column));
            }
            "measure" => {
                if !(3..=4).contains(&w.len()) {
                    return Err(syntax("expected \"measure q BASIS [flag]\""));
                }
                let basis = w[2].parse().map_err(|_| syntax("measurement basis must be Z or X"))?;
                c.events.push(IcmEvent::Measure {
                    qubit: index(w.get(1))?,
                    basis,
                    flag: w.get(3).map(|s| s.to_string()),
                });
                positions.push((st.line, st.column));
            }
            other => return Err(syntax(&format!("unknown statement \"{other}\""))),
        }
    }
    if header.is_none() {
        return Err(IcmError {
            code: IcmErrorCode::MissingHeader,
            line: 1,
            column: 1,
            message: "missing \"qubits N\" header".into(),
        });
    }
    if let Some(issue) = validate_icm(&c).into_iter().next() {
        let (line, column) = issue.event.map(|i| positions[i]).unwrap_or(last_pos);
        return Err(IcmError { code: issue.code, line, column, message: issue.message });
    }
    Ok(c)
}

/// Canonical text rendering; `parse_icm(print_icm(c)) == c`.
pub fn print_icm(c: &IcmCircuit) -> String {
    let mut out = String::new();
    if !c.name.is_empty() {
        out.push_str(&format!("name {}\n", c.name));
    }
    out.push_str(&format!("qubits {}\n", c.num_qubits));
    for q in &c.inputs {
        out.push_str(&format!("input {q}\n"));
    }
    for q in &c.outputs {
        out.push_str(&format!("output {q}\n"));
    }
    for e in &c.events {
        out.push_str(&format!("{e}\n"));
    }
    out
}

/// A gate of the simplified Clifford+T input language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    P(usize),
    T(usize),
    Cnot(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LoweringError {
    #[error("gate {gate} references qubit {qubit} outside 0..{n}")]
    InvalidIndex { gate: usize, qubit: usize, n: usize },
    #[error("gate {gate}: CNOT self-target on qubit {qubit}")]
    SelfTarget { gate: usize, qubit: usize },
}

/// Lowers a Clifford+T gate list over `n` qubits to ICM form.
///
/// * `T q` and `P q`: fresh ancilla initialized to `A` (resp. `Y`),
///   `cnot line anc`, then `measure anc Z T<i>` (resp. `P<i>`). The data stays on its line.
/// * `H q`: fresh ancilla initialized to `X+`, `cnot anc line`, then
///   `measure line Z H<i>`; the logical qubit continues on the ancilla, whose
///   Pauli frame is Hadamard-conjugated. The final measurement of a line with
///   an odd number of Hadamards is taken in `X` instead of `Z`.
/// * `CNOT c t` passes through on the current lines.
///
/// Data lines start in `Z0`; gate `i` names its correction flag `<G><i>`.
pub fn clifford_t_to_icm(n: usize, gates: &[Gate]) -> Result<IcmCircuit, LoweringError> {
    let mut events: Vec<IcmEvent> = (0..n).map(|q| IcmEvent::Init { qubit: q, basis: InitBasis::Z0 }).collect();
    let mut line: Vec<usize> = (0..n).collect();
    let mut conjugated = vec![false; n];
    let mut next = n;
    let check = |gate: usize, q: usize| {
        if q >= n {
            Err(LoweringError::InvalidIndex { gate, qubit: q, n })
        } else {
            Ok(())
        }
    };

    for (i, g) in gates.iter().enumerate() {
        match *g {
            Gate::T(q) | Gate::P(q) => {
                check(i, q)?;
                let (basis, tag) = if matches!(g, Gate::T(_)) { (InitBasis::A, "T") } else { (InitBasis::Y, "P") };
                let anc = next;
                next += 1;
                events.push(IcmEvent::Init { qubit: anc, basis });
                events.push(IcmEvent::Cnot { control: line[q], target: anc });
                events.push(IcmEvent::Measure { qubit: anc, basis: MeasureBasis::Z, flag: Some(format!("{tag}{i}")) });
            }
            Gate::H(q) => {
                check(i, q)?;
                let anc = next;
                next += 1;
                events.push(IcmEvent::Init { qubit: anc, basis: InitBasis::XPlus });
                events.push(IcmEvent::Cnot { control: anc, target: line[q] });
                events.push(IcmEvent::Measure { qubit: line[q], basis: MeasureBasis::Z, flag: Some(format!("H{i}")) });
                line[q] = anc;
                conjugated[q] = !conjugated[q];
            }
            Gate::Cnot(c, t) => {
                check(i, c)?;
                check(i, t)?;
                if c == t {
                    return Err(LoweringError::SelfTarget { gate: i, qubit: c });
                }
                events.push(IcmEvent::Cnot { control: line[c], target: line[t] });
            }
        }
    }
    for q in 0..n {
        let basis = if conjugated[q] { MeasureBasis::X } else { MeasureBasis::Z };
        events.push(IcmEvent::Measure { qubit: line[q], basis, flag: None });
    }
    Ok(IcmCircuit { name: String::new(), num_qubits: next, events, inputs: BTreeSet::new(), outputs: BTreeSet::new() })
}

/// Parses a gate list: `qubits N` then `h q`, `p q`, `t q`, `cnot c t`
/// (newline or `;` separated, `#` comments).
pub fn parse_gates(text: &str) -> Result<(usize, Vec<Gate>), IcmError> {
    let mut n = None;
    let mut gates = Vec::new();
    for st in statements(text) {
        let err = |m: &str| IcmError { code: IcmErrorCode::Syntax, line: st.line, column: st.column, message: m.into() };
        let idx = |k: usize| -> Result<usize, IcmError> {
            st.words.get(k).and_then(|w| w.parse().ok()).ok_or_else(|| err("expected a qubit index"))
        };
        let arity = |k: usize| if st.words.len() == k + 1 { Ok(()) } else { Err(err("wrong number of arguments")) };
        match st.words[0].to_ascii_lowercase().as_str() {
            "qubits" => {
                arity(1)?;
                n = Some(idx(1)?);
            }
            "h" => {
                arity(1)?;
                gates.push(Gate::H(idx(1)?));
            }
            "p" | "s" => {
                arity(1)?;
                gates.push(Gate::P(idx(1)?));
            }
            "t" => {
                arity(1)?;
                gates.push(Gate::T(idx(1)?));
            }
            "cnot" | "cx" => {
                arity(2)?;
                gates.push(Gate::Cnot(idx(1)?, idx(2)?));
            }
            other => return Err(err(&format!("unknown gate \"{other}\""))),
        }
    }
    let n = n.ok_or(IcmError {
        code: IcmErrorCode::MissingHeader,
        line: 1,
        column: 1,
        message: "missing \"qubits N\" header".into(),
    })?;
    Ok((n, gates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_identity_and_single_cnot() {
        let c = parse_icm("qubits 1; init 0 Z0; measure 0 Z").unwrap();
        assert_eq!(c.num_qubits, 1);
        assert_eq!(c.events.len(), 2);
        assert!(validate_icm(&c).is_empty());

        let c = parse_icm("qubits 2; init 0 Z0; init 1 X+; cnot 0 1; measure 0 Z; measure 1 X").unwrap();
        assert_eq!(c.cnot_count(), 1);
        assert_eq!(c.init_basis(1), Some(InitBasis::XPlus));
        assert_eq!(c.measurement(1), Some((MeasureBasis::X, None)));
        assert!(validate_icm(&c).is_empty());
    }

    #[test]
    fn self_target_has_its_own_code_and_position() {
        let e = parse_icm("qubits 1; init 0 Z0\ncnot 0 0; measure 0 Z").unwrap_err();
        assert_eq!(e.code, IcmErrorCode::CnotSelfTarget);
        assert_eq!((e.line, e.column), (2, 1));
        assert!(e.message.contains("CNOT self-target"));
    }

    #[test]
    fn distinct_semantic_codes() {
        let code = |t: &str| parse_icm(t).unwrap_err().code;
        assert_eq!(code("qubits 1; init 0 Z0; init 0 A; measure 0 Z"), IcmErrorCode::DoubleInit);
        assert_eq!(code("qubits 2; init 0 Z0; init 1 Z0; measure 1 Z; cnot 0 1; measure 0 Z"), IcmErrorCode::UseAfterMeasure);
        assert_eq!(code("qubits 2; init 0 Z0; cnot 0 1; init 1 Z0; measure 0 Z; measure 1 Z"), IcmErrorCode::UseBeforeInit);
        assert_eq!(code("qubits 1; init 0 Z0"), IcmErrorCode::MissingMeasure);
        assert_eq!(code("qubits 1; measure 0 Z"), IcmErrorCode::UseBeforeInit);
        assert_eq!(code("qubits 1; init 3 Z0"), IcmErrorCode::IndexOutOfRange);
        assert_eq!(code("init 0 Z0"), IcmErrorCode::MissingHeader);
        assert_eq!(code("qubits 1; init 0 Q"), IcmErrorCode::Syntax);
        assert_eq!(code("qubits 1; frobnicate"), IcmErrorCode::Syntax);
    }

    #[test]
    fn io_lines_replace_init_and_measure() {
        let c = parse_icm("qubits 2\ninput 0\noutput 1\ninit 1 Z0\ncnot 0 1\nmeasure 0 X").unwrap();
        assert!(validate_icm(&c).is_empty());
        let e = parse_icm("qubits 1\noutput 0\ninit 0 Z0\nmeasure 0 Z").unwrap_err();
        assert_eq!(e.code, IcmErrorCode::DoubleMeasure);
    }

    #[test]
    fn validate_reports_all_problems() {
        let c = IcmCircuit {
            num_qubits: 2,
            events: vec![
                IcmEvent::Cnot { control: 0, target: 0 },
                IcmEvent::Init { qubit: 5, basis: InitBasis::A },
                IcmEvent::Measure { qubit: 1, basis: MeasureBasis::Z, flag: None },
            ],
            ..Default::default()
        };
        let codes: Vec<_> = validate_icm(&c).into_iter().map(|i| i.code).collect();
        assert!(codes.contains(&IcmErrorCode::CnotSelfTarget));
        assert!(codes.contains(&IcmErrorCode::IndexOutOfRange));
        assert!(codes.contains(&IcmErrorCode::UseBeforeInit));
        assert!(codes.contains(&IcmErrorCode::MissingInit));
    }

    #[test]
    fn printer_round_trips() {
        let text = "name demo\nqubits 2\ninput 0\ninit 1 A\ncnot 0 1\nmeasure 1 Z T0\nmeasure 0 X\n";
        let c = parse_icm(text).unwrap();
        assert_eq!(print_icm(&c), text);
        assert_eq!(parse_icm(&print_icm(&c)).unwrap(), c);
    }

    #[test]
    fn lowering_small_cases() {
        let c = clifford_t_to_icm(1, &[]).unwrap();
        assert_eq!(c.num_qubits, 1);
        assert_eq!(
            c.events,
            vec![
                IcmEvent::Init { qubit: 0, basis: InitBasis::Z0 },
                IcmEvent::Measure { qubit: 0, basis: MeasureBasis::Z, flag: None }
            ]
        );

        let c = clifford_t_to_icm(1, &[Gate::T(0)]).unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(
            c.events,
            vec![
                IcmEvent::Init { qubit: 0, basis: InitBasis::Z0 },
                IcmEvent::Init { qubit: 1, basis: InitBasis::A },
                IcmEvent::Cnot { control: 0, target: 1 },
                IcmEvent::Measure { qubit: 1, basis: MeasureBasis::Z, flag: Some("T0".into()) },
                IcmEvent::Measure { qubit: 0, basis: MeasureBasis::Z, flag: None },
            ]
        );

        let c = clifford_t_to_icm(2, &[Gate::T(0), Gate::T(1), Gate::Cnot(0, 1), Gate::T(0)]).unwrap();
        assert_eq!(c.num_qubits, 2 + 3);
        assert_eq!(c.cnot_count(), 3 + 1);
        assert!(validate_icm(&c).is_empty());
    }

    #[test]
    fn hadamard_moves_the_line() {
        let c = clifford_t_to_icm(1, &[Gate::H(0), Gate::T(0)]).unwrap();
        assert!(validate_icm(&c).is_empty());
        assert_eq!(c.events[1], IcmEvent::Init { qubit: 1, basis: InitBasis::XPlus });
        assert_eq!(c.events[2], IcmEvent::Cnot { control: 1, target: 0 });
        // the T after H acts on the ancilla line
        assert_eq!(c.events[5], IcmEvent::Cnot { control: 1, target: 2 });
        assert_eq!(c.measurement(1), Some((MeasureBasis::X, None)));
    }

    #[test]
    fn lowering_rejects_bad_indices() {
        assert_eq!(
            clifford_t_to_icm(1, &[Gate::T(2)]),
            Err(LoweringError::InvalidIndex { gate: 0, qubit: 2, n: 1 })
        );
        let (n, g) = parse_gates("qubits 2; h 0; t 1; cnot 0 1; s 1").unwrap();
        assert_eq!(n, 2);
        assert_eq!(g, vec![Gate::H(0), Gate::T(1), Gate::Cnot(0, 1), Gate::P(1)]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn gate(n: usize) -> impl Strategy<Value = Gate> {
            prop_oneof![
                (0..n).prop_map(Gate::H),
                (0..n).prop_map(Gate::P),
                (0..n).prop_map(Gate::T),
                (0..n, 1..n.max(2)).prop_map(move |(c, k)| Gate::Cnot(c, (c + k) % n.max(2))),
            ]
        }

        proptest! {
            #[test]
            fn lowering_counts_and_validity(n in 2usize..5, gates in proptest::collection::vec(gate(4), 0..30)) {
                let gates: Vec<Gate> = gates.into_iter().filter(|g| match *g {
                    Gate::H(q) | Gate::P(q) | Gate::T(q) => q < n,
                    Gate::Cnot(c, t) => c < n && t < n && c != t,
                }).collect();
                let c = clifford_t_to_icm(n, &gates).unwrap();
                let singles = gates.iter().filter(|g| !matches!(g, Gate::Cnot(..))).count();
                prop_assert_eq!(c.num_qubits, n + singles);
                prop_assert_eq!(c.cnot_count(), gates.len());
                prop_assert!(validate_icm(&c).is_empty());
                let text = print_icm(&c);
                prop_assert_eq!(print_icm(&parse_icm(&text).unwrap()), text);
            }
        }
    }
}
