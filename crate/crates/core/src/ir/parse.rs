use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use super::{Bundle, Circuit, Gate, IrError, Opcode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SourceErrorKind {
    UnknownOpcode,
    BadArity,
    IndexOutOfRange,
    DuplicateQubitInBundle,
    MalformedNumber,
    MissingHeader,
    /// Structural problems not covered above, e.g. an unclosed `{`.
    Syntax,
}

/// First problem found in an assembly source, with a 1-based location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceError {
    pub line: usize,
    pub column: usize,
    pub kind: SourceErrorKind,
    pub message: String,
}

impl fmt::Display for SourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for SourceError {}

/// A piece of a source line together with its 1-based starting column.
#[derive(Clone, Copy)]
struct Span<'a> {
    text: &'a str,
    col: usize,
}

impl<'a> Span<'a> {
    fn trim(self) -> Span<'a> {
        let lead = self.text.len() - self.text.trim_start().len();
        Span {
            text: self.text.trim(),
            col: self.col + self.text[..lead].chars().count(),
        }
    }

    fn slice(self, start: usize, end: usize) -> Span<'a> {
        Span {
            text: &self.text[start..end],
            col: self.col + self.text[..start].chars().count(),
        }
    }

    /// Split on `sep`, keeping column information for each part.
    fn split(self, sep: char) -> Vec<Span<'a>> {
        let mut parts = Vec::new();
        let mut start = 0;
        for (i, c) in self.text.char_indices() {
            if c == sep {
                parts.push(self.slice(start, i));
                start = i + c.len_utf8();
            }
        }
        parts.push(self.slice(start, self.text.len()));
        parts
    }
}

struct LineParser {
    line: usize,
}

impl LineParser {
    fn err(&self, span: Span<'_>, kind: SourceErrorKind, message: impl Into<String>) -> SourceError {
        SourceError {
            line: self.line,
            column: span.col.max(1),
            kind,
            message: message.into(),
        }
    }

    fn qubit(&self, span: Span<'_>, num_qubits: usize) -> Result<usize, SourceError> {
        let t = span.text;
        let inner = t
            .strip_prefix(['q', 'Q'])
            .and_then(|r| r.trim_start().strip_prefix('['))
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| {
                self.err(
                    span,
                    SourceErrorKind::Syntax,
                    format!("expected qubit operand `q[<index>]`, found `{t}`"),
                )
            })?
            .trim();
        if inner.is_empty() || !inner.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.err(
                span,
                SourceErrorKind::MalformedNumber,
                format!("malformed qubit index `{inner}`"),
            ));
        }
        let index: usize = inner.parse().map_err(|_| {
            self.err(
                span,
                SourceErrorKind::MalformedNumber,
                format!("qubit index `{inner}` too large"),
            )
        })?;
        if index >= num_qubits {
            return Err(self.err(
                span,
                SourceErrorKind::IndexOutOfRange,
                format!("qubit {index} out of range for {num_qubits} qubit(s)"),
            ));
        }
        Ok(index)
    }

    fn gate(&self, span: Span<'_>, num_qubits: usize) -> Result<Gate, SourceError> {
        let span = span.trim();
        if span.text.is_empty() {
            return Err(self.err(span, SourceErrorKind::Syntax, "expected a gate"));
        }
        let name_end = span
            .text
            .find(char::is_whitespace)
            .unwrap_or(span.text.len());
        let name = span.slice(0, name_end);
        let opcode: Opcode = name.text.parse().map_err(|_| {
            self.err(
                name,
                SourceErrorKind::UnknownOpcode,
                format!("unknown opcode `{}`", name.text),
            )
        })?;
        let rest = span.slice(name_end, span.text.len()).trim();
        let mut operands: Vec<Span<'_>> = if rest.text.is_empty() {
            Vec::new()
        } else {
            rest.split(',').into_iter().map(Span::trim).collect()
        };

        let angle = if opcode.takes_angle() {
            match operands.last() {
                Some(last) if !last.text.starts_with(['q', 'Q']) => {
                    let a = parse_angle(last.text).ok_or_else(|| {
                        self.err(
                            *last,
                            SourceErrorKind::MalformedNumber,
                            format!("malformed angle `{}`", last.text),
                        )
                    })?;
                    operands.pop();
                    Some(a)
                }
                _ => {
                    return Err(self.err(
                        span,
                        SourceErrorKind::BadArity,
                        format!("{opcode} requires an angle operand"),
                    ))
                }
            }
        } else {
            None
        };

        let arity_ok = match opcode.arity() {
            Some(k) => operands.len() == k,
            None => !operands.is_empty(),
        };
        if !arity_ok {
            let expected = opcode
                .arity()
                .map_or("at least 1".to_string(), |k| k.to_string());
            return Err(self.err(
                span,
                SourceErrorKind::BadArity,
                format!(
                    "{opcode} expects {expected} qubit operand(s), got {}",
                    operands.len()
                ),
            ));
        }

        let mut qubits = Vec::with_capacity(operands.len());
        for op in &operands {
            let q = self.qubit(*op, num_qubits)?;
            if qubits.contains(&q) {
                return Err(self.err(
                    *op,
                    SourceErrorKind::DuplicateQubitInBundle,
                    format!("qubit {q} repeated within one gate"),
                ));
            }
            qubits.push(q);
        }
        Gate::new(opcode, qubits, angle).map_err(|e| self.err(span, SourceErrorKind::Syntax, e.to_string()))
    }

    fn instruction(&self, span: Span<'_>, num_qubits: usize) -> Result<Bundle, SourceError> {
        if let Some(body) = span.text.strip_prefix('{') {
            let Some(inner) = body.strip_suffix('}') else {
                return Err(self.err(span, SourceErrorKind::Syntax, "unterminated bundle, expected `}`"));
            };
            let inner = span.slice(1, 1 + inner.len());
            if inner.text.trim().is_empty() {
                return Err(self.err(span, SourceErrorKind::BadArity, "empty bundle"));
            }
            let mut gates: Vec<Gate> = Vec::new();
            for part in inner.split('|') {
                let gate = self.gate(part, num_qubits)?;
                if let Some(&q) = gate
                    .qubits()
                    .iter()
                    .find(|q| gates.iter().any(|g| g.qubits().contains(q)))
                {
                    return Err(self.err(
                        part.trim(),
                        SourceErrorKind::DuplicateQubitInBundle,
                        format!("qubit {q} used by more than one gate in the bundle"),
                    ));
                }
                gates.push(gate);
            }
            Bundle::new(gates).map_err(|e| self.err(span, SourceErrorKind::Syntax, e.to_string()))
        } else {
            Ok(Bundle::single(self.gate(span, num_qubits)?))
        }
    }
}

/// Parse an angle: a decimal literal or `[-][k*]pi[/d]`.
fn parse_angle(text: &str) -> Option<f64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = t.to_ascii_lowercase();
    let value = if lower.contains("pi") {
        let (sign, body) = match lower.strip_prefix('-') {
            Some(b) => (-1.0, b),
            None => (1.0, lower.strip_prefix('+').unwrap_or(&lower)),
        };
        let (num_part, den_part) = match body.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (body, None),
        };
        let factor = match num_part.strip_suffix("pi")? {
            "" => 1.0,
            k => parse_decimal(k.strip_suffix('*')?)?,
        };
        let den = match den_part {
            Some(d) => parse_decimal(d)?,
            None => 1.0,
        };
        if den == 0.0 {
            return None;
        }
        sign * factor * PI / den
    } else {
        parse_decimal(&lower)?
    };
    value.is_finite().then_some(value)
}

fn parse_decimal(t: &str) -> Option<f64> {
    // Reject `inf`, `nan` and friends that `f64::from_str` would accept.
    if t.is_empty()
        || !t
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'))
    {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn header_value<'a>(span: Span<'a>, keyword: &str) -> Option<Span<'a>> {
    let t = span.text;
    let head = t.get(..keyword.len())?;
    if !head.eq_ignore_ascii_case(keyword) {
        return None;
    }
    let rest = &t[keyword.len()..];
    if !rest.starts_with(char::is_whitespace) {
        return None;
    }
    let value = span.slice(keyword.len(), t.len()).trim();
    (!value.text.is_empty()).then_some(value)
}

/// Parse assembly source into a validated [`Circuit`].
///
/// Never panics; the first violation in source order is reported.
pub fn parse(source: &str) -> Result<Circuit, SourceError> {
    let mut version: Option<String> = None;
    let mut circuit: Option<Circuit> = None;
    let mut last_line = 1;

    for (i, raw) in source.lines().enumerate() {
        let lp = LineParser { line: i + 1 };
        last_line = i + 1;
        let code = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let span = Span { text: code, col: 1 }.trim();
        if span.text.is_empty() {
            continue;
        }

        if version.is_none() {
            let v = header_value(span, "version").ok_or_else(|| {
                lp.err(
                    span,
                    SourceErrorKind::MissingHeader,
                    "expected `version <x.y>` header",
                )
            })?;
            version = Some(v.text.to_string());
            continue;
        }
        let Some(circuit) = circuit.as_mut() else {
            let v = header_value(span, "qubits").ok_or_else(|| {
                lp.err(
                    span,
                    SourceErrorKind::MissingHeader,
                    "expected `qubits <n>` header",
                )
            })?;
            let n: usize = v
                .text
                .parse()
                .ok()
                .filter(|_| v.text.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| {
                    lp.err(
                        v,
                        SourceErrorKind::MalformedNumber,
                        format!("malformed qubit count `{}`", v.text),
                    )
                })?;
            let version = version.as_deref().unwrap_or_default();
            circuit = Some(Circuit::with_version(version, n).map_err(|_| {
                lp.err(v, SourceErrorKind::MalformedNumber, "qubit count must be positive")
            })?);
            continue;
        };

        let bundle = lp.instruction(span, circuit.num_qubits())?;
        circuit.push_bundle(bundle).map_err(|e: IrError| {
            lp.err(span, SourceErrorKind::IndexOutOfRange, e.to_string())
        })?;
    }

    circuit.ok_or_else(|| SourceError {
        line: last_line,
        column: 1,
        kind: SourceErrorKind::MissingHeader,
        message: if version.is_none() {
            "missing `version` header".into()
        } else {
            "missing `qubits` header".into()
        },
    })
}
