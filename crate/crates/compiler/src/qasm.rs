//! OpenQASM 2.0 subset reader and writer.

use crate::circuit::{Circuit, Gate, GateKind};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {col}: {msg}")]
pub struct QasmError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PERMUTATION_MARKER: &str = "// output_permutation:";

fn lex(text: &str) -> Result<(Vec<Token>, Option<Vec<usize>>), QasmError> {
    let mut out = Vec::new();
    let mut perm = None;
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        if let Some(rest) = raw.trim_start().strip_prefix(PERMUTATION_MARKER) {
            let parsed: Result<Vec<usize>, _> = rest.split_whitespace().map(str::parse).collect();
            perm = Some(parsed.map_err(|_| QasmError { line, col: 1, msg: "bad output permutation".into() })?);
            continue;
        }
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let s = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[s..i].iter().collect()), line, col });
            } else if c.is_ascii_digit() || c == '.' {
                let s = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[s..i].iter().collect();
                let v = text
                    .parse()
                    .map_err(|_| QasmError { line, col, msg: format!("bad number '{text}'") })?;
                out.push(Token { tok: Tok::Num(v), line, col });
            } else if c == '"' {
                let s = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(QasmError { line, col, msg: "unterminated string".into() });
                }
                out.push(Token { tok: Tok::Str(chars[s..i].iter().collect()), line, col });
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, line, col });
                i += 2;
            } else if "[](){},;+-*/^".contains(c) {
                out.push(Token { tok: Tok::Sym(c), line, col });
                i += 1;
            } else {
                return Err(QasmError { line, col, msg: format!("unexpected character '{c}'") });
            }
        }
    }
    Ok((out, perm))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    regs: HashMap<String, (usize, usize)>,
    n_qubits: usize,
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, QasmError> {
        let (line, col) = self.here();
        Err(QasmError { line, col, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Tok, QasmError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected '{c}'")),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn integer(&mut self) -> Result<usize, QasmError> {
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 => {
                let v = *v as usize;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected non-negative integer"),
        }
    }

    fn skip_statement(&mut self) -> Result<(), QasmError> {
        while let Some(t) = self.peek() {
            let end = *t == Tok::Sym(';');
            self.pos += 1;
            if end {
                return Ok(());
            }
        }
        self.err("missing ';'")
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat_sym('^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<f64, QasmError> {
        match self.next()? {
            Tok::Num(v) => Ok(v),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(name) if name == "pi" => Ok(PI),
            Tok::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.pos -= 1;
                        return self.err(format!("unknown identifier '{name}' in expression"));
                    }
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            _ => {
                self.pos -= 1;
                self.err("expected expression")
            }
        }
    }

    fn qubit(&mut self) -> Result<usize, QasmError> {
        let start = self.pos;
        let name = self.ident()?;
        let &(offset, size) = match self.regs.get(&name) {
            Some(r) => r,
            None => {
                self.pos = start;
                return self.err(format!("unknown register '{name}'"));
            }
        };
        if !self.eat_sym('[') {
            return self.err("register broadcast is not supported; index each qubit");
        }
        let idx_pos = self.pos;
        let i = self.integer()?;
        self.expect_sym(']')?;
        if i >= size {
            self.pos = idx_pos;
            return self.err(format!("qubit {name}[{i}] out of range (size {size})"));
        }
        Ok(offset + i)
    }
}

fn gate_kind(name: &str, p: &[f64], nq: usize) -> Option<Result<GateKind, String>> {
    let want = |k: usize| if p.len() == k { Ok(()) } else { Err(format!("{name} takes {k} parameters, got {}", p.len())) };
    let kind = match name {
        "u3" | "u" | "U" => want(3).map(|_| GateKind::U3 { theta: p[0], phi: p[1], lambda: p[2] }),
        "u2" => want(2).map(|_| GateKind::U3 { theta: PI / 2.0, phi: p[0], lambda: p[1] }),
        "u1" | "p" => want(1).map(|_| GateKind::U3 { theta: 0.0, phi: 0.0, lambda: p[0] }),
        "can" => want(3).map(|_| GateKind::Can { x: p[0], y: p[1], z: p[2] }),
        "cx" | "CX" => want(0).map(|_| GateKind::CX),
        "cz" => want(0).map(|_| GateKind::CZ),
        "ccx" => want(0).map(|_| GateKind::CCX),
        "c3x" | "c4x" | "mcx" => want(0).map(|_| GateKind::MCX),
        "swap" => want(0).map(|_| GateKind::SWAP),
        "h" => want(0).map(|_| GateKind::H),
        "x" => want(0).map(|_| GateKind::X),
        "y" => want(0).map(|_| GateKind::Y),
        "z" => want(0).map(|_| GateKind::Z),
        "s" => want(0).map(|_| GateKind::S),
        "sdg" => want(0).map(|_| GateKind::Sdg),
        "t" => want(0).map(|_| GateKind::T),
        "tdg" => want(0).map(|_| GateKind::Tdg),
        "rz" => want(1).map(|_| GateKind::RZ(p[0])),
        "rx" => want(1).map(|_| GateKind::RX(p[0])),
        "ry" => want(1).map(|_| GateKind::RY(p[0])),
        _ => return None,
    };
    let expected = match name {
        "c3x" => Some(4),
        "c4x" => Some(5),
        _ => None,
    };
    if let (Some(e), Ok(_)) = (expected, &kind) {
        if e != nq {
            return Some(Err(format!("{name} expects {e} qubits, got {nq}")));
        }
    }
    Some(kind)
}

/// Parses the supported OpenQASM 2.0 subset. Measurements, barriers and
/// classical registers are dropped.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let (toks, perm) = lex(text)?;
    let mut p = Parser { toks, pos: 0, regs: HashMap::new(), n_qubits: 0 };
    let mut gates = Vec::new();
    let mut warned_measure = false;
    while p.pos < p.toks.len() {
        let (line, col) = p.here();
        let head = p.ident()?;
        match head.as_str() {
            "OPENQASM" | "include" | "creg" | "barrier" | "opaque" => {
                p.skip_statement()?;
            }
            "measure" => {
                if !warned_measure {
                    log::warn!("line {line}: measurements are ignored");
                    warned_measure = true;
                }
                p.skip_statement()?;
            }
            "qreg" => {
                let name = p.ident()?;
                p.expect_sym('[')?;
                let size = p.integer()?;
                p.expect_sym(']')?;
                p.expect_sym(';')?;
                if p.regs.insert(name.clone(), (p.n_qubits, size)).is_some() {
                    return Err(QasmError { line, col, msg: format!("register '{name}' redeclared") });
                }
                p.n_qubits += size;
            }
            "gate" => return Err(QasmError { line, col, msg: "gate definitions are not supported".into() }),
            "if" | "reset" => return Err(QasmError { line, col, msg: format!("'{head}' is not supported") }),
            "id" => p.skip_statement()?,
            name => {
                let mut params = Vec::new();
                if p.eat_sym('(') {
                    if !p.eat_sym(')') {
                        loop {
                            params.push(p.expr()?);
                            if p.eat_sym(')') {
                                break;
                            }
                            p.expect_sym(',')?;
                        }
                    }
                }
                let mut qubits = vec![p.qubit()?];
                while p.eat_sym(',') {
                    qubits.push(p.qubit()?);
                }
                p.expect_sym(';')?;
                let kind = match gate_kind(name, &params, qubits.len()) {
                    None => return Err(QasmError { line, col, msg: format!("unsupported gate '{name}'") }),
                    Some(Err(msg)) => return Err(QasmError { line, col, msg }),
                    Some(Ok(k)) => k,
                };
                let g = Gate::new(kind, qubits).map_err(|e| QasmError { line, col, msg: e.to_string() })?;
                gates.push(g);
            }
        }
    }
    let mut c = Circuit::new(p.n_qubits);
    c.gates = gates;
    if let Some(perm) = perm {
        c.output_permutation = perm;
        c.check_permutation().map_err(|e| QasmError { line: 1, col: 1, msg: e.to_string() })?;
    }
    Ok(c)
}

fn fmt_f(v: f64) -> String {
    format!("{v:.17e}")
}

/// Writes the circuit over a single register `q`. Can gates come with an
/// `opaque` declaration; a non-trivial output permutation is written as a
/// comment that [`parse_qasm`] reads back.
pub fn emit_qasm(c: &Circuit) -> Result<String, crate::circuit::CircuitError> {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if c.gates.iter().any(|g| matches!(g.kind, GateKind::Can { .. })) {
        s.push_str("opaque can(x,y,z) a,b;\n");
    }
    if c.n_qubits > 0 {
        let _ = writeln!(s, "qreg q[{}];", c.n_qubits);
    }
    if !c.has_identity_permutation() {
        let perm: Vec<String> = c.output_permutation.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(s, "{PERMUTATION_MARKER} {}", perm.join(" "));
    }
    for g in &c.gates {
        let params = match &g.kind {
            GateKind::U3 { theta, phi, lambda } => vec![*theta, *phi, *lambda],
            GateKind::Can { x, y, z } => vec![*x, *y, *z],
            GateKind::RX(t) | GateKind::RY(t) | GateKind::RZ(t) => vec![*t],
            GateKind::Unitary(_) => return Err(crate::circuit::CircuitError::NotEmittable("unitary block".into())),
            _ => vec![],
        };
        s.push_str(g.kind.name());
        if !params.is_empty() {
            let ps: Vec<String> = params.into_iter().map(fmt_f).collect();
            let _ = write!(s, "({})", ps.join(","));
        }
        let qs: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(s, " {};", qs.join(","));
    }
    Ok(s)
}
