//! OpenQASM 2.0 emission of the HHL circuit, and a small reader for the
//! subset the emitter writes.
//!
//! IR gate names map to `qelib1.inc` as follows: `p` and `cp` are written as
//! `u1` and `cu1`; everything else keeps its name.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::circuit::{CircuitIR, Op};
use crate::encoding::{cu3_params_from_unitary, unitary_from_hamiltonian, EncodingPlan, HermitianSystem};
use crate::error::{Error, Result};
use crate::gates::{iqft_ops, qft_ops};
use crate::hhl::{per_qubit_angles, POPULATED_MASS};
use crate::statevector::RegisterLayout;

/// Largest denominator tried when printing a parameter as a multiple of π.
pub const MAX_PI_DENOMINATOR: i64 = 64;
const PI_MATCH: f64 = 1e-15;
const BASIS_B: f64 = 1e-14;
/// Angles this close to zero are treated as rounding noise.
const ANGLE_NOISE: f64 = 1e-12;

fn denoise(x: f64) -> f64 {
    if x.abs() < ANGLE_NOISE {
        0.0
    } else {
        x
    }
}

/// Gates preparing normalized `b` (up to global phase) on a single b qubit.
fn state_prep_ops(b: &DVector<Complex64>, qubit: usize) -> Vec<Op> {
    let b = b.normalize();
    let (b0, b1) = (b[0], b[1]);
    if b0.norm() < BASIS_B {
        return vec![Op::X(qubit)];
    }
    if b1.norm() < BASIS_B {
        return Vec::new();
    }
    let theta = 2.0 * b1.norm().atan2(b0.norm());
    let phi = crate::gates::wrap_angle(b1.arg() - b0.arg());
    let mut ops = vec![Op::Ry { theta, target: qubit }];
    if phi != 0.0 {
        ops.push(Op::P { lambda: phi, target: qubit });
    }
    ops
}

fn push_controlled_powers(ir: &mut CircuitIR, plan: &EncodingPlan, layout: RegisterLayout, inverse: bool) -> Result<()> {
    let target = layout.b(0);
    let order: Vec<usize> = if inverse { (0..layout.n()).rev().collect() } else { (0..layout.n()).collect() };
    for k in order {
        let control = layout.clock(k);
        let u = unitary_from_hamiltonian(plan, 1 << k, inverse)?;
        let p = cu3_params_from_unitary(&u)?;
        let (theta, phi, lambda, gamma) = (denoise(p.theta()), denoise(p.phi()), denoise(p.lambda()), denoise(p.gamma()));
        ir.push(Op::Cu3 { theta, phi, lambda, control, target })?;
        if gamma != 0.0 {
            ir.note(format!(
                "controlled global phase {} of U^{}{}: u1 on the control",
                format_param(gamma),
                if inverse { "-" } else { "" },
                1u64 << k
            ));
            ir.push(Op::P { lambda: gamma, target: control })?;
        }
    }
    Ok(())
}

/// Gate list for a one-qubit b-register with an exactly encoded plan.
///
/// The ancilla rotation uses one `cry` per clock qubit, fitted on the clock
/// values populated by `b`.
pub fn build_circuit_ir(system: &HermitianSystem, plan: &EncodingPlan) -> Result<CircuitIR> {
    if system.nb() != 1 {
        return Err(Error::UnsupportedEmission(format!(
            "b-register of {} qubits (cu3 needs exactly 1)",
            system.nb()
        )));
    }
    if !plan.is_exact() {
        return Err(Error::UnsupportedEmission("rounded encoding plan".into()));
    }
    let layout = RegisterLayout::new(system.nb(), plan.clock_qubits())?;
    let clocks = layout.clock_qubits();
    let mut ir = CircuitIR::new(layout.total_qubits(), system.nb() + 1, Vec::new())?;

    ir.extend(state_prep_ops(system.b(), layout.b(0)))?;
    ir.extend(clocks.iter().map(|&q| Op::H(q)))?;
    push_controlled_powers(&mut ir, plan, layout, false)?;
    ir.extend(iqft_ops(&clocks))?;

    let weights = plan.eigen_coefficients(&system.normalized_b());
    let mut populated: Vec<u64> = plan
        .lambda_tilde()
        .iter()
        .zip(weights.iter())
        .filter(|(_, w)| w.norm_sqr() > POPULATED_MASS)
        .map(|(&l, _)| l)
        .collect();
    populated.sort_unstable();
    let angles = per_qubit_angles(&populated, layout.n(), plan.c())?;
    for (k, theta) in angles.into_iter().enumerate() {
        if theta != 0.0 {
            ir.push(Op::Cry { theta, control: layout.clock(k), target: layout.ancilla() })?;
        }
    }

    ir.extend(qft_ops(&clocks))?;
    push_controlled_powers(&mut ir, plan, layout, true)?;
    ir.extend(clocks.iter().map(|&q| Op::H(q)))?;
    ir.push(Op::Measure { qubit: layout.ancilla(), clbit: 0 })?;
    for k in 0..layout.nb() {
        ir.push(Op::Measure { qubit: layout.b(k), clbit: 1 + k })?;
    }
    Ok(ir)
}

/// Prints `x` as a small multiple of π when one matches, otherwise with 17
/// significant digits.
pub fn format_param(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    for den in 1..=MAX_PI_DENOMINATOR {
        let num = (x * den as f64 / PI).round();
        if num == 0.0 || num.abs() > 1e6 {
            continue;
        }
        let value = num * PI / den as f64;
        if (value - x).abs() <= PI_MATCH * x.abs() {
            let sign = if num < 0.0 { "-" } else { "" };
            let num = num.abs() as i64;
            let head = if num == 1 { "pi".to_string() } else { format!("{num}*pi") };
            return if den == 1 { format!("{sign}{head}") } else { format!("{sign}{head}/{den}") };
        }
    }
    format!("{x:.16e}")
}

fn qasm_name(op: &Op) -> Result<&'static str> {
    Ok(match op {
        Op::H(_) => "h",
        Op::X(_) => "x",
        Op::Ry { .. } => "ry",
        Op::P { .. } => "u1",
        Op::Cu3 { .. } => "cu3",
        Op::Cry { .. } => "cry",
        Op::Cp { .. } => "cu1",
        Op::Swap(..) => "swap",
        Op::Measure { .. } => "measure",
        Op::Unitary { label, .. } => {
            return Err(Error::UnsupportedEmission(format!("gate '{label}' has no OpenQASM 2.0 form")))
        }
    })
}

/// OpenQASM 2.0 text for `ir`: flat `q`/`c` registers, one statement per op.
pub fn emit_qasm(ir: &CircuitIR) -> Result<String> {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", ir.num_qubits());
    if ir.num_clbits() > 0 {
        let _ = writeln!(out, "creg c[{}];", ir.num_clbits());
    }
    for (i, op) in ir.ops().iter().enumerate() {
        for note in ir.notes_before(i) {
            let _ = writeln!(out, "// {note}");
        }
        let name = qasm_name(op)?;
        if let Op::Measure { qubit, clbit } = op {
            let _ = writeln!(out, "measure q[{qubit}] -> c[{clbit}];");
            continue;
        }
        out.push_str(name);
        let params = op.params();
        if !params.is_empty() {
            let text: Vec<String> = params.iter().map(|&p| format_param(p)).collect();
            let _ = write!(out, "({})", text.join(","));
        }
        let qubits: Vec<String> = op.qubits().iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(out, " {};", qubits.join(","));
    }
    Ok(out)
}

/// Evaluates a parameter expression: numbers, `pi`, `+ - * /`, parentheses.
pub fn eval_expr(text: &str) -> Result<f64> {
    let mut parser = ExprParser { s: text.as_bytes(), pos: 0 };
    let value = parser.sum()?;
    parser.skip_ws();
    if parser.pos != parser.s.len() {
        return Err(Error::Parse(format!("trailing input in expression '{text}'")));
    }
    Ok(value)
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<f64> {
        let mut acc = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == b'+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<f64> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(ch) if ch.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                match &self.s[start..self.pos] {
                    b"pi" => Ok(PI),
                    other => Err(Error::Parse(format!("unknown identifier '{}'", String::from_utf8_lossy(other)))),
                }
            }
            Some(_) => {
                let start = self.pos;
                while self.pos < self.s.len() {
                    let ch = self.s[self.pos];
                    let exp_sign = (ch == b'-' || ch == b'+') && matches!(self.s[self.pos - 1], b'e' | b'E');
                    if ch.is_ascii_digit() || ch == b'.' || ch == b'e' || ch == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or_default();
                text.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{text}'")))
            }
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

fn parse_operand(text: &str, reg: &str, size: usize) -> Result<usize> {
    let text = text.trim();
    let inner = text
        .strip_prefix(reg)
        .and_then(|r| r.trim_start().strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected {reg}[i], found '{text}'")))?;
    let index: usize = inner.trim().parse().map_err(|_| Error::Parse(format!("bad index in '{text}'")))?;
    if index >= size {
        return Err(Error::Parse(format!("'{text}' out of range")));
    }
    Ok(index)
}

fn parse_register(rest: &str) -> Result<(String, usize)> {
    let (name, size) = rest
        .trim()
        .strip_suffix(']')
        .and_then(|r| r.split_once('['))
        .ok_or_else(|| Error::Parse(format!("bad register declaration '{rest}'")))?;
    let size = size.trim().parse().map_err(|_| Error::Parse(format!("bad register size in '{rest}'")))?;
    Ok((name.trim().to_string(), size))
}

/// Reads back the OpenQASM 2.0 subset written by [`emit_qasm`]: one `qreg`,
/// at most one `creg`, and the gates `h x ry u1 p cu3 cry cu1 cp swap measure`.
pub fn parse_qasm(text: &str) -> Result<CircuitIR> {
    let body: String = text.lines().map(|l| l.split("//").next().unwrap_or("")).collect::<Vec<_>>().join("\n");
    let mut statements = body.split(';').map(str::trim).filter(|s| !s.is_empty());

    match statements.next() {
        Some(h) if h.split_whitespace().collect::<Vec<_>>() == ["OPENQASM", "2.0"] => {}
        other => return Err(Error::Parse(format!("missing OPENQASM 2.0 header, found {other:?}"))),
    }

    let mut qreg: Option<(String, usize)> = None;
    let mut creg: Option<(String, usize)> = None;
    let mut ops = Vec::new();
    for stmt in statements {
        if stmt.starts_with("include") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            if qreg.is_some() {
                return Err(Error::Parse("only one qreg is supported".into()));
            }
            qreg = Some(parse_register(rest)?);
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("creg") {
            if creg.is_some() {
                return Err(Error::Parse("only one creg is supported".into()));
            }
            creg = Some(parse_register(rest)?);
            continue;
        }
        let (qname, qsize) = qreg.as_ref().ok_or_else(|| Error::Parse("gate before qreg".into()))?;
        if let Some(rest) = stmt.strip_prefix("measure") {
            let (cname, csize) = creg.as_ref().ok_or_else(|| Error::Parse("measure without creg".into()))?;
            let (q, c) = rest.split_once("->").ok_or_else(|| Error::Parse(format!("bad measure '{stmt}'")))?;
            ops.push(Op::Measure { qubit: parse_operand(q, qname, *qsize)?, clbit: parse_operand(c, cname, *csize)? });
            continue;
        }

        let name_end = stmt.find(|ch: char| ch == '(' || ch.is_whitespace()).unwrap_or(stmt.len());
        let name = &stmt[..name_end];
        let mut rest = stmt[name_end..].trim_start();
        let mut params = Vec::new();
        if let Some(r) = rest.strip_prefix('(') {
            let close = r.find(')').ok_or_else(|| Error::Parse(format!("unclosed parameters in '{stmt}'")))?;
            params = r[..close].split(',').map(eval_expr).collect::<Result<_>>()?;
            rest = &r[close + 1..];
        }
        let qubits = rest.split(',').map(|t| parse_operand(t, qname, *qsize)).collect::<Result<Vec<_>>>()?;
        let arity = |np: usize, nq: usize| -> Result<()> {
            if params.len() != np || qubits.len() != nq {
                return Err(Error::Parse(format!("'{name}' expects {np} parameters and {nq} qubits: '{stmt}'")));
            }
            Ok(())
        };
        let op = match name {
            "h" => {
                arity(0, 1)?;
                Op::H(qubits[0])
            }
            "x" => {
                arity(0, 1)?;
                Op::X(qubits[0])
            }
            "ry" => {
                arity(1, 1)?;
                Op::Ry { theta: params[0], target: qubits[0] }
            }
            "u1" | "p" => {
                arity(1, 1)?;
                Op::P { lambda: params[0], target: qubits[0] }
            }
            "cu3" => {
                arity(3, 2)?;
                Op::Cu3 { theta: params[0], phi: params[1], lambda: params[2], control: qubits[0], target: qubits[1] }
            }
            "cry" => {
                arity(1, 2)?;
                Op::Cry { theta: params[0], control: qubits[0], target: qubits[1] }
            }
            "cu1" | "cp" => {
                arity(1, 2)?;
                Op::Cp { lambda: params[0], control: qubits[0], target: qubits[1] }
            }
            "swap" => {
                arity(0, 2)?;
                Op::Swap(qubits[0], qubits[1])
            }
            other => return Err(Error::Parse(format!("unsupported gate '{other}'"))),
        };
        ops.push(op);
    }
    let (_, nq) = qreg.ok_or_else(|| Error::Parse("no qreg declared".into()))?;
    CircuitIR::new(nq, creg.map_or(0, |(_, n)| n), ops)
}
