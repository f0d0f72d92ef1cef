//! Named gates and the Fourier transforms on the clock register.
//!
//! `qft` carries `e^{+2πi·y·k/N}` and `iqft` carries `e^{-2πi·y·k/N}`. Some
//! texts swap the two names.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::Op;
use crate::error::{Error, Result};
use crate::statevector::GateMatrix;

/// Largest clock register for which dense Fourier matrices are built.
pub const MAX_DENSE_QFT_QUBITS: usize = 12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(entries: [Complex64; 4]) -> GateMatrix {
    GateMatrix::from_unitary(DMatrix::from_row_slice(2, 2, &entries))
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let wrapped = x - TAU * ((x - PI) / TAU).ceil();
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Parameters of the four-parameter U3 gate
/// `e^{iγ}·U3(θ, φ, λ)`.
///
/// Construction canonicalizes `θ` into `[0, 2π)` and the other angles into
/// `(-π, π]` without changing the matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct U3Params {
    theta: f64,
    phi: f64,
    lambda: f64,
    gamma: f64,
}

impl U3Params {
    pub fn new(theta: f64, phi: f64, lambda: f64, gamma: f64) -> Result<Self> {
        if ![theta, phi, lambda, gamma].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("U3 parameters must be finite".into()));
        }
        let mut theta = theta.rem_euclid(2.0 * TAU);
        let (mut phi, mut lambda) = (phi, lambda);
        if theta >= TAU {
            // cos((4π-θ)/2) = cos(θ/2), sin flips sign; absorb it in φ and λ
            theta = 2.0 * TAU - theta;
            phi += PI;
            lambda += PI;
        }
        if theta >= TAU {
            theta = 0.0;
        }
        Ok(Self {
            theta,
            phi: wrap_angle(phi),
            lambda: wrap_angle(lambda),
            gamma: wrap_angle(gamma),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

pub fn hadamard() -> GateMatrix {
    let h = FRAC_1_SQRT_2;
    mat2([c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

pub fn pauli_x() -> GateMatrix {
    mat2([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Real rotation `[[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
pub fn ry(theta: f64) -> GateMatrix {
    let (s, co) = (0.5 * theta).sin_cos();
    mat2([c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

/// `diag(1, e^{iλ})`.
pub fn phase(lambda: f64) -> GateMatrix {
    mat2([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, lambda)])
}

pub fn swap() -> GateMatrix {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 2)] = c(1.0, 0.0);
    m[(2, 1)] = c(1.0, 0.0);
    m[(3, 3)] = c(1.0, 0.0);
    GateMatrix::from_unitary(m)
}

pub fn u3_matrix(p: &U3Params) -> GateMatrix {
    let (s, co) = (0.5 * p.theta).sin_cos();
    mat2([
        Complex64::from_polar(co, p.gamma),
        -Complex64::from_polar(s, p.gamma + p.lambda),
        Complex64::from_polar(s, p.gamma + p.phi),
        Complex64::from_polar(co, p.gamma + p.phi + p.lambda),
    ])
}

fn fourier(n: usize, sign: f64) -> Result<GateMatrix> {
    if n == 0 || n > MAX_DENSE_QFT_QUBITS {
        return Err(Error::Domain(format!(
            "dense Fourier transform needs 1 <= n <= {MAX_DENSE_QFT_QUBITS}, got {n}"
        )));
    }
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let m = DMatrix::from_fn(dim, dim, |y, k| {
        // reduce y·k mod N first so large products keep full precision
        let turns = ((y * k) % dim) as f64 / dim as f64;
        Complex64::from_polar(scale, sign * TAU * turns)
    });
    Ok(GateMatrix::from_unitary(m))
}

/// Dense QFT on `n` qubits, `(y, k)` entry `e^{2πi·y·k/N}/√N`.
pub fn qft(n: usize) -> Result<GateMatrix> {
    fourier(n, 1.0)
}

/// Dense inverse QFT on `n` qubits, `(y, k)` entry `e^{-2πi·y·k/N}/√N`.
pub fn iqft(n: usize) -> Result<GateMatrix> {
    fourier(n, -1.0)
}

/// QFT as H, controlled-phase and swap gates on `qubits` (`qubits[0]` is the
/// least significant bit). Matches [`qft`].
pub fn qft_ops(qubits: &[usize]) -> Vec<Op> {
    let n = qubits.len();
    let mut ops = Vec::new();
    for j in (0..n).rev() {
        ops.push(Op::H(qubits[j]));
        for m in (0..j).rev() {
            ops.push(Op::Cp {
                lambda: PI / (1u64 << (j - m)) as f64,
                control: qubits[m],
                target: qubits[j],
            });
        }
    }
    for i in 0..n / 2 {
        ops.push(Op::Swap(qubits[i], qubits[n - 1 - i]));
    }
    ops
}

/// Inverse of [`qft_ops`]. Matches [`iqft`].
pub fn iqft_ops(qubits: &[usize]) -> Vec<Op> {
    qft_ops(qubits).iter().rev().map(Op::inverse).collect()
}
