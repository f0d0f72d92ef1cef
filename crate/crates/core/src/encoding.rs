//! Hamiltonian encoding of the system matrix.
//!
//! `A` is diagonalized once; every evolution unitary `e^{±iAt·k}` is then
//! synthesized from the eigenbasis directly. The evolution time `t` is picked
//! so that `λ̃_j = N·λ_j·t/2π` lands on integers the clock register can hold.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::U3Params;
use crate::statevector::GateMatrix;

/// Max `|A − A†|` entry accepted as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Relative tolerance when matching eigenvalue ratios to fractions.
pub const RATIO_TOLERANCE: f64 = 1e-9;
/// Entry magnitude below which a 2×2 unitary entry counts as zero.
const ZERO_ENTRY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum EncodingMode {
    /// Every `λ̃_j` must be an exact integer.
    #[default]
    Exact,
    /// Smallest eigenvalue maps to 1, the rest round to the nearest integer.
    Rounded,
}

impl fmt::Display for EncodingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingMode::Exact => "exact",
            EncodingMode::Rounded => "rounded",
        })
    }
}

/// The linear system `A·x = b` with `A` Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianSystem {
    a: DMatrix<Complex64>,
    b: DVector<Complex64>,
    nb: usize,
}

impl HermitianSystem {
    pub fn new(a: DMatrix<Complex64>, b: DVector<Complex64>) -> Result<Self> {
        let dim = a.nrows();
        if dim != a.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!(
                "A must be 2^nb x 2^nb with nb >= 1, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != dim {
            return Err(Error::Domain(format!("b has length {}, A is {dim}x{dim}", b.len())));
        }
        if a.iter().chain(b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("A and b must be finite".into()));
        }
        check_hermitian(&a)?;
        if b.norm() == 0.0 {
            return Err(Error::Validation("b must be nonzero".into()));
        }
        Ok(Self { a, b, nb: dim.trailing_zeros() as usize })
    }

    pub fn a(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    /// `b` as given.
    pub fn b(&self) -> &DVector<Complex64> {
        &self.b
    }

    pub fn normalized_b(&self) -> DVector<Complex64> {
        self.b.normalize()
    }

    pub fn nb(&self) -> usize {
        self.nb
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }
}

fn check_hermitian(a: &DMatrix<Complex64>) -> Result<()> {
    let deviation = (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation >= HERMITIAN_TOLERANCE {
        return Err(Error::Validation(format!("matrix is not Hermitian: max |A - A†| = {deviation:e}")));
    }
    Ok(())
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// as columns. Each eigenvector is rotated so its first nonzero component is
/// real and positive.
pub fn eig_hermitian(a: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::Domain("eigendecomposition needs a square matrix".into()));
    }
    check_hermitian(a)?;
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(a.nrows(), a.ncols());
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).normalize();
        if let Some(lead) = col.iter().find(|z| z.norm() > 1e-10).copied() {
            let rot = lead.conj() / lead.norm();
            col.iter_mut().for_each(|z| *z *= rot);
        }
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}

/// Evolution time and integer eigenvalue encoding for one clock size.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeEncoding {
    pub t: f64,
    pub clock_qubits: usize,
    /// `λ̃_j`, in eigenvalue order.
    pub lambda_tilde: Vec<u64>,
    /// `|λ̃_j − N·λ_j·t/2π| / (N·λ_j·t/2π)`.
    pub relative_errors: Vec<f64>,
    pub mode: EncodingMode,
}

impl TimeEncoding {
    pub fn clock_dim(&self) -> u64 {
        1 << self.clock_qubits
    }

    pub fn max_relative_error(&self) -> f64 {
        self.relative_errors.iter().copied().fold(0.0, f64::max)
    }
}

impl fmt::Display for TimeEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} encoding t = {:.12}, n = {}, lambda_tilde = {:?}, max relative error = {:.3e}",
            self.mode,
            self.t,
            self.clock_qubits,
            self.lambda_tilde,
            self.max_relative_error()
        )
    }
}

/// Best fraction `p/q` with `q <= max_den` from the continued fraction of `x`.
fn rationalize(x: f64, max_den: u64) -> (u64, u64) {
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (x.floor() as u64, 1u64);
    let mut frac = x - x.floor();
    while frac > 1e-12 {
        let inv = 1.0 / frac;
        let a = inv.floor() as u64;
        let (p_next, q_next) = (a.saturating_mul(p).saturating_add(p_prev), a.saturating_mul(q).saturating_add(q_prev));
        if q_next > max_den {
            break;
        }
        (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        frac = inv - inv.floor();
    }
    (p, q)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_collisions(eigenvalues: &[f64], lambda_tilde: &[u64]) -> Result<()> {
    for i in 0..lambda_tilde.len() {
        for j in i + 1..lambda_tilde.len() {
            if lambda_tilde[i] == lambda_tilde[j] {
                return Err(Error::Collision {
                    first: eigenvalues[i],
                    second: eigenvalues[j],
                    encoded: lambda_tilde[i],
                });
            }
        }
    }
    Ok(())
}

fn relative_errors(eigenvalues: &[f64], lambda_tilde: &[u64], scale: f64) -> Vec<f64> {
    eigenvalues
        .iter()
        .zip(lambda_tilde)
        .map(|(&l, &k)| {
            let ideal = scale * l;
            (k as f64 - ideal).abs() / ideal
        })
        .collect()
}

fn rounded_encoding(eigenvalues: &[f64], n: usize, min: f64) -> Result<TimeEncoding> {
    let dim = 1u64 << n;
    let scale = 1.0 / min;
    let lambda_tilde: Vec<u64> = eigenvalues.iter().map(|&l| (l * scale).round().max(1.0) as u64).collect();
    check_collisions(eigenvalues, &lambda_tilde)?;
    if lambda_tilde.iter().any(|&k| k > dim - 1) {
        return Err(Error::EncodingInfeasible { clock_qubits: n, best_rounded: None });
    }
    Ok(TimeEncoding {
        t: TAU * scale / dim as f64,
        clock_qubits: n,
        relative_errors: relative_errors(eigenvalues, &lambda_tilde, scale),
        lambda_tilde,
        mode: EncodingMode::Rounded,
    })
}

/// Picks the evolution time `t` for an `n`-qubit clock.
///
/// Exact mode returns the smallest `t > 0` for which every
/// `N·λ_j·t/2π` is an integer in `[1, N−1]`; eigenvalue ratios are matched
/// to fractions with denominator at most `N`.
pub fn choose_time_and_clock(eigenvalues: &[f64], n: usize, mode: EncodingMode) -> Result<TimeEncoding> {
    if n == 0 || n > 20 {
        return Err(Error::Domain(format!("clock size must be in 1..=20, got {n}")));
    }
    if eigenvalues.is_empty() {
        return Err(Error::Domain("no eigenvalues to encode".into()));
    }
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(&bad) = eigenvalues.iter().find(|l| **l <= 0.0 || !l.is_finite()) {
        return Err(Error::NonPositiveSpectrum(bad));
    }
    let max_abs = eigenvalues.iter().copied().fold(0.0, f64::max);
    if min <= 1e-12 * max_abs {
        return Err(Error::NonPositiveSpectrum(min));
    }
    if mode == EncodingMode::Rounded {
        return rounded_encoding(eigenvalues, n, min);
    }

    let dim = 1u64 << n;
    let infeasible = || Error::EncodingInfeasible {
        clock_qubits: n,
        best_rounded: rounded_encoding(eigenvalues, n, min).ok().map(Box::new),
    };
    let mut fractions = Vec::with_capacity(eigenvalues.len());
    let mut base = 1u64;
    for &l in eigenvalues {
        let ratio = l / min;
        let (p, q) = rationalize(ratio, dim);
        if q == 0 || (ratio - p as f64 / q as f64).abs() > RATIO_TOLERANCE * ratio {
            return Err(infeasible());
        }
        base = base / gcd(base, q) * q;
        if base > dim {
            return Err(infeasible());
        }
        fractions.push((p, q));
    }
    let lambda_tilde: Vec<u64> = fractions.iter().map(|&(p, q)| base / q * p).collect();
    check_collisions(eigenvalues, &lambda_tilde)?;
    if lambda_tilde.iter().any(|&k| k == 0 || k > dim - 1) {
        return Err(infeasible());
    }
    let scale = base as f64 / min;
    Ok(TimeEncoding {
        t: TAU * scale / dim as f64,
        clock_qubits: n,
        relative_errors: relative_errors(eigenvalues, &lambda_tilde, scale),
        lambda_tilde,
        mode: EncodingMode::Exact,
    })
}

/// Eigendecomposition of `A` together with its clock encoding and the
/// ancilla rotation constant `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingPlan {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    encoding: TimeEncoding,
    c: f64,
}

impl EncodingPlan {
    /// `c` defaults to the smallest encoded eigenvalue.
    pub fn new(system: &HermitianSystem, n: usize, mode: EncodingMode, c: Option<f64>) -> Result<Self> {
        let (eigenvalues, eigenvectors) = eig_hermitian(system.a())?;
        let encoding = choose_time_and_clock(&eigenvalues, n, mode)?;
        let min_tilde = *encoding.lambda_tilde.iter().min().expect("nonempty spectrum") as f64;
        let c = c.unwrap_or(min_tilde);
        if !(c > 0.0 && c <= min_tilde) {
            return Err(Error::Validation(format!("C must satisfy 0 < C <= {min_tilde}, got {c}")));
        }
        Ok(Self { eigenvalues, eigenvectors, encoding, c })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn encoding(&self) -> &TimeEncoding {
        &self.encoding
    }

    pub fn t(&self) -> f64 {
        self.encoding.t
    }

    pub fn clock_qubits(&self) -> usize {
        self.encoding.clock_qubits
    }

    pub fn clock_dim(&self) -> u64 {
        self.encoding.clock_dim()
    }

    pub fn lambda_tilde(&self) -> &[u64] {
        &self.encoding.lambda_tilde
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn mode(&self) -> EncodingMode {
        self.encoding.mode
    }

    pub fn is_exact(&self) -> bool {
        self.encoding.mode == EncodingMode::Exact
    }

    /// Coefficients `b_j = ⟨u_j|b⟩` of a vector in the eigenbasis.
    pub fn eigen_coefficients(&self, b: &DVector<Complex64>) -> DVector<Complex64> {
        self.eigenvectors.adjoint() * b
    }
}

/// `V·diag(e^{±i·λ_j·t·power})·V†`, i.e. `U^power` or its inverse for `U = e^{iAt}`.
pub fn unitary_from_hamiltonian(plan: &EncodingPlan, power: u64, inverse: bool) -> Result<GateMatrix> {
    if power == 0 {
        return Err(Error::Domain("power must be positive".into()));
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    let v = plan.eigenvectors();
    let phases = DVector::from_iterator(
        plan.eigenvalues.len(),
        plan.eigenvalues.iter().map(|&l| {
            // reduce modulo 2π before scaling by the power
            let angle = (l * plan.t()).rem_euclid(TAU) * power as f64;
            Complex64::from_polar(1.0, sign * angle.rem_euclid(TAU))
        }),
    );
    let m = v * DMatrix::from_diagonal(&phases) * v.adjoint();
    Ok(GateMatrix::from_unitary(m))
}

/// Parameters `(θ, φ, λ, γ)` with `u3_matrix(result) == u`.
///
/// `γ` follows the phase of the first nonzero entry (row-major). When one
/// of `φ`, `λ` is unconstrained it is set to zero (`λ` for diagonal or
/// anti-diagonal `u`).
pub fn cu3_params_from_unitary(u: &GateMatrix) -> Result<U3Params> {
    if u.dim() != 2 {
        return Err(Error::Domain(format!("expected a 2x2 unitary, got {0}x{0}", u.dim())));
    }
    let m = u.matrix();
    let (u00, u01, u10, u11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    if u00.norm() < ZERO_ENTRY {
        // anti-diagonal: θ = π, λ = 0
        let gamma = (-u01).arg();
        return U3Params::new(PI, u10.arg() - gamma, 0.0, gamma);
    }
    if u10.norm() < ZERO_ENTRY {
        // diagonal: θ = 0, λ = 0
        let gamma = u00.arg();
        return U3Params::new(0.0, u11.arg() - gamma, 0.0, gamma);
    }
    let theta = 2.0 * u10.norm().atan2(u00.norm());
    let gamma = u00.arg();
    U3Params::new(theta, u10.arg() - gamma, (-u01).arg() - gamma, gamma)
}
