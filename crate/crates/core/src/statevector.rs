//! Dense statevector simulation.
//!
//! Basis indices are little-endian: qubit 0 is the least significant bit.
//! For an HHL register layout the ancilla is qubit 0, the clock register
//! occupies qubits `1..=n` and the b-register sits on top, so the ket
//! `|b c a⟩` has index `a + 2·c + 2^(n+1)·b`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Unit-norm tolerance every public operation maintains.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Maximum entry of `M†M − I` accepted for a gate.
pub const UNITARY_TOLERANCE: f64 = 1e-12;
/// Kept-branch probability below which post-selection is rejected.
pub const IMPOSSIBLE_OUTCOME: f64 = 1e-14;
/// Identifier of the sampling algorithm, recorded in sampled output.
pub const SAMPLER_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64)+WeightedIndex<f64>";

/// Qubit map for the HHL registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    nb: usize,
    n: usize,
}

impl RegisterLayout {
    pub fn new(nb: usize, n: usize) -> Result<Self> {
        if nb == 0 || n == 0 {
            return Err(Error::Domain(format!(
                "register layout needs nb >= 1 and n >= 1, got nb={nb}, n={n}"
            )));
        }
        if nb + n + 1 > 30 {
            return Err(Error::Domain(format!(
                "{} qubits exceed the dense simulator limit",
                nb + n + 1
            )));
        }
        Ok(Self { nb, n })
    }

    /// Number of b-register qubits.
    pub fn nb(&self) -> usize {
        self.nb
    }

    /// Number of clock qubits.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_qubits(&self) -> usize {
        self.nb + self.n + 1
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits()
    }

    pub fn ancilla(&self) -> usize {
        0
    }

    /// Qubit index of clock bit `k` (`k = 0` is `c0`, the least significant).
    pub fn clock(&self, k: usize) -> usize {
        debug_assert!(k < self.n);
        1 + k
    }

    pub fn clock_qubits(&self) -> Vec<usize> {
        (1..=self.n).collect()
    }

    /// Qubit index of b-register bit `k`.
    pub fn b(&self, k: usize) -> usize {
        debug_assert!(k < self.nb);
        self.n + 1 + k
    }

    pub fn b_qubits(&self) -> Vec<usize> {
        (self.n + 1..self.total_qubits()).collect()
    }

    /// Basis index of `|b⟩_b |c⟩_c |a⟩_a`.
    pub fn index(&self, b: usize, c: usize, a: usize) -> usize {
        a + (c << 1) + (b << (self.n + 1))
    }

    /// Inverse of [`RegisterLayout::index`].
    pub fn split(&self, index: usize) -> (usize, usize, usize) {
        let a = index & 1;
        let c = (index >> 1) & ((1 << self.n) - 1);
        let b = index >> (self.n + 1);
        (b, c, a)
    }
}

/// A `2^k × 2^k` unitary acting on `k` target qubits.
///
/// Row/column bit `j` of the matrix corresponds to the `j`-th entry of the
/// target list passed to the apply functions.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    matrix: DMatrix<Complex64>,
    num_qubits: usize,
}

impl GateMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!(
                "gate must be square with power-of-two dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("gate has non-finite entries".into()));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation >= UNITARY_TOLERANCE {
            return Err(Error::Validation(format!(
                "gate is not unitary: max |M†M - I| = {deviation:e}"
            )));
        }
        Ok(Self::from_unitary(matrix))
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn from_unitary(matrix: DMatrix<Complex64>) -> Self {
        let num_qubits = matrix.nrows().trailing_zeros() as usize;
        Self { matrix, num_qubits }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::from_unitary(DMatrix::identity(1 << num_qubits, 1 << num_qubits))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_unitary(self.matrix.adjoint())
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &GateMatrix) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::Domain("gate dimensions differ".into()));
        }
        Ok(Self::from_unitary(&self.matrix * &rhs.matrix))
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }
}

/// `max |M†M − I|` over all entries.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let product = m.adjoint() * m;
    let mut worst = 0.0f64;
    for ((r, c), z) in product.iter().enumerate().map(|(i, z)| ((i % m.ncols(), i / m.ncols()), z)) {
        let expected = if r == c { 1.0 } else { 0.0 };
        worst = worst.max((z - Complex64::new(expected, 0.0)).norm());
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
    layout: Option<RegisterLayout>,
}

impl Statevector {
    /// Computational basis state over a bare qubit count.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 30 {
            return Err(Error::Domain(format!("unsupported qubit count {num_qubits}")));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::Domain(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            num_qubits,
            layout: None,
        })
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Builds a state from raw amplitudes, which must already be unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() >= NORM_TOLERANCE {
            return Err(Error::Validation(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
            layout: None,
        })
    }

    /// Normalizes `amplitudes` before building the state.
    pub fn from_unnormalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero or non-finite vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::from_amplitudes(amplitudes)
    }

    pub fn with_layout(mut self, layout: RegisterLayout) -> Result<Self> {
        if layout.total_qubits() != self.num_qubits {
            return Err(Error::Domain(format!(
                "layout has {} qubits, state has {}",
                layout.total_qubits(),
                self.num_qubits
            )));
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn layout(&self) -> Option<&RegisterLayout> {
        self.layout.as_ref()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Applies `gate` to `targets`; `targets[j]` carries bit `j` of the gate index.
    pub fn apply_unitary(&mut self, gate: &GateMatrix, targets: &[usize]) -> Result<()> {
        self.check_targets(gate, targets, &[])?;
        self.apply_masked(gate.matrix(), targets, 0, 0);
        Ok(())
    }

    /// Applies `gate` on the subspace where every control qubit is `|1⟩`.
    pub fn apply_controlled(
        &mut self,
        gate: &GateMatrix,
        controls: &[usize],
        targets: &[usize],
    ) -> Result<()> {
        let values = vec![true; controls.len()];
        self.apply_controlled_pattern(gate, controls, &values, targets)
    }

    /// Applies `gate` on the subspace where `controls[i]` equals `values[i]`.
    pub fn apply_controlled_pattern(
        &mut self,
        gate: &GateMatrix,
        controls: &[usize],
        values: &[bool],
        targets: &[usize],
    ) -> Result<()> {
        if controls.len() != values.len() {
            return Err(Error::Domain("control values do not match control qubits".into()));
        }
        self.check_targets(gate, targets, controls)?;
        let mut mask = 0usize;
        let mut expected = 0usize;
        for (&q, &v) in controls.iter().zip(values) {
            mask |= 1 << q;
            if v {
                expected |= 1 << q;
            }
        }
        self.apply_masked(gate.matrix(), targets, mask, expected);
        Ok(())
    }

    fn check_targets(&self, gate: &GateMatrix, targets: &[usize], controls: &[usize]) -> Result<()> {
        if targets.len() != gate.num_qubits() {
            return Err(Error::Domain(format!(
                "gate acts on {} qubits but {} targets were given",
                gate.num_qubits(),
                targets.len()
            )));
        }
        let mut seen = 0usize;
        for &q in targets.iter().chain(controls) {
            if q >= self.num_qubits {
                return Err(Error::Domain(format!(
                    "qubit {q} out of range for {} qubits",
                    self.num_qubits
                )));
            }
            if seen & (1 << q) != 0 {
                return Err(Error::Domain(format!("qubit {q} used more than once")));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn apply_masked(&mut self, m: &DMatrix<Complex64>, targets: &[usize], ctrl_mask: usize, ctrl_value: usize) {
        let local_dim = 1usize << targets.len();
        let target_mask: usize = targets.iter().map(|&q| 1usize << q).sum();
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| (l >> j) & 1 == 1)
                    .map(|(_, &q)| 1usize << q)
                    .sum()
            })
            .collect();
        let mut local = vec![Complex64::new(0.0, 0.0); local_dim];
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 || base & ctrl_mask != ctrl_value {
                continue;
            }
            for (slot, &off) in local.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, &v) in local.iter().enumerate() {
                    acc += m[(row, col)] * v;
                }
                self.amplitudes[base | off] = acc;
            }
        }
    }

    /// Probability that `qubit` measures `outcome`.
    pub fn probability_of(&self, qubit: usize, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let want = if outcome == 1 { bit } else { 0 };
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == want)
            .map(|(_, z)| z.norm_sqr())
            .sum())
    }

    /// Projects `qubit` onto `outcome` and renormalizes.
    ///
    /// Returns the collapsed state and the pre-collapse probability of the
    /// kept branch.
    pub fn postselect(&self, qubit: usize, outcome: u8) -> Result<(Statevector, f64)> {
        if outcome > 1 {
            return Err(Error::Domain(format!("outcome must be 0 or 1, got {outcome}")));
        }
        let probability = self.probability_of(qubit, outcome)?;
        if probability < IMPOSSIBLE_OUTCOME {
            return Err(Error::ImpossibleOutcome {
                qubit,
                outcome,
                probability,
            });
        }
        let bit = 1usize << qubit;
        let want = if outcome == 1 { bit } else { 0 };
        let scale = probability.sqrt();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &z)| if i & bit == want { z / scale } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok((
            Statevector {
                amplitudes,
                num_qubits: self.num_qubits,
                layout: self.layout,
            },
            probability,
        ))
    }

    /// Marginal distribution over `qubits`; outcome bit `j` is the value of `qubits[j]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if qubits.is_empty() {
            return Err(Error::Domain("no qubits to measure".into()));
        }
        let mut seen = 0usize;
        for &q in qubits {
            self.check_qubit(q)?;
            if seen & (1 << q) != 0 {
                return Err(Error::Domain(format!("qubit {q} listed twice")));
            }
            seen |= 1 << q;
        }
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (i, z) in self.amplitudes.iter().enumerate() {
            let key = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &q)| acc | (((i >> q) & 1) << j));
            dist[key] += z.norm_sqr();
        }
        Ok(dist)
    }

    /// Draws `shots` measurements of `qubits` with a seeded generator.
    ///
    /// Keys use the same bit order as [`Statevector::marginal`]; outcomes
    /// that never occur are absent from the map.
    pub fn sample(&self, qubits: &[usize], shots: u64, seed: u64) -> Result<BTreeMap<u64, u64>> {
        if shots == 0 {
            return Err(Error::Domain("shots must be at least 1".into()));
        }
        let dist = self.marginal(qubits)?;
        let sampler = WeightedIndex::new(&dist)
            .map_err(|e| Error::Validation(format!("cannot sample distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(sampler.sample(&mut rng) as u64).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Phase-invariant overlap `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::Domain(format!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }
}

/// `|1⟩`-at-`index` state over an HHL layout.
pub fn init_basis_state(layout: RegisterLayout, index: usize) -> Result<Statevector> {
    Statevector::basis(layout.total_qubits(), index)?.with_layout(layout)
}

pub fn fidelity(a: &Statevector, b: &Statevector) -> Result<f64> {
    a.fidelity(b)
}

fn norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|z| z.norm_sqr()).sum()
}

/// Binary label of `index`, most significant qubit first.
pub fn ket_label(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .rev()
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl fmt::Display for Statevector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, z) in self.amplitudes.iter().enumerate() {
            if z.norm() < 1e-9 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.4}{:+.4}i)|{}>", z.re, z.im, ket_label(i, self.num_qubits))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn h() -> GateMatrix {
        GateMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
        ))
        .unwrap()
    }

    fn x() -> GateMatrix {
        GateMatrix::new(DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])).unwrap()
    }

    #[test]
    fn layout_index_map() {
        let layout = RegisterLayout::new(1, 2).unwrap();
        assert_eq!(layout.total_qubits(), 4);
        assert_eq!(layout.index(1, 0, 1), 9);
        assert_eq!(layout.split(9), (1, 0, 1));
        assert_eq!(layout.clock_qubits(), vec![1, 2]);
        assert_eq!(layout.b_qubits(), vec![3]);
        assert!(RegisterLayout::new(0, 2).is_err());
        assert!(RegisterLayout::new(1, 0).is_err());
    }

    #[test]
    fn basis_states() {
        let layout = RegisterLayout::new(1, 2).unwrap();
        let psi0 = init_basis_state(layout, 0).unwrap();
        assert_eq!(psi0.amplitude(0), c(1.0, 0.0));
        let psi1 = init_basis_state(layout, 8).unwrap();
        assert_eq!(layout.split(8), (1, 0, 0));
        assert_eq!(psi1.amplitude(8), c(1.0, 0.0));

        let small = init_basis_state(RegisterLayout::new(1, 1).unwrap(), 7).unwrap();
        for (i, z) in small.amplitudes().iter().enumerate() {
            assert_eq!(z.re, if i == 7 { 1.0 } else { 0.0 });
        }
        assert!(matches!(init_basis_state(layout, 16), Err(Error::Domain(_))));
    }

    #[test]
    fn x_on_b_register() {
        let layout = RegisterLayout::new(1, 2).unwrap();
        let mut psi = init_basis_state(layout, 0).unwrap();
        psi.apply_unitary(&x(), &[3]).unwrap();
        assert_eq!(psi.amplitude(8), c(1.0, 0.0));
    }

    #[test]
    fn identity_and_hh() {
        let mut psi = Statevector::from_unnormalized(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.0, 0.4), c(0.5, 0.0)]).unwrap();
        let before = psi.clone();
        psi.apply_unitary(&GateMatrix::identity(2), &[0, 1]).unwrap();
        assert_eq!(psi, before);

        let mut zero = Statevector::zero(1).unwrap();
        zero.apply_unitary(&h(), &[0]).unwrap();
        zero.apply_unitary(&h(), &[0]).unwrap();
        assert!((zero.amplitude(0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(zero.amplitude(1).norm() < 1e-12);
    }

    #[test]
    fn target_errors() {
        let mut psi = Statevector::zero(2).unwrap();
        let cnot_like = GateMatrix::identity(2);
        assert!(matches!(psi.apply_unitary(&cnot_like, &[0, 0]), Err(Error::Domain(_))));
        assert!(matches!(psi.apply_unitary(&x(), &[2]), Err(Error::Domain(_))));
        assert!(matches!(psi.apply_unitary(&x(), &[0, 1]), Err(Error::Domain(_))));
        assert!(matches!(psi.apply_controlled(&x(), &[1], &[1]), Err(Error::Domain(_))));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(GateMatrix::new(m), Err(Error::Validation(_))));
        let m = DMatrix::from_element(3, 3, c(0.0, 0.0));
        assert!(matches!(GateMatrix::new(m), Err(Error::Domain(_))));
    }

    #[test]
    fn control_off_branch_untouched() {
        let mut psi = Statevector::basis(3, 0b001).unwrap();
        let before = psi.clone();
        psi.apply_controlled(&x(), &[1], &[2]).unwrap();
        assert_eq!(psi, before);
        psi.apply_controlled(&x(), &[0], &[2]).unwrap();
        assert_eq!(psi.amplitude(0b101), c(1.0, 0.0));
    }

    #[test]
    fn pattern_control() {
        let mut psi = Statevector::basis(3, 0b010).unwrap();
        psi.apply_controlled_pattern(&x(), &[0, 1], &[false, true], &[2]).unwrap();
        assert_eq!(psi.amplitude(0b110), c(1.0, 0.0));
    }

    #[test]
    fn postselect_cases() {
        let zero = Statevector::zero(4).unwrap();
        let (kept, p) = zero.postselect(0, 0).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(kept, zero);
        assert!(matches!(zero.postselect(0, 1), Err(Error::ImpossibleOutcome { .. })));

        let mut plus = Statevector::zero(1).unwrap();
        plus.apply_unitary(&h(), &[0]).unwrap();
        for outcome in [0, 1] {
            let (s, p) = plus.postselect(0, outcome).unwrap();
            assert!((p - 0.5).abs() < 1e-15);
            assert!((s.amplitude(outcome as usize).norm() - 1.0).abs() < 1e-15);
        }
        assert!(matches!(plus.postselect(1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_deterministic_state() {
        let one = Statevector::basis(1, 1).unwrap();
        let counts = one.sample(&[0], 1000, 7).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&1], 1000);
        assert!(matches!(one.sample(&[], 10, 0), Err(Error::Domain(_))));
        assert!(matches!(one.sample(&[0], 0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_same_seed_same_counts() {
        let psi = Statevector::from_unnormalized(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5), c(0.3, 0.0)]).unwrap();
        let a = psi.sample(&[0, 1], 5000, 42).unwrap();
        let b = psi.sample(&[0, 1], 5000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values().sum::<u64>(), 5000);
        let other = psi.sample(&[0, 1], 5000, 43).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn marginal_traces_out_rest() {
        // (|00> + |11>)/sqrt2 marginal on qubit 1 is uniform
        let psi = Statevector::from_unnormalized(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let m = psi.marginal(&[1]).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
        // swapped key order
        let psi = Statevector::basis(2, 0b01).unwrap();
        assert_eq!(psi.marginal(&[1, 0]).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn fidelity_cases() {
        let psi = Statevector::from_unnormalized(vec![c(0.3, 0.1), c(-0.2, 0.7)]).unwrap();
        assert!((psi.fidelity(&psi).unwrap() - 1.0).abs() < 1e-15);
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = Statevector::from_amplitudes(psi.amplitudes().iter().map(|z| z * phase).collect()).unwrap();
        assert!((psi.fidelity(&rotated).unwrap() - 1.0).abs() < 1e-14);
        let zero = Statevector::basis(1, 0).unwrap();
        let one = Statevector::basis(1, 1).unwrap();
        assert_eq!(zero.fidelity(&one).unwrap(), 0.0);
        assert!(matches!(zero.fidelity(&Statevector::zero(2).unwrap()), Err(Error::Domain(_))));
    }

    #[test]
    fn ket_labels_msb_first() {
        assert_eq!(ket_label(8, 4), "1000");
        assert_eq!(ket_label(9, 4), "1001");
        assert_eq!(ket_label(2, 4), "0010");
    }
}
