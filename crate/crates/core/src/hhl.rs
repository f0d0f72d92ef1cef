//! The HHL pipeline: state preparation, phase estimation, ancilla rotation,
//! uncomputation and post-selection, plus a classical reference solve.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::encoding::{unitary_from_hamiltonian, EncodingMode, EncodingPlan, HermitianSystem, TimeEncoding};
use crate::error::{Error, Result};
use crate::gates::{self, hadamard};
use crate::statevector::{init_basis_state, RegisterLayout, Statevector};

/// Clock values with at least this much probability mass count as populated.
pub const POPULATED_MASS: f64 = 1e-12;
/// Residual allowed when fitting per-qubit ancilla angles.
pub const PER_QUBIT_RESIDUAL: f64 = 1e-10;

/// Snapshot labels, in derivation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Psi0,
    Psi1,
    Psi2,
    Psi3,
    Psi4,
    Psi5,
    Psi6,
    Psi7,
    Psi8,
    Psi9,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Psi0,
        Stage::Psi1,
        Stage::Psi2,
        Stage::Psi3,
        Stage::Psi4,
        Stage::Psi5,
        Stage::Psi6,
        Stage::Psi7,
        Stage::Psi8,
        Stage::Psi9,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["Ψ0", "Ψ1", "Ψ2", "Ψ3", "Ψ4", "Ψ5", "Ψ6", "Ψ7", "Ψ8", "Ψ9"][self.index()]
    }

    pub fn description(self) -> &'static str {
        match self {
            Stage::Psi0 => "initial state",
            Stage::Psi1 => "state preparation",
            Stage::Psi2 => "QPE: Hadamard layer on clock",
            Stage::Psi3 => "QPE: controlled-U powers",
            Stage::Psi4 => "QPE: inverse QFT on clock",
            Stage::Psi5 => "ancilla rotation",
            Stage::Psi6 => "ancilla post-selected on |1>",
            Stage::Psi7 => "IQPE: QFT on clock, unmeasured",
            Stage::Psi8 => "IQPE: controlled-U^-1 powers, unmeasured",
            Stage::Psi9 => "IQPE: Hadamard layer on clock, unmeasured",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.description())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum AncillaMode {
    /// One rotation conditioned on each full clock value.
    #[default]
    Exact,
    /// One controlled-RY per clock qubit with additive angles.
    PerQubit,
}

impl fmt::Display for AncillaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AncillaMode::Exact => "exact",
            AncillaMode::PerQubit => "per-qubit",
        })
    }
}

/// When the ancilla measurement happens in `solve`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PostselectOrder {
    #[default]
    AfterUncompute,
    BeforeUncompute,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SolveOptions {
    pub encoding: EncodingMode,
    pub ancilla: AncillaMode,
    /// Rotation constant; the smallest encoded eigenvalue when `None`.
    pub c: Option<f64>,
    pub order: PostselectOrder,
    pub record_trace: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageTrace {
    entries: Vec<(Stage, Statevector)>,
}

impl StageTrace {
    pub fn entries(&self) -> &[(Stage, Statevector)] {
        &self.entries
    }

    pub fn get(&self, stage: Stage) -> Option<&Statevector> {
        self.entries.iter().find(|(s, _)| *s == stage).map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HHLResult {
    /// Normalized b-register state `|x⟩` after post-selection.
    pub solution_amplitudes: DVector<Complex64>,
    pub success_probability: f64,
    /// `|x_j|² / |x_ref|²` with `ref` the first component carrying mass.
    pub outcome_ratios: Vec<f64>,
    /// `A⁻¹·b̂` for the normalized right-hand side `b̂`.
    pub classical_solution: DVector<Complex64>,
    /// `|⟨x̂_classical|x⟩|²`.
    pub fidelity: f64,
    /// Mass outside clock = |0…0⟩ after uncomputation (before measurement).
    pub clock_residual: f64,
    pub encoding: TimeEncoding,
    pub c: f64,
    /// Final state with no measurement applied.
    pub unmeasured_state: Statevector,
    pub postselected_state: Statevector,
    pub trace: Option<StageTrace>,
}

fn layout_of(state: &Statevector) -> Result<RegisterLayout> {
    state
        .layout()
        .copied()
        .ok_or_else(|| Error::Domain("state carries no HHL register layout".into()))
}

/// Loads normalized `b` into the b-register of an all-zero state by direct
/// amplitude injection.
pub fn prepare_b(state: &Statevector, b: &DVector<Complex64>) -> Result<Statevector> {
    let layout = layout_of(state)?;
    if b.len() != 1 << layout.nb() {
        return Err(Error::Domain(format!(
            "b has length {} but the b-register holds {}",
            b.len(),
            1 << layout.nb()
        )));
    }
    let off_zero: f64 = state.amplitudes()[1..].iter().map(|z| z.norm_sqr()).sum();
    if (state.amplitude(0) - Complex64::new(1.0, 0.0)).norm() > 1e-12 || off_zero > 1e-24 {
        return Err(Error::Domain("state preparation needs the all-zero state".into()));
    }
    let norm = b.norm();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::Validation("b must be nonzero".into()));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for (j, &bj) in b.iter().enumerate() {
        amplitudes[layout.index(j, 0, 0)] = bj / norm;
    }
    Statevector::from_amplitudes(amplitudes)?.with_layout(layout)
}

/// Hadamard on every clock qubit.
pub fn clock_hadamards(state: &Statevector) -> Result<Statevector> {
    let layout = layout_of(state)?;
    let mut out = state.clone();
    let h = hadamard();
    for q in layout.clock_qubits() {
        out.apply_unitary(&h, &[q])?;
    }
    Ok(out)
}

/// Clock qubit `k` controls `U^{2^k}` (or its inverse) on the b-register.
pub fn controlled_evolution(state: &Statevector, plan: &EncodingPlan, inverse: bool) -> Result<Statevector> {
    let layout = layout_of(state)?;
    check_plan(layout, plan)?;
    let mut out = state.clone();
    let targets = layout.b_qubits();
    for k in 0..layout.n() {
        let u = unitary_from_hamiltonian(plan, 1 << k, inverse)?;
        out.apply_controlled(&u, &[layout.clock(k)], &targets)?;
    }
    Ok(out)
}

fn clock_fourier(state: &Statevector, inverse: bool) -> Result<Statevector> {
    let layout = layout_of(state)?;
    let gate = if inverse { gates::iqft(layout.n())? } else { gates::qft(layout.n())? };
    let mut out = state.clone();
    out.apply_unitary(&gate, &layout.clock_qubits())?;
    Ok(out)
}

fn check_plan(layout: RegisterLayout, plan: &EncodingPlan) -> Result<()> {
    if plan.clock_qubits() != layout.n() || plan.eigenvalues().len() != 1 << layout.nb() {
        return Err(Error::Domain(format!(
            "plan (n={}, N_b={}) does not fit layout (n={}, nb={})",
            plan.clock_qubits(),
            plan.eigenvalues().len(),
            layout.n(),
            layout.nb()
        )));
    }
    Ok(())
}

/// Hadamard layer, controlled-U powers, inverse QFT on the clock.
pub fn qpe_forward(state: &Statevector, plan: &EncodingPlan) -> Result<Statevector> {
    let psi2 = clock_hadamards(state)?;
    let psi3 = controlled_evolution(&psi2, plan, false)?;
    clock_fourier(&psi3, true)
}

/// QFT on the clock, inverse controlled-U powers, Hadamard layer.
pub fn iqpe_uncompute(state: &Statevector, plan: &EncodingPlan) -> Result<Statevector> {
    let psi7 = clock_fourier(state, false)?;
    let psi8 = controlled_evolution(&psi7, plan, true)?;
    clock_hadamards(&psi8)
}

/// Probability mass per clock value.
pub fn clock_distribution(state: &Statevector) -> Result<Vec<f64>> {
    let layout = layout_of(state)?;
    state.marginal(&layout.clock_qubits())
}

/// Target ancilla angle `2·arcsin(C/c)` for clock value `c`, or `None` when
/// `c < C` (no rotation defined).
fn target_angle(clock: u64, c: f64) -> Option<f64> {
    if (clock as f64) < c {
        None
    } else {
        Some(2.0 * (c / clock as f64).min(1.0).asin())
    }
}

/// Angles `θ_k` with `Σ_k θ_k·c_k = 2·arcsin(C/c)` for every listed clock value.
///
/// `clock_values` must all be `>= C`.
pub fn per_qubit_angles(clock_values: &[u64], n: usize, c: f64) -> Result<Vec<f64>> {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for &value in clock_values {
        let angle = target_angle(value, c).ok_or(Error::ArcsinDomain { clock: value, c })?;
        rows.extend((0..n).map(|k| ((value >> k) & 1) as f64));
        targets.push(angle);
    }
    if targets.is_empty() {
        return Ok(vec![0.0; n]);
    }
    let m = DMatrix::from_row_slice(targets.len(), n, &rows);
    let rhs = DVector::from_vec(targets);
    let theta = m
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Validation(format!("per-qubit angle fit failed: {e}")))?;
    let residual = (&m * &theta - &rhs).amax();
    if residual > PER_QUBIT_RESIDUAL {
        return Err(Error::DecompositionInvalid { residual });
    }
    Ok(theta.iter().copied().collect())
}

/// Rotates the ancilla by `RY(2·arcsin(C/c))` conditioned on clock value `c`.
///
/// With an exactly encoded plan a populated clock value below `C` is an
/// error; with a rounded plan those branches are left unrotated.
pub fn ancilla_rotation(state: &Statevector, plan: &EncodingPlan, mode: AncillaMode) -> Result<Statevector> {
    let layout = layout_of(state)?;
    check_plan(layout, plan)?;
    if state.probability_of(layout.ancilla(), 1)? > POPULATED_MASS {
        return Err(Error::Domain("ancilla rotation needs the ancilla in |0>".into()));
    }
    let dist = clock_distribution(state)?;
    let c = plan.c();
    let populated: Vec<u64> = (0..dist.len() as u64).filter(|&v| dist[v as usize] > POPULATED_MASS).collect();
    let mut rotated = Vec::new();
    for &value in &populated {
        if target_angle(value, c).is_some() {
            rotated.push(value);
        } else if plan.is_exact() {
            return Err(Error::ArcsinDomain { clock: value, c });
        }
    }

    let clocks = layout.clock_qubits();
    let mut out = state.clone();
    match mode {
        AncillaMode::Exact => {
            for value in 1..plan.clock_dim() {
                let Some(theta) = target_angle(value, c) else { continue };
                let pattern: Vec<bool> = (0..layout.n()).map(|k| (value >> k) & 1 == 1).collect();
                out.apply_controlled_pattern(&gates::ry(theta), &clocks, &pattern, &[layout.ancilla()])?;
            }
        }
        AncillaMode::PerQubit => {
            if rotated.len() != populated.len() {
                return Err(Error::ArcsinDomain { clock: populated[0], c });
            }
            let angles = per_qubit_angles(&rotated, layout.n(), c)?;
            for (k, theta) in angles.into_iter().enumerate() {
                if theta != 0.0 {
                    out.apply_controlled(&gates::ry(theta), &[layout.clock(k)], &[layout.ancilla()])?;
                }
            }
        }
    }
    Ok(out)
}

/// Keeps the ancilla = |1⟩ branch.
pub fn postselect_ancilla(state: &Statevector) -> Result<(Statevector, f64)> {
    let layout = layout_of(state)?;
    state.postselect(layout.ancilla(), 1)
}

/// `A⁻¹·b` by LU decomposition.
pub fn classical_solve(system: &HermitianSystem) -> Result<DVector<Complex64>> {
    solve_dense(system.a(), system.b())
}

fn solve_dense(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let x = a.clone().lu().solve(b).ok_or(Error::Singular)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular);
    }
    if (a * &x - b).norm() > 1e-10 * b.norm().max(1.0) {
        return Err(Error::Singular);
    }
    Ok(x)
}

struct Pipeline {
    plan: EncodingPlan,
    snapshots: Vec<(Stage, Statevector)>,
}

fn run_pipeline(system: &HermitianSystem, n: usize, options: &SolveOptions) -> Result<Pipeline> {
    let layout = RegisterLayout::new(system.nb(), n)?;
    let plan = EncodingPlan::new(system, n, options.encoding, options.c)?;

    let psi0 = init_basis_state(layout, 0).map_err(Error::at(Stage::Psi0))?;
    let psi1 = prepare_b(&psi0, system.b()).map_err(Error::at(Stage::Psi1))?;
    let psi2 = clock_hadamards(&psi1).map_err(Error::at(Stage::Psi2))?;
    let psi3 = controlled_evolution(&psi2, &plan, false).map_err(Error::at(Stage::Psi3))?;
    let psi4 = clock_fourier(&psi3, true).map_err(Error::at(Stage::Psi4))?;
    let psi5 = ancilla_rotation(&psi4, &plan, options.ancilla).map_err(Error::at(Stage::Psi5))?;
    let (psi6, _) = postselect_ancilla(&psi5).map_err(Error::at(Stage::Psi6))?;
    let psi7 = clock_fourier(&psi5, false).map_err(Error::at(Stage::Psi7))?;
    let psi8 = controlled_evolution(&psi7, &plan, true).map_err(Error::at(Stage::Psi8))?;
    let psi9 = clock_hadamards(&psi8).map_err(Error::at(Stage::Psi9))?;

    let snapshots = Stage::ALL.into_iter().zip([psi0, psi1, psi2, psi3, psi4, psi5, psi6, psi7, psi8, psi9]).collect();
    Ok(Pipeline { plan, snapshots })
}

/// All ten snapshots. `Ψ6` is the post-selected `Ψ5`; `Ψ7`–`Ψ9` continue
/// from the unmeasured `Ψ5`, so their ancilla = |1⟩ branch (renormalized)
/// is the post-selected state.
pub fn trace_run(system: &HermitianSystem, n: usize, options: &SolveOptions) -> Result<StageTrace> {
    Ok(StageTrace { entries: run_pipeline(system, n, options)?.snapshots })
}

/// Runs every stage and post-selects the ancilla on |1⟩.
pub fn solve(system: &HermitianSystem, n: usize, options: &SolveOptions) -> Result<HHLResult> {
    let Pipeline { plan, snapshots } = run_pipeline(system, n, options)?;
    let layout = RegisterLayout::new(system.nb(), n)?;
    let unmeasured = snapshots[Stage::Psi9.index()].1.clone();

    let (postselected, success_probability) = match options.order {
        PostselectOrder::AfterUncompute => postselect_ancilla(&unmeasured).map_err(Error::at(Stage::Psi9))?,
        PostselectOrder::BeforeUncompute => {
            let (psi6, p) = postselect_ancilla(&snapshots[Stage::Psi5.index()].1).map_err(Error::at(Stage::Psi6))?;
            let done = iqpe_uncompute(&psi6, &plan).map_err(Error::at(Stage::Psi9))?;
            (done, p)
        }
    };

    let clock = clock_distribution(&unmeasured)?;
    let clock_residual = clock[1..].iter().sum();

    let raw: Vec<Complex64> = (0..system.dim()).map(|j| postselected.amplitude(layout.index(j, 0, 1))).collect();
    let raw = DVector::from_vec(raw);
    let norm = raw.norm();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::Stage {
            stage: Stage::Psi9,
            source: Box::new(Error::Validation("no amplitude left on clock = |0...0>".into())),
        });
    }
    let solution_amplitudes = raw / Complex64::new(norm, 0.0);
    let classical_solution = solve_dense(system.a(), &system.normalized_b())?;
    let classical_unit = classical_solution.normalize();
    let fidelity = classical_unit.dotc(&solution_amplitudes).norm_sqr().min(1.0);

    let weights: Vec<f64> = solution_amplitudes.iter().map(|z| z.norm_sqr()).collect();
    let reference = weights.iter().copied().find(|&w| w > 1e-15).unwrap_or(1.0);
    let outcome_ratios = weights.iter().map(|w| w / reference).collect();

    Ok(HHLResult {
        solution_amplitudes,
        success_probability,
        outcome_ratios,
        classical_solution,
        fidelity,
        clock_residual,
        encoding: plan.encoding().clone(),
        c: plan.c(),
        unmeasured_state: unmeasured,
        postselected_state: postselected,
        trace: options.record_trace.then_some(StageTrace { entries: snapshots }),
    })
}
