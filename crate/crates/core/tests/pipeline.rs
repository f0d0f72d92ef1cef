mod common;

use common::{c, example_system, random_exact_system, vec_fidelity};
use hhl_core::{
    build_circuit_ir, emit_qasm, parse_qasm, solve, trace_run, AncillaMode, EncodingMode, EncodingPlan, Error,
    HermitianSystem, SolveOptions, Stage,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn four_dimensional_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let (sys, _) = random_exact_system(&mut rng, 2, 4);
        let result = solve(&sys, 4, &SolveOptions::default()).unwrap();
        let x = sys.a().clone().try_inverse().unwrap() * sys.b();
        assert!(1.0 - vec_fidelity(&x, &result.solution_amplitudes) < 1e-8);
        assert!(result.clock_residual < 1e-10);
    }
}

#[test]
fn success_probability_matches_eigen_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..20 {
        let (sys, _) = random_exact_system(&mut rng, 1, 3);
        let plan = EncodingPlan::new(&sys, 3, EncodingMode::Exact, None).unwrap();
        let beta = plan.eigen_coefficients(&sys.normalized_b());
        let want: f64 = beta
            .iter()
            .zip(plan.lambda_tilde())
            .map(|(b, &l)| b.norm_sqr() * (plan.c() / l as f64).powi(2))
            .sum();
        let result = solve(&sys, 3, &SolveOptions::default()).unwrap();
        assert!((result.success_probability - want).abs() < 1e-12);
    }
}

#[test]
fn smaller_c_scales_success_probability() {
    let full = solve(&example_system(), 2, &SolveOptions::default()).unwrap();
    let half = solve(&example_system(), 2, &SolveOptions { c: Some(0.5), ..Default::default() }).unwrap();
    assert!((half.success_probability - full.success_probability / 4.0).abs() < 1e-12);
    assert!((half.fidelity - 1.0).abs() < 1e-12);
    assert!(solve(&example_system(), 2, &SolveOptions { c: Some(1.5), ..Default::default() }).is_err());
}

#[test]
fn trace_and_solve_agree() {
    let options = SolveOptions { record_trace: true, ..Default::default() };
    let result = solve(&example_system(), 2, &options).unwrap();
    let trace = trace_run(&example_system(), 2, &options).unwrap();
    let psi9 = trace.get(Stage::Psi9).unwrap();
    assert!(1.0 - psi9.fidelity(&result.unmeasured_state).unwrap() < 1e-10);
    assert_eq!(result.trace.as_ref().unwrap(), &trace);
    let psi1 = trace.get(Stage::Psi1).unwrap();
    assert_eq!(psi1.amplitude(8), c(1.0, 0.0));
}

#[test]
fn rounded_mode_reports_error() {
    // eigenvalues 1 and √2: not exactly encodable
    let s = 2f64.sqrt();
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(2.0 * s, 0.0)]));
    let sys = HermitianSystem::new(a, DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
    match solve(&sys, 2, &SolveOptions::default()) {
        Err(Error::EncodingInfeasible { best_rounded: Some(plan), .. }) => assert_eq!(plan.lambda_tilde, vec![1, 3]),
        other => panic!("{other:?}"),
    }
    let opts = SolveOptions { encoding: EncodingMode::Rounded, ..Default::default() };
    let result = solve(&sys, 2, &opts).unwrap();
    assert!(result.encoding.max_relative_error() > 0.0);
    assert!(result.fidelity > 0.9 && result.fidelity < 1.0 - 1e-6);
}

#[test]
fn per_qubit_mode_end_to_end() {
    let opts = SolveOptions { ancilla: AncillaMode::PerQubit, ..Default::default() };
    let result = solve(&example_system(), 2, &opts).unwrap();
    assert!((result.success_probability - 0.625).abs() < 1e-12);
}

#[test]
fn emitted_random_circuits_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let (sys, _) = random_exact_system(&mut rng, 1, 3);
        let plan = EncodingPlan::new(&sys, 3, EncodingMode::Exact, None).unwrap();
        let text = emit_qasm(&build_circuit_ir(&sys, &plan).unwrap()).unwrap();
        let replayed = parse_qasm(&text).unwrap().simulate().unwrap();
        let psi9 = trace_run(&sys, 3, &SolveOptions::default()).unwrap();
        let f = replayed.fidelity(psi9.get(Stage::Psi9).unwrap()).unwrap();
        assert!(1.0 - f < 1e-10, "fidelity {f}\n{text}");
    }
}
