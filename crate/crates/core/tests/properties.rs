use hhl_core::encoding::cu3_params_from_unitary;
use hhl_core::gates::{self, u3_matrix};
use hhl_core::qasm::{eval_expr, format_param};
use hhl_core::{choose_time_and_clock, EncodingMode, Statevector, U3Params};
use num_complex::Complex64;
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -20.0..20.0f64
}

fn state(nq: usize) -> impl Strategy<Value = Statevector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << nq).prop_filter_map("zero vector", |v| {
        Statevector::from_unnormalized(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).ok()
    })
}

fn max_diff(a: &hhl_core::GateMatrix, b: &hhl_core::GateMatrix) -> f64 {
    (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn gates_preserve_norm(
        s in state(4),
        ops in prop::collection::vec((angle(), angle(), angle(), 0usize..4, 0usize..4), 1..12),
    ) {
        let mut s = s;
        for (t, p, l, q0, q1) in ops {
            let u = u3_matrix(&U3Params::new(t, p, l, 0.0).unwrap());
            if q0 == q1 {
                s.apply_unitary(&u, &[q0]).unwrap();
            } else {
                s.apply_controlled(&u, &[q0], &[q1]).unwrap();
            }
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn postselection_partitions_state(s in state(3), qubit in 0usize..3) {
        let p0 = s.probability_of(qubit, 0).unwrap();
        let p1 = s.probability_of(qubit, 1).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
        let mut rebuilt = [Complex64::new(0.0, 0.0); 8];
        for outcome in 0..2u8 {
            if let Ok((kept, p)) = s.postselect(qubit, outcome) {
                prop_assert!((kept.norm_sqr() - 1.0).abs() < 1e-12);
                for (r, k) in rebuilt.iter_mut().zip(kept.amplitudes()) {
                    *r += k * p.sqrt();
                }
            }
        }
        for (r, a) in rebuilt.iter().zip(s.amplitudes()) {
            prop_assert!((r - a).norm() < 1e-12);
        }
    }

    #[test]
    fn u3_is_unitary_with_known_determinant(t in angle(), p in angle(), l in angle(), g in angle()) {
        let params = U3Params::new(t, p, l, g).unwrap();
        let u = u3_matrix(&params);
        prop_assert!(u.unitarity_deviation() < 1e-12);
        let det = u.matrix().determinant();
        let want = Complex64::from_polar(1.0, 2.0 * g + p + l);
        prop_assert!((det - want).norm() < 1e-12);
    }

    #[test]
    fn canonical_form_keeps_matrix(t in angle(), p in angle(), l in angle(), g in angle()) {
        let params = U3Params::new(t, p, l, g).unwrap();
        prop_assert!((0.0..2.0 * std::f64::consts::PI).contains(&params.theta()));
        for a in [params.phi(), params.lambda(), params.gamma()] {
            prop_assert!(a > -std::f64::consts::PI && a <= std::f64::consts::PI);
        }
        // same matrix as the raw formula
        let half = t / 2.0;
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let raw = [
            e(g) * half.cos(),
            -e(g + l) * half.sin(),
            e(g + p) * half.sin(),
            e(g + p + l) * half.cos(),
        ];
        let m = u3_matrix(&params);
        for (got, want) in m.matrix().transpose().iter().zip(raw) {
            prop_assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn cu3_extraction_round_trips(t in angle(), p in angle(), l in angle(), g in angle()) {
        let u = u3_matrix(&U3Params::new(t, p, l, g).unwrap());
        let back = cu3_params_from_unitary(&u).unwrap();
        prop_assert!(max_diff(&u3_matrix(&back), &u) < 1e-10);
    }

    #[test]
    fn emitted_parameters_round_trip(x in prop_oneof![
        -100.0..100.0f64,
        (-64i64..64, 1i64..=64).prop_map(|(n, d)| n as f64 * std::f64::consts::PI / d as f64),
        -1e-9..1e-9f64,
    ]) {
        let text = format_param(x);
        let back = eval_expr(&text).unwrap();
        prop_assert!((back - x).abs() <= 1e-15 * x.abs(), "{x} -> {text} -> {back}");
    }

    #[test]
    fn exact_encoding_preserves_ratios(
        ints in prop::collection::btree_set(1u64..16, 2..5),
        scale in 0.01..50.0f64,
    ) {
        let eigs: Vec<f64> = ints.iter().map(|&k| k as f64 * scale).collect();
        let enc = choose_time_and_clock(&eigs, 4, EncodingMode::Exact).unwrap();
        let base = enc.lambda_tilde[0] as f64;
        for (j, &l) in enc.lambda_tilde.iter().enumerate() {
            prop_assert!(((l as f64 / base) - eigs[j] / eigs[0]).abs() < 1e-9);
            prop_assert!((1..16).contains(&l));
        }
        prop_assert!((enc.t - 2.0 * std::f64::consts::PI * base / (16.0 * eigs[0])).abs() < 1e-9 * enc.t);
    }
}

#[test]
fn qft_decomposition_is_unitary_on_states() {
    let ir = hhl_core::CircuitIR::new(3, 0, gates::qft_ops(&[0, 1, 2])).unwrap();
    let out = ir.replay(Statevector::basis(3, 5).unwrap()).unwrap();
    assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    assert!(out.probabilities().iter().all(|p| (p - 0.125).abs() < 1e-12));
}
