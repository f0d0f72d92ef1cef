//! Text and CSV rendering of states, results and counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hhl_core::{ket_label, HHLResult, StageTrace, Statevector};
use num_complex::Complex64;

/// Terms with a smaller magnitude are left out of bra-ket listings.
pub const KET_THRESHOLD: f64 = 1e-9;

/// Four decimals; the imaginary part is shown only when it survives rounding.
pub fn human_complex(z: Complex64) -> String {
    let clean = |x: f64| if x.abs() < 5e-5 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re:.4}")
    } else if re == 0.0 {
        format!("{im:.4}j")
    } else {
        format!("{re:.4}{im:+.4}j")
    }
}

pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn state_block(out: &mut String, state: &Statevector) {
    let list: Vec<String> = state.amplitudes().iter().map(|&z| human_complex(z)).collect();
    let _ = writeln!(out, "  amplitudes: [{}]", list.join(", "));
    for (i, &z) in state.amplitudes().iter().enumerate() {
        if z.norm() > KET_THRESHOLD {
            let _ = writeln!(out, "  |{}> : {}", ket_label(i, state.num_qubits()), human_complex(z));
        }
    }
}

pub fn trace_human(trace: &StageTrace) -> String {
    let mut out = String::new();
    for (stage, state) in trace.entries() {
        let _ = writeln!(out, "{stage}");
        state_block(&mut out, state);
    }
    out
}

pub const TRACE_CSV_HEADER: &str = "stage,index,ket,re,im";

pub fn trace_csv(trace: &StageTrace) -> String {
    let mut out = format!("{TRACE_CSV_HEADER}\n");
    for (stage, state) in trace.entries() {
        for (i, &z) in state.amplitudes().iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{i},{},{},{}",
                stage.label(),
                ket_label(i, state.num_qubits()),
                csv_float(z.re),
                csv_float(z.im)
            );
        }
    }
    out
}

pub fn replay_human(state: &Statevector, fidelity: Option<f64>) -> String {
    let mut out = String::from("replayed final state\n");
    state_block(&mut out, state);
    if let Some(f) = fidelity {
        let _ = writeln!(out, "fidelity vs Ψ9: {f:.12}");
    }
    out
}

pub fn replay_csv(state: &Statevector) -> String {
    let mut out = String::from("index,ket,re,im\n");
    for (i, &z) in state.amplitudes().iter().enumerate() {
        let _ = writeln!(out, "{i},{},{},{}", ket_label(i, state.num_qubits()), csv_float(z.re), csv_float(z.im));
    }
    out
}

fn ratio_text(ratios: &[f64]) -> String {
    ratios
        .iter()
        .map(|&r| {
            if r == 1.0 {
                "1".to_string()
            } else if r == 0.0 {
                "0".to_string()
            } else {
                format!("{r:.6}")
            }
        })
        .collect::<Vec<_>>()
        .join(":")
}

pub fn solve_human(result: &HHLResult, nb: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "encoding: {}", result.encoding);
    let _ = writeln!(out, "C: {}", result.c);
    let _ = writeln!(out, "success probability: {:.6}", result.success_probability);
    let _ = writeln!(out, "solution amplitudes:");
    for (j, &z) in result.solution_amplitudes.iter().enumerate() {
        let _ = writeln!(out, "  |{}> : {}", ket_label(j, nb), human_complex(z));
    }
    let _ = writeln!(out, "ratio: {}", ratio_text(&result.outcome_ratios));
    let classical: Vec<String> = result.classical_solution.iter().map(|&z| human_complex(z)).collect();
    let _ = writeln!(out, "classical solution: [{}]", classical.join(", "));
    let _ = writeln!(out, "fidelity: {:.6}", result.fidelity);
    let _ = writeln!(out, "clock residual: {:.3e}", result.clock_residual);
    out
}

pub const SOLVE_CSV_HEADER: &str =
    "index,ket,amplitude_re,amplitude_im,probability,ratio,classical_re,classical_im,success_probability,fidelity";

pub fn solve_csv(result: &HHLResult, nb: usize) -> String {
    let mut out = format!("{SOLVE_CSV_HEADER}\n");
    for (j, &z) in result.solution_amplitudes.iter().enumerate() {
        let x = result.classical_solution[j];
        let _ = writeln!(
            out,
            "{j},{},{},{},{},{},{},{},{},{}",
            ket_label(j, nb),
            csv_float(z.re),
            csv_float(z.im),
            csv_float(z.norm_sqr()),
            csv_float(result.outcome_ratios[j]),
            csv_float(x.re),
            csv_float(x.im),
            csv_float(result.success_probability),
            csv_float(result.fidelity)
        );
    }
    out
}

/// Count keys carry the ancilla in bit 0 and b-register bit `k` in bit `k + 1`.
fn split_key(key: u64) -> (u64, u64) {
    (key >> 1, key & 1)
}

pub fn sample_human(counts: &BTreeMap<u64, u64>, nb: usize, shots: u64, seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "shots: {shots}, seed: {seed}, sampler: {}", hhl_core::statevector::SAMPLER_ALGORITHM);
    for key in 0..1u64 << (nb + 1) {
        let (b, a) = split_key(key);
        let n = counts.get(&key).copied().unwrap_or(0);
        let _ = writeln!(out, "  b={} a={a} : {n} ({:.6})", ket_label(b as usize, nb), n as f64 / shots as f64);
    }
    let kept: u64 = counts.iter().filter(|(k, _)| *k & 1 == 1).map(|(_, n)| n).sum();
    if kept > 0 {
        let _ = writeln!(out, "conditional on a=1 ({kept} shots):");
        for b in 0..1u64 << nb {
            let n = counts.get(&(b << 1 | 1)).copied().unwrap_or(0);
            let _ = writeln!(out, "  P(b={} | a=1) = {:.6}", ket_label(b as usize, nb), n as f64 / kept as f64);
        }
    }
    out
}

pub const SAMPLE_CSV_HEADER: &str = "b,a,count,frequency";

pub fn sample_csv(counts: &BTreeMap<u64, u64>, nb: usize, shots: u64) -> String {
    let mut out = format!("{SAMPLE_CSV_HEADER}\n");
    for key in 0..1u64 << (nb + 1) {
        let (b, a) = split_key(key);
        let n = counts.get(&key).copied().unwrap_or(0);
        let _ = writeln!(out, "{},{a},{n},{}", ket_label(b as usize, nb), csv_float(n as f64 / shots as f64));
    }
    out
}
