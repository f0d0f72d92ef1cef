#![allow(dead_code)]

use hhl_core::{HermitianSystem, Statevector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn example_system() -> HermitianSystem {
    let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(-1.0 / 3.0, 0.0), c(-1.0 / 3.0, 0.0), c(1.0, 0.0)]);
    HermitianSystem::new(a, DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])).unwrap()
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Haar-ish random unitary from the QR factor of a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    m.qr().q()
}

/// Random Hermitian `A` whose eigenvalues are a random scale times distinct
/// integers in `[1, 2^n - 1]`, so the exact encoding always succeeds. Returns
/// the system and the integers used.
pub fn random_exact_system<R: Rng>(rng: &mut R, nb: usize, n: usize) -> (HermitianSystem, Vec<u64>) {
    let dim = 1 << nb;
    let max = (1usize << n) - 1;
    let ints: Vec<u64> = sample(rng, max, dim).into_iter().map(|k| k as u64 + 1).collect();
    let scale = rng.random_range(0.2..3.0);
    let v = random_unitary(rng, dim);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(dim, ints.iter().map(|&k| c(scale * k as f64, 0.0))));
    let a = &v * d * v.adjoint();
    let a = (&a + a.adjoint()) * c(0.5, 0.0);
    let b = DVector::from_fn(dim, |_, _| random_complex(rng));
    (HermitianSystem::new(a, b).unwrap(), ints)
}

pub fn state_from(amps: &[(usize, Complex64)], nq: usize) -> Statevector {
    let mut v = vec![c(0.0, 0.0); 1 << nq];
    for &(i, z) in amps {
        v[i] = z;
    }
    Statevector::from_unnormalized(v).unwrap()
}

/// `|⟨a|b⟩|²` for plain amplitude vectors.
pub fn vec_fidelity(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.normalize().dotc(&b.normalize()).norm_sqr()
}
