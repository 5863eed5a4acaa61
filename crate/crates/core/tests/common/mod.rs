#![allow(dead_code)]

use maxreg::linalg::c;
use maxreg::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn complex_vector(rng: &mut ChaCha8Rng, n: usize) -> maxreg::CVector {
    maxreg::CVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `X* X + shift I`.
pub fn hpd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> CMatrix {
    let x = complex_matrix(rng, n);
    x.adjoint() * &x + CMatrix::identity(n, n) * c(shift)
}

/// A triple whose generalized eigenvalues are all at least one.
pub fn random_triple(seed: u64, n: usize) -> maxreg::HilbertTriple {
    let mut r = rng(seed);
    let gh = hpd(&mut r, n, 0.5);
    let gv = &gh + hpd(&mut r, n, 0.1);
    maxreg::build_triple(gh, gv).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `V D V^{-1}` with eigenvalues `r e^{iφ}`, `r ∈ [0.5, 20]`, `|φ| ≤ 0.8`.
pub fn sectorial_matrix(seed: u64, n: usize) -> (CMatrix, Vec<C64>) {
    let mut r = rng(seed);
    let eig: Vec<C64> = (0..n)
        .map(|_| C64::from_polar(r.gen_range(0.5..20.0), r.gen_range(-0.8..0.8)))
        .collect();
    let v = CMatrix::identity(n, n) + complex_matrix(&mut r, n) * c(0.3 / (n as f64).sqrt());
    let vinv = v.clone().try_inverse().unwrap();
    (&v * CMatrix::from_diagonal(&maxreg::CVector::from_vec(eig.clone())) * vinv, eig)
}

pub fn sectorial_snapshot(seed: u64, n: usize) -> maxreg::SectorialSnapshot {
    maxreg::SectorialSnapshot::from_operator(sectorial_matrix(seed, n).0, 0.85).unwrap()
}
