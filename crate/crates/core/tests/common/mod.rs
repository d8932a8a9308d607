//! Independent dense oracles: Kronecker products of 2x2 matrices and
//! explicit CNOT permutation matrices.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinamp::algebra::{HamiltonianSpec, Pauli, PauliString, PauliTerm, StateVector};
use spinamp::chains::CouplingProfile;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_matrix(p: Option<Pauli>) -> DMatrix<C64> {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let v = match p {
        None => [l, o, o, l],
        Some(Pauli::X) => [o, l, l, o],
        Some(Pauli::Y) => [o, -i, i, o],
        Some(Pauli::Z) => [l, o, o, -l],
    };
    DMatrix::from_row_slice(2, 2, &v)
}

/// Site 1 is the least significant bit, so it is the rightmost factor.
pub fn kron_string(s: &PauliString, n_sites: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for site in (1..=n_sites).rev() {
        m = m.kronecker(&pauli_matrix(s.letter(site)));
    }
    m
}

pub fn kron_spec(spec: &HamiltonianSpec) -> DMatrix<C64> {
    let n = spec.n_sites();
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for t in spec.terms() {
        m += kron_string(t.string(), n) * c(t.coefficient(), 0.0);
    }
    m
}

/// `|b> -> |b xor (b_control ? e_target : 0)>` as a matrix.
pub fn cnot_matrix(n_sites: usize, control: usize, target: usize) -> DMatrix<C64> {
    let dim = 1 << n_sites;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let out = if b >> (control - 1) & 1 == 1 { b ^ (1 << (target - 1)) } else { b };
        m[(out, b)] = c(1.0, 0.0);
    }
    m
}

/// `C_2^1 C_3^2 ... C_N^{N-1}` as a matrix product.
pub fn ladder_matrix(n_sites: usize) -> DMatrix<C64> {
    let mut g = DMatrix::identity(1 << n_sites, 1 << n_sites);
    for control in 2..=n_sites {
        g *= cnot_matrix(n_sites, control, control - 1);
    }
    g
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_string<R: Rng>(n_sites: usize, rng: &mut R) -> PauliString {
    let x = rng.random_range(0..1u64 << n_sites);
    let z = rng.random_range(0..1u64 << n_sites);
    PauliString::from_masks(x, z)
}

pub fn random_spec<R: Rng>(n_sites: usize, n_terms: usize, rng: &mut R) -> HamiltonianSpec {
    let mut spec = HamiltonianSpec::empty(n_sites).unwrap();
    for _ in 0..n_terms {
        let coeff = rng.random_range(0.1..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        spec.push(PauliTerm::new(coeff, random_string(n_sites, rng)).unwrap()).unwrap();
    }
    spec
}

pub fn random_profile<R: Rng>(n_sites: usize, rng: &mut R) -> CouplingProfile {
    spinamp::experiments::random_profile(n_sites, rng).unwrap()
}

pub fn random_state<R: Rng>(n_sites: usize, rng: &mut R) -> StateVector {
    StateVector::random(n_sites, rng)
}

pub fn to_vector(psi: &[C64]) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(psi)
}
