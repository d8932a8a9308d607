//! Classical bijections and operator transforms that connect the cluster chain
//! with the exchange chain.
//!
//! The CNOT ladder `G = C_2^1 C_3^2 ... C_N^{N-1}` (control `n`, target
//! `n - 1`) acts on basis states as the suffix-XOR map: output bit `i` is
//! the parity of input bits `i..=N`. It sends a single excitation at `n` to
//! the tilde state `1^n 0^{N-n}` and conjugates the exchange chain into the
//! cluster chain.

use crate::algebra::{full_mask, BitConfig, HamiltonianSpec, Pauli, PauliString, PauliTerm};
use crate::error::{Error, Result};

/// Sorted set of distinct effective excitation positions in `1..=N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TildeIndexSet {
    n_sites: usize,
    indices: Vec<usize>,
}

impl TildeIndexSet {
    pub fn new(n_sites: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(
                "indices",
                format!("index {} repeated", w[0]),
            ));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n_sites) {
            return Err(Error::SiteOutOfRange { site: bad, n_sites });
        }
        Ok(TildeIndexSet { n_sites, indices })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// XOR over `n` in the set of `1^n 0^{N-n}`.
pub fn tilde_config(set: &TildeIndexSet) -> BitConfig {
    let mask = set
        .indices
        .iter()
        .fold(0u64, |acc, &n| acc ^ full_mask(n));
    BitConfig::from_index(set.n_sites, mask as usize)
}

/// Suffix-XOR: output site `i` = XOR of input sites `i..=N`.
pub fn gamma_forward(b: &BitConfig) -> BitConfig {
    BitConfig::from_index(b.n_sites(), gamma_forward_index(b.index()))
}

/// Adjacent difference: output site `i` = input `i` XOR input `i + 1`, with
/// site `N + 1` read as 0.
pub fn gamma_inverse(b: &BitConfig) -> BitConfig {
    BitConfig::from_index(b.n_sites(), gamma_inverse_index(b.index()))
}

pub fn gamma_forward_index(index: usize) -> usize {
    let mut y = index as u64;
    for shift in [1, 2, 4, 8, 16, 32] {
        y ^= y >> shift;
    }
    y as usize
}

pub fn gamma_inverse_index(index: usize) -> usize {
    index ^ (index >> 1)
}

/// `gamma_forward(reverse(gamma_inverse(b)))`: the image of `b` under perfect
/// mirror transfer, seen through the ladder. An involution.
pub fn mirror_map(b: &BitConfig) -> BitConfig {
    gamma_forward(&gamma_inverse(b).reversed())
}

/// Conjugation of a two-site Pauli pair through a CNOT:
/// `(control, target) -> (control', target', sign)`.
fn cnot_rule(control: Option<Pauli>, target: Option<Pauli>) -> (Option<Pauli>, Option<Pauli>, f64) {
    use Pauli::{X, Y, Z};
    match (control, target) {
        (None, None) => (None, None, 1.0),
        (None, Some(X)) => (None, Some(X), 1.0),
        (None, Some(Y)) => (Some(Z), Some(Y), 1.0),
        (None, Some(Z)) => (Some(Z), Some(Z), 1.0),
        (Some(X), None) => (Some(X), Some(X), 1.0),
        (Some(X), Some(X)) => (Some(X), None, 1.0),
        (Some(X), Some(Y)) => (Some(Y), Some(Z), 1.0),
        (Some(X), Some(Z)) => (Some(Y), Some(Y), -1.0),
        (Some(Y), None) => (Some(Y), Some(X), 1.0),
        (Some(Y), Some(X)) => (Some(Y), None, 1.0),
        (Some(Y), Some(Y)) => (Some(X), Some(Z), -1.0),
        (Some(Y), Some(Z)) => (Some(X), Some(Y), 1.0),
        (Some(Z), None) => (Some(Z), None, 1.0),
        (Some(Z), Some(X)) => (Some(Z), Some(X), 1.0),
        (Some(Z), Some(Y)) => (None, Some(Y), 1.0),
        (Some(Z), Some(Z)) => (None, Some(Z), 1.0),
    }
}

/// `C P C` for the CNOT with the given control and target sites.
pub fn conjugate_by_cnot(p: PauliString, control: usize, target: usize) -> (f64, PauliString) {
    let (c, t, sign) = cnot_rule(p.letter(control), p.letter(target));
    (sign, p.with_letter(control, c).with_letter(target, t))
}

/// `G P G^dagger` for the ladder on `n_sites`: the gates are applied from
/// `C_N^{N-1}` (innermost) to `C_2^1` (outermost).
pub fn conjugate_pauli(p: PauliString, n_sites: usize) -> (f64, PauliString) {
    let mut sign = 1.0;
    let mut s = p;
    for control in (2..=n_sites).rev() {
        let (g, next) = conjugate_by_cnot(s, control, control - 1);
        sign *= g;
        s = next;
    }
    (sign, s)
}

/// Every term of `spec` carried through the CNOT ladder; the result is canonical.
pub fn conjugate_hamiltonian(spec: &HamiltonianSpec) -> HamiltonianSpec {
    let terms = spec
        .canonical()
        .terms()
        .iter()
        .map(|t| {
            let (sign, s) = conjugate_pauli(*t.string(), spec.n_sites());
            PauliTerm::new(sign * t.coefficient(), s).expect("conjugation keeps coefficients valid")
        })
        .collect();
    HamiltonianSpec::new(spec.n_sites(), terms)
        .expect("ladder keeps terms inside the chain")
        .canonical()
}
