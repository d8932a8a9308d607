//! Pauli-string Hamiltonians, state vectors and their matrix realizations.

mod hamiltonian;
mod pauli;
mod state;

pub use hamiltonian::{
    apply_spec, apply_spec_raw, expectation, hermiticity_defect, max_abs_diff, reachable_sector,
    realize_block, realize_dense, realize_dense_with_cap, realize_sparse, HamiltonianSpec,
    SparseMatrix, DENSE_CAP, SPARSE_CAP,
};
pub(crate) use hamiltonian::{apply_compiled, CompiledTerm};
pub use pauli::{Pauli, PauliString, PauliTerm, MAX_SITES};
pub use state::{BitConfig, StateVector, NORM_TOLERANCE};
pub(crate) use state::{full_mask, inner, norm};
