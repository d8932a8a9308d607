//! Spin-chain dynamics for single-spin signal amplification.
//!
//! The crate builds two families of chain Hamiltonians from one coupling
//! profile: the exchange chain `1/2 sum J_n (X_n X_{n+1} + Y_n Y_{n+1})` and
//! the cluster-like chain `sum J_{n-1} K_n`, which turns `|10...0>` into
//! `|1...1>`. A ladder of CNOT gates maps one onto the other, which is
//! checked symbolically ([`basis::conjugate_hamiltonian`]) and against
//! dense matrices. On top of that sit exact time evolution, a classical
//! cellular automaton that the cluster chain reproduces, and a Monte Carlo
//! study of dephasing during transfer.
//!
//! Site `i` of an `N`-site chain is bit `i - 1` of a basis index; text forms
//! print site 1 first. Time is unitless with `hbar = 1`.

pub mod algebra;
pub mod automaton;
pub mod basis;
pub mod chains;
mod error;
pub mod evolution;
pub mod experiments;
pub mod noise;

pub use error::{Error, Result};
