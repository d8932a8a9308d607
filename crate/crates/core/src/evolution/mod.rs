//! Time evolution `U(t) = exp(-i H t)` and the fidelity measures built on it.

mod krylov;
mod measures;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::algebra::{
    apply_compiled, realize_block, realize_dense_with_cap, reachable_sector, BitConfig,
    CompiledTerm, HamiltonianSpec, StateVector, DENSE_CAP, SPARSE_CAP,
};
use crate::error::{Error, Result};

pub use krylov::{expm_krylov, KrylovOptions};
pub use measures::{
    amplification_check, max_fidelity_scan, phase_separability_probe, pst_time,
    transfer_fidelity, AmplificationRecord, PairPhase, PhaseReport, ScanOptions, ScanResult,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Method {
    /// Full eigendecomposition; limited to [`DENSE_CAP`] sites.
    Dense,
    /// Matrix-free Lanczos propagation.
    Krylov,
}

/// Eigendecomposition of a Hermitian block.
#[derive(Clone, Debug)]
pub(crate) struct Spectral {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl Spectral {
    pub(crate) fn new(m: DMatrix<C64>) -> Self {
        if m.iter().all(|z| z.im == 0.0) {
            let eig = SymmetricEigen::new(m.map(|z| z.re));
            Spectral {
                eigenvalues: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            }
        } else {
            let eig = SymmetricEigen::new(m);
            Spectral {
                eigenvalues: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            }
        }
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.eigenvalues
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect()
    }

    pub(crate) fn evolve(&self, v: &[C64], t: f64) -> Vec<C64> {
        let dim = v.len();
        let phases = self.phases(t);
        let mut coeffs = vec![C64::new(0.0, 0.0); dim];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let col = self.vectors.column(k);
            *c = col.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<C64>() * phases[k];
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (k, c) in coeffs.iter().enumerate() {
            let col = self.vectors.column(k);
            out.iter_mut().zip(col.iter()).for_each(|(o, a)| *o += a * c);
        }
        out
    }

    pub(crate) fn unitary(&self, t: f64) -> DMatrix<C64> {
        let phases = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        scaled * self.vectors.adjoint()
    }

    pub(crate) fn amplitude(&self, row: usize, col: usize, t: f64) -> C64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                self.vectors[(row, k)] * self.vectors[(col, k)].conj() * C64::from_polar(1.0, -e * t)
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
enum Engine {
    Dense(Spectral),
    Krylov {
        terms: Vec<CompiledTerm>,
        scale: f64,
        options: KrylovOptions,
    },
}

/// Propagator for a fixed Hamiltonian. Immutable once built.
#[derive(Clone, Debug)]
pub struct Propagator {
    spec: HamiltonianSpec,
    engine: Engine,
}

impl Propagator {
    pub fn new(spec: &HamiltonianSpec, method: Method) -> Result<Self> {
        match method {
            Method::Dense => Self::dense(spec),
            Method::Krylov => Self::krylov(spec, KrylovOptions::default()),
        }
    }

    pub fn dense(spec: &HamiltonianSpec) -> Result<Self> {
        let m = realize_dense_with_cap(spec, DENSE_CAP)?;
        Ok(Propagator {
            spec: spec.canonical(),
            engine: Engine::Dense(Spectral::new(m)),
        })
    }

    pub fn krylov(spec: &HamiltonianSpec, options: KrylovOptions) -> Result<Self> {
        if spec.n_sites() > SPARSE_CAP {
            return Err(Error::invalid(
                "n_sites",
                format!("{} exceeds the matrix-free cap of {SPARSE_CAP}", spec.n_sites()),
            ));
        }
        let canonical = spec.canonical();
        let scale = canonical.terms().iter().map(|t| t.coefficient().abs()).sum();
        Ok(Propagator {
            engine: Engine::Krylov {
                terms: canonical.compile(),
                scale,
                options,
            },
            spec: canonical,
        })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.spec.n_sites()
    }

    pub fn method(&self) -> Method {
        match self.engine {
            Engine::Dense(_) => Method::Dense,
            Engine::Krylov { .. } => Method::Krylov,
        }
    }

    /// Eigenvalues in ascending order, dense method only.
    pub fn spectrum(&self) -> Option<&[f64]> {
        match &self.engine {
            Engine::Dense(s) => Some(&s.eigenvalues),
            Engine::Krylov { .. } => None,
        }
    }

    /// `exp(-i H t)|psi>`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.n_sites() != self.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites(),
                found: psi.n_sites(),
            });
        }
        let out = self.evolve_raw(psi.amplitudes(), t)?;
        StateVector::from_amplitudes(self.n_sites(), out)
    }

    fn evolve_raw(&self, v: &[C64], t: f64) -> Result<Vec<C64>> {
        match &self.engine {
            Engine::Dense(s) => Ok(s.evolve(v, t)),
            Engine::Krylov {
                terms,
                scale,
                options,
            } => expm_krylov(
                |x: &[C64], out: &mut [C64]| apply_compiled(terms, x, out),
                v,
                t,
                *scale,
                options,
            ),
        }
    }

    /// The full matrix `U(t)`; dense method only.
    pub fn unitary(&self, t: f64) -> Result<DMatrix<C64>> {
        match &self.engine {
            Engine::Dense(s) => Ok(s.unitary(t)),
            Engine::Krylov { .. } => Err(Error::invalid(
                "method",
                "the full unitary needs the dense method",
            )),
        }
    }

    /// `<target|U(t)|source>`.
    pub fn amplitude(&self, source: &BitConfig, target: &BitConfig, t: f64) -> Result<C64> {
        for c in [source, target] {
            if c.n_sites() != self.n_sites() {
                return Err(Error::DimensionMismatch {
                    expected: self.n_sites(),
                    found: c.n_sites(),
                });
            }
        }
        match &self.engine {
            Engine::Dense(s) => Ok(s.amplitude(target.index(), source.index(), t)),
            Engine::Krylov { .. } => {
                let out = self.evolve(&StateVector::basis(source), t)?;
                Ok(out.amplitude(target))
            }
        }
    }
}

/// Dense propagator on the invariant subspace reachable from a set of basis
/// states. Exact for any state supported there, including after diagonal
/// (phase-flip) errors.
#[derive(Clone, Debug)]
pub struct SectorPropagator {
    n_sites: usize,
    basis: Vec<usize>,
    position: BTreeMap<usize, usize>,
    spectral: Spectral,
}

impl SectorPropagator {
    pub fn new(spec: &HamiltonianSpec, start: &[BitConfig]) -> Result<Self> {
        let indices: Vec<usize> = start.iter().map(BitConfig::index).collect();
        let basis = reachable_sector(spec, &indices)?;
        let block = realize_block(spec, &basis);
        let position = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        Ok(SectorPropagator {
            n_sites: spec.n_sites(),
            basis,
            position,
            spectral: Spectral::new(block),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Global basis indices spanning the sector, ascending.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn local_index(&self, config: &BitConfig) -> Option<usize> {
        self.position.get(&config.index()).copied()
    }

    /// `U(t)` restricted to the sector.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        self.spectral.unitary(t)
    }

    pub fn evolve_local(&self, v: &[C64], t: f64) -> Vec<C64> {
        self.spectral.evolve(v, t)
    }
}
