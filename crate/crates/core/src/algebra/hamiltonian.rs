use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::pauli::{PauliString, PauliTerm, MAX_SITES};
use crate::algebra::state::StateVector;
use crate::error::{Error, Result};

/// Default largest site count for dense realization.
pub const DENSE_CAP: usize = 12;

/// Largest site count for matrix-free and sparse work.
pub const SPARSE_CAP: usize = 24;

/// A real-weighted sum of Pauli strings on `n_sites` sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct HamiltonianSpec {
    n_sites: usize,
    terms: Vec<PauliTerm>,
}

impl HamiltonianSpec {
    pub fn new(n_sites: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::invalid(
                "n_sites",
                format!("{n_sites} is outside 1..={MAX_SITES}"),
            ));
        }
        for t in &terms {
            let site = t.string().max_site();
            if site > n_sites {
                return Err(Error::SiteOutOfRange { site, n_sites });
            }
        }
        Ok(HamiltonianSpec { n_sites, terms })
    }

    pub fn empty(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, Vec::new())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        let site = term.string().max_site();
        if site > self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            });
        }
        self.terms.push(term);
        Ok(())
    }

    /// Appends every term of `other`, which must live on the same number of sites.
    pub fn extend(&mut self, other: &HamiltonianSpec) -> Result<()> {
        if other.n_sites != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: other.n_sites,
            });
        }
        self.terms.extend_from_slice(&other.terms);
        Ok(())
    }

    /// Merges repeated strings by adding coefficients, drops terms that
    /// cancel, and sorts terms by string.
    pub fn canonical(&self) -> HamiltonianSpec {
        let mut merged: BTreeMap<PauliString, (f64, f64)> = BTreeMap::new();
        for t in &self.terms {
            let e = merged.entry(*t.string()).or_insert((0.0, 0.0));
            e.0 += t.coefficient();
            e.1 = e.1.max(t.coefficient().abs());
        }
        let terms = merged
            .into_iter()
            .filter(|(_, (c, scale))| c.abs() > 1e-14 * scale)
            .map(|(s, (c, _))| PauliTerm::new(c, s).expect("finite nonzero coefficient"))
            .collect();
        HamiltonianSpec {
            n_sites: self.n_sites,
            terms,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.terms
            .windows(2)
            .all(|w| w[0].string() < w[1].string())
    }

    /// Summed coefficient of `string`, 0 if absent.
    pub fn coefficient_of(&self, string: &PauliString) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string() == string)
            .map(|t| t.coefficient())
            .sum()
    }

    /// Largest coefficient difference between the canonical forms of two specs.
    pub fn max_coefficient_difference(&self, other: &HamiltonianSpec) -> f64 {
        let mut diff: BTreeMap<PauliString, f64> = BTreeMap::new();
        for t in self.canonical().terms {
            *diff.entry(*t.string()).or_default() += t.coefficient();
        }
        for t in other.canonical().terms {
            *diff.entry(*t.string()).or_default() -= t.coefficient();
        }
        diff.values().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Result<HamiltonianSpec> {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm::new(t.coefficient() * factor, *t.string()))
            .collect::<Result<_>>()?;
        Ok(HamiltonianSpec {
            n_sites: self.n_sites,
            terms,
        })
    }

    pub(crate) fn compile(&self) -> Vec<CompiledTerm> {
        self.canonical()
            .terms
            .iter()
            .map(|t| CompiledTerm {
                flip: t.string().x_mask() as usize,
                sign: t.string().z_mask() as usize,
                weight: crate::algebra::pauli::i_power(t.string().y_count()) * t.coefficient(),
            })
            .collect()
    }
}

impl fmt::Display for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} sites]", self.n_sites)?;
        for t in &self.terms {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n_sites: usize,
    terms: Vec<PauliTerm>,
}

impl TryFrom<RawSpec> for HamiltonianSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        HamiltonianSpec::new(raw.n_sites, raw.terms)
    }
}

impl From<HamiltonianSpec> for RawSpec {
    fn from(s: HamiltonianSpec) -> Self {
        RawSpec {
            n_sites: s.n_sites,
            terms: s.terms,
        }
    }
}

/// A Pauli term prepared for matrix-free application:
/// `P|b> = weight * (-1)^{popcount(b & sign)} |b ^ flip>`.
#[derive(Copy, Clone, Debug)]
pub(crate) struct CompiledTerm {
    pub flip: usize,
    pub sign: usize,
    pub weight: C64,
}

impl CompiledTerm {
    #[inline]
    pub fn act(&self, b: usize) -> (usize, C64) {
        let w = if (b & self.sign).count_ones().is_multiple_of(2) {
            self.weight
        } else {
            -self.weight
        };
        (b ^ self.flip, w)
    }
}

/// `out = H * input` for a compiled term list. `out` is overwritten.
pub(crate) fn apply_compiled(terms: &[CompiledTerm], input: &[C64], out: &mut [C64]) {
    out.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
    for term in terms {
        for (b, &amp) in input.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let (row, w) = term.act(b);
            out[row] += w * amp;
        }
    }
}

fn check_sites(spec: &HamiltonianSpec, psi: &StateVector) -> Result<()> {
    if spec.n_sites() != psi.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_sites(),
            found: psi.n_sites(),
        });
    }
    Ok(())
}

/// Matrix-free `H|psi>`. The result is not normalized.
pub fn apply_spec(spec: &HamiltonianSpec, psi: &StateVector) -> Result<Vec<C64>> {
    check_sites(spec, psi)?;
    apply_spec_raw(spec, psi.amplitudes())
}

/// `H v` for an arbitrary amplitude vector of length `2^N`.
pub fn apply_spec_raw(spec: &HamiltonianSpec, v: &[C64]) -> Result<Vec<C64>> {
    if v.len() != 1usize << spec.n_sites() {
        return Err(Error::LengthMismatch {
            what: "amplitude vector",
            expected: 1usize << spec.n_sites(),
            found: v.len(),
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    apply_compiled(&spec.compile(), v, &mut out);
    Ok(out)
}

/// `<psi|H|psi>`, after checking that the imaginary part vanishes.
pub fn expectation(spec: &HamiltonianSpec, psi: &StateVector) -> Result<f64> {
    let h_psi = apply_spec(spec, psi)?;
    let value: C64 = psi
        .amplitudes()
        .iter()
        .zip(&h_psi)
        .map(|(a, b)| a.conj() * b)
        .sum();
    if value.im.abs() >= 1e-10 {
        return Err(Error::invalid(
            "expectation",
            format!("imaginary part {:e} is not negligible", value.im),
        ));
    }
    Ok(value.re)
}

/// Dense matrix of `spec`, subject to [`DENSE_CAP`].
pub fn realize_dense(spec: &HamiltonianSpec) -> Result<DMatrix<C64>> {
    realize_dense_with_cap(spec, DENSE_CAP)
}

pub fn realize_dense_with_cap(spec: &HamiltonianSpec, cap: usize) -> Result<DMatrix<C64>> {
    if spec.n_sites() > cap {
        return Err(Error::TooLargeForDense {
            n_sites: spec.n_sites(),
            cap,
        });
    }
    let dim = 1usize << spec.n_sites();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for term in spec.compile() {
        for col in 0..dim {
            let (row, w) = term.act(col);
            m[(row, col)] += w;
        }
    }
    Ok(m)
}

/// Column-compressed sparse matrix over the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    columns: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nonzero entries `(row, value)` of `col`, sorted by row.
    pub fn column(&self, col: usize) -> &[(usize, C64)] {
        &self.columns[col]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.columns[col]
            .binary_search_by_key(&row, |&(r, _)| r)
            .map(|i| self.columns[col][i].1)
            .unwrap_or_default()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for &(k, v) in col {
                    for &(r, w) in &self.columns[k] {
                        *acc.entry(r).or_default() += w * v;
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        SparseMatrix {
            dim: self.dim,
            columns,
        }
    }

    /// Largest `|A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut worst = 0.0f64;
        for (a, b) in self.columns.iter().zip(&other.columns) {
            let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
            for &(r, v) in a {
                *acc.entry(r).or_default() += v;
            }
            for &(r, v) in b {
                *acc.entry(r).or_default() -= v;
            }
            worst = acc.values().fold(worst, |m, d| m.max(d.norm()));
        }
        worst
    }

    /// `max_ij |[A, B]_ij|`.
    pub fn commutator_max_abs(&self, other: &SparseMatrix) -> f64 {
        self.mul(other).max_abs_diff(&other.mul(self))
    }
}

/// Sparse matrix of `spec`; entries that cancel exactly are dropped.
pub fn realize_sparse(spec: &HamiltonianSpec) -> Result<SparseMatrix> {
    if spec.n_sites() > SPARSE_CAP {
        return Err(Error::invalid(
            "n_sites",
            format!("{} exceeds the sparse cap of {SPARSE_CAP}", spec.n_sites()),
        ));
    }
    let dim = 1usize << spec.n_sites();
    let compiled = spec.compile();
    let columns = (0..dim)
        .map(|col| column_entries(&compiled, col))
        .collect();
    Ok(SparseMatrix { dim, columns })
}

fn column_entries(compiled: &[CompiledTerm], col: usize) -> Vec<(usize, C64)> {
    let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
    for term in compiled {
        let (row, w) = term.act(col);
        *acc.entry(row).or_default() += w;
    }
    acc.into_iter().filter(|(_, v)| v.norm() > 1e-14).collect()
}

/// Basis indices reachable from `start` through nonzero matrix elements of
/// `spec`, in increasing order. The span of these states is invariant under
/// `spec` and under any diagonal operator.
pub fn reachable_sector(spec: &HamiltonianSpec, start: &[usize]) -> Result<Vec<usize>> {
    if spec.n_sites() > SPARSE_CAP {
        return Err(Error::invalid(
            "n_sites",
            format!("{} exceeds the sparse cap of {SPARSE_CAP}", spec.n_sites()),
        ));
    }
    let dim = 1usize << spec.n_sites();
    let compiled = spec.compile();
    let mut seen = std::collections::BTreeSet::new();
    let mut stack = Vec::new();
    for &s in start {
        if s >= dim {
            return Err(Error::invalid("start", format!("index {s} out of range")));
        }
        if seen.insert(s) {
            stack.push(s);
        }
    }
    while let Some(b) = stack.pop() {
        for (row, _) in column_entries(&compiled, b) {
            if seen.insert(row) {
                stack.push(row);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Dense block of `spec` restricted to the listed basis states.
pub fn realize_block(spec: &HamiltonianSpec, basis: &[usize]) -> DMatrix<C64> {
    let compiled = spec.compile();
    let position: BTreeMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    for (j, &b) in basis.iter().enumerate() {
        for (row, v) in column_entries(&compiled, b) {
            if let Some(&i) = position.get(&row) {
                m[(i, j)] += v;
            }
        }
    }
    m
}

/// `max_ij |M_ij - M_ji^*|`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max_ij |A_ij - B_ij|`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}
