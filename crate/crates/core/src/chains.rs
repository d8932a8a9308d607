//! Builders for the chain Hamiltonians: the exchange chain, the cluster-like
//! amplification chain, their field terms, coupling profiles and the star.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{HamiltonianSpec, Pauli, PauliTerm, DENSE_CAP, MAX_SITES};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Uniform,
    Engineered,
    Custom,
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ProfileKind::Uniform),
            "engineered" => Ok(ProfileKind::Engineered),
            "custom" => Ok(ProfileKind::Custom),
            _ => Err(Error::Parse {
                what: "profile kind",
                input: s.to_string(),
                reason: "expected uniform, engineered or custom".into(),
            }),
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Uniform => "uniform",
            ProfileKind::Engineered => "engineered",
            ProfileKind::Custom => "custom",
        })
    }
}

/// Nearest-neighbour couplings `J_1..J_{N-1}` and optional fields `B_1..B_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct CouplingProfile {
    n_sites: usize,
    couplings: Vec<f64>,
    fields: Option<Vec<f64>>,
    kind: ProfileKind,
}

impl CouplingProfile {
    /// All `J_n = 1`.
    pub fn uniform(n_sites: usize) -> Result<Self> {
        check_chain_length(n_sites)?;
        Ok(CouplingProfile {
            n_sites,
            couplings: vec![1.0; n_sites - 1],
            fields: None,
            kind: ProfileKind::Uniform,
        })
    }

    /// `J_n = sqrt(n (N - n))`, the mirror-symmetric profile with perfect
    /// transfer at `t = pi/2`.
    pub fn engineered(n_sites: usize) -> Result<Self> {
        check_chain_length(n_sites)?;
        let couplings = (1..n_sites)
            .map(|n| ((n * (n_sites - n)) as f64).sqrt())
            .collect();
        Ok(CouplingProfile {
            n_sites,
            couplings,
            fields: None,
            kind: ProfileKind::Engineered,
        })
    }

    pub fn custom(couplings: Vec<f64>, fields: Option<Vec<f64>>) -> Result<Self> {
        let n_sites = couplings.len() + 1;
        check_chain_length(n_sites)?;
        let p = CouplingProfile {
            n_sites,
            couplings,
            fields: None,
            kind: ProfileKind::Custom,
        };
        match fields {
            Some(f) => p.with_fields(f),
            None => p.validated(),
        }
    }

    pub fn of_kind(kind: ProfileKind, n_sites: usize) -> Result<Self> {
        match kind {
            ProfileKind::Uniform => Self::uniform(n_sites),
            ProfileKind::Engineered => Self::engineered(n_sites),
            ProfileKind::Custom => Err(Error::invalid(
                "profile",
                "a custom profile needs explicit couplings",
            )),
        }
    }

    pub fn with_fields(mut self, fields: Vec<f64>) -> Result<Self> {
        if fields.len() != self.n_sites {
            return Err(Error::LengthMismatch {
                what: "fields",
                expected: self.n_sites,
                found: fields.len(),
            });
        }
        self.fields = Some(fields);
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        let values = self.couplings.iter().chain(self.fields.iter().flatten());
        if let Some(bad) = values.copied().find(|v| !v.is_finite()) {
            return Err(Error::invalid("profile", format!("non-finite value {bad}")));
        }
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> Option<&[f64]> {
        self.fields.as_deref()
    }

    /// `J_n` with the convention `J_0 = J_N = 0`.
    pub fn coupling(&self, n: usize) -> f64 {
        if n == 0 || n >= self.n_sites {
            0.0
        } else {
            self.couplings[n - 1]
        }
    }

    /// A copy with `J_n` replaced; used to build negative controls.
    pub fn with_coupling(&self, n: usize, value: f64) -> Result<Self> {
        if n == 0 || n >= self.n_sites {
            return Err(Error::SiteOutOfRange {
                site: n,
                n_sites: self.n_sites - 1,
            });
        }
        let mut p = self.clone();
        p.couplings[n - 1] = value;
        p.kind = ProfileKind::Custom;
        p.validated()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    // inferred from the couplings when absent
    #[serde(default)]
    n_sites: Option<usize>,
    couplings: Vec<f64>,
    #[serde(default)]
    fields: Option<Vec<f64>>,
    #[serde(default = "custom_kind")]
    kind: ProfileKind,
}

fn custom_kind() -> ProfileKind {
    ProfileKind::Custom
}

impl TryFrom<RawProfile> for CouplingProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        let n_sites = raw.n_sites.unwrap_or(raw.couplings.len() + 1);
        check_chain_length(n_sites)?;
        if raw.couplings.len() != n_sites - 1 {
            return Err(Error::LengthMismatch {
                what: "couplings",
                expected: n_sites - 1,
                found: raw.couplings.len(),
            });
        }
        let p = CouplingProfile {
            n_sites,
            couplings: raw.couplings,
            fields: None,
            kind: raw.kind,
        };
        match raw.fields {
            Some(f) => p.with_fields(f),
            None => p.validated(),
        }
    }
}

impl From<CouplingProfile> for RawProfile {
    fn from(p: CouplingProfile) -> Self {
        RawProfile {
            n_sites: Some(p.n_sites),
            couplings: p.couplings,
            fields: p.fields,
            kind: p.kind,
        }
    }
}

fn check_chain_length(n_sites: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::TooFewSites { n_sites, min: 2 });
    }
    if n_sites > MAX_SITES {
        return Err(Error::invalid(
            "n_sites",
            format!("{n_sites} exceeds {MAX_SITES}"),
        ));
    }
    Ok(())
}

fn push(spec: &mut HamiltonianSpec, coeff: f64, letters: &[(usize, Pauli)]) -> Result<()> {
    // zero couplings simply contribute nothing
    if coeff != 0.0 {
        spec.push(PauliTerm::from_letters(coeff, letters.iter().copied())?)?;
    }
    Ok(())
}

/// `H_ex = 1/2 sum_n J_n (X_n X_{n+1} + Y_n Y_{n+1}) + sum_n B_n Z_n`.
pub fn exchange_chain(profile: &CouplingProfile) -> Result<HamiltonianSpec> {
    let n_sites = profile.n_sites();
    let mut spec = HamiltonianSpec::empty(n_sites)?;
    for n in 1..n_sites {
        let half = profile.coupling(n) / 2.0;
        push(&mut spec, half, &[(n, Pauli::X), (n + 1, Pauli::X)])?;
        push(&mut spec, half, &[(n, Pauli::Y), (n + 1, Pauli::Y)])?;
    }
    if let Some(fields) = profile.fields() {
        for (i, &b) in fields.iter().enumerate() {
            push(&mut spec, b, &[(i + 1, Pauli::Z)])?;
        }
    }
    Ok(spec)
}

/// `H = sum_{n=2}^{N} J_{n-1} K_n` with `K_n = (X_n - Z_{n-1} X_n Z_{n+1}) / 2`
/// in the bulk and `K_N = (1 - Z_{N-1}) X_N / 2` at the end. Site 1 is never
/// flipped. When the profile carries fields, the image of the exchange
/// fields ([`cluster_field_terms`]) is appended.
pub fn cluster_chain(profile: &CouplingProfile) -> Result<HamiltonianSpec> {
    let n_sites = profile.n_sites();
    let mut spec = HamiltonianSpec::empty(n_sites)?;
    for n in 2..=n_sites {
        let half = profile.coupling(n - 1) / 2.0;
        push(&mut spec, half, &[(n, Pauli::X)])?;
        if n < n_sites {
            push(
                &mut spec,
                -half,
                &[(n - 1, Pauli::Z), (n, Pauli::X), (n + 1, Pauli::Z)],
            )?;
        } else {
            push(&mut spec, -half, &[(n - 1, Pauli::Z), (n, Pauli::X)])?;
        }
    }
    if let Some(fields) = profile.fields() {
        spec.extend(&cluster_field_terms(fields)?)?;
    }
    Ok(spec)
}

/// The exchange fields `sum B_n Z_n` carried through the CNOT ladder:
/// `sum_{n<N} B_n Z_n Z_{n+1} + B_N Z_N`.
pub fn cluster_field_terms(fields: &[f64]) -> Result<HamiltonianSpec> {
    let n_sites = fields.len();
    if n_sites == 0 {
        return Err(Error::LengthMismatch {
            what: "fields",
            expected: 1,
            found: 0,
        });
    }
    let mut spec = HamiltonianSpec::empty(n_sites)?;
    for (i, &b) in fields.iter().enumerate() {
        let n = i + 1;
        if n < n_sites {
            push(&mut spec, b, &[(n, Pauli::Z), (n + 1, Pauli::Z)])?;
        } else {
            push(&mut spec, b, &[(n, Pauli::Z)])?;
        }
    }
    Ok(spec)
}

/// Local-field alternative `B'_n = B_{n-1} - B_n` with `B_0 = 0`.
///
/// Only the single-excitation dynamics carries over: on the tilde states the
/// resulting diagonal is the exchange one reflected about a constant, which
/// leaves transfer probabilities unchanged.
pub fn field_difference(fields: &[f64]) -> Vec<f64> {
    fields
        .iter()
        .enumerate()
        .map(|(i, &b)| if i == 0 { -b } else { fields[i - 1] - b })
        .collect()
}

/// `sum_n B_n Z_n`.
pub fn local_field_terms(fields: &[f64]) -> Result<HamiltonianSpec> {
    let mut spec = HamiltonianSpec::empty(fields.len())?;
    for (i, &b) in fields.iter().enumerate() {
        push(&mut spec, b, &[(i + 1, Pauli::Z)])?;
    }
    Ok(spec)
}

/// `sum_{n<N} Z_n Z_{n+1} + Z_N`, the conserved domain-wall observable of the
/// cluster chain.
pub fn wall_observable(n_sites: usize) -> Result<HamiltonianSpec> {
    cluster_field_terms(&vec![1.0; n_sites])
}

/// Which chain Hamiltonian to build from a profile.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainFamily {
    Cluster,
    Exchange,
}

impl ChainFamily {
    pub fn build(self, profile: &CouplingProfile) -> Result<HamiltonianSpec> {
        match self {
            ChainFamily::Cluster => cluster_chain(profile),
            ChainFamily::Exchange => exchange_chain(profile),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ChainFamily::Cluster => "cluster",
            ChainFamily::Exchange => "exchange",
        }
    }
}

impl FromStr for ChainFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cluster" => Ok(ChainFamily::Cluster),
            "exchange" => Ok(ChainFamily::Exchange),
            _ => Err(Error::Parse {
                what: "Hamiltonian family",
                input: s.to_string(),
                reason: "expected cluster or exchange".into(),
            }),
        }
    }
}

impl fmt::Display for ChainFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `R` cluster chains of `L` sites sharing their first site.
///
/// Global numbering: the center is site 1; spike `r` (0-based) owns sites
/// `2 + r (L-1) ..= 1 + (r+1)(L-1)`, ordered outward.
#[derive(Clone, Debug, PartialEq)]
pub struct StarLayout {
    spikes: usize,
    spike_length: usize,
    profile: CouplingProfile,
}

impl StarLayout {
    pub fn new(spikes: usize, profile: CouplingProfile) -> Result<Self> {
        if spikes == 0 {
            return Err(Error::invalid("spikes", "need at least one spike"));
        }
        let spike_length = profile.n_sites();
        let total = spikes * (spike_length - 1) + 1;
        if total > MAX_SITES {
            return Err(Error::invalid(
                "spikes",
                format!("{total} sites exceeds {MAX_SITES}"),
            ));
        }
        Ok(StarLayout {
            spikes,
            spike_length,
            profile,
        })
    }

    pub fn spikes(&self) -> usize {
        self.spikes
    }

    pub fn spike_length(&self) -> usize {
        self.spike_length
    }

    pub fn profile(&self) -> &CouplingProfile {
        &self.profile
    }

    pub fn n_sites(&self) -> usize {
        self.spikes * (self.spike_length - 1) + 1
    }

    /// Global site of local site `k` (1-based) on spike `r`.
    pub fn global_site(&self, spike: usize, k: usize) -> usize {
        assert!(spike < self.spikes && (1..=self.spike_length).contains(&k));
        if k == 1 {
            1
        } else {
            1 + spike * (self.spike_length - 1) + (k - 1)
        }
    }

    /// Cluster chain of one spike, embedded in the full star.
    pub fn spike_hamiltonian(&self, spike: usize) -> Result<HamiltonianSpec> {
        let local = cluster_chain(&self.profile)?;
        let mut spec = HamiltonianSpec::empty(self.n_sites())?;
        for t in local.terms() {
            let letters = t
                .string()
                .letters()
                .map(|(k, l)| (self.global_site(spike, k), l));
            spec.push(PauliTerm::from_letters(t.coefficient(), letters)?)?;
        }
        Ok(spec)
    }
}

/// Sum of every spike Hamiltonian; fails past the dense cap.
pub fn star_hamiltonian(layout: &StarLayout) -> Result<HamiltonianSpec> {
    if layout.n_sites() > DENSE_CAP {
        return Err(Error::TooLargeForDense {
            n_sites: layout.n_sites(),
            cap: DENSE_CAP,
        });
    }
    let mut spec = HamiltonianSpec::empty(layout.n_sites())?;
    for r in 0..layout.spikes() {
        spec.extend(&layout.spike_hamiltonian(r)?)?;
    }
    Ok(spec)
}
