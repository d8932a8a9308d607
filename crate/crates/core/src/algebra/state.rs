//! Classical configurations and normalized state vectors.
//!
//! Site `i` of an `N`-site chain maps to bit `i - 1` of the basis index, least
//! significant bit first. Text forms print site 1 leftmost.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::algebra::pauli::MAX_SITES;
use crate::error::{Error, Result};

/// Tolerance on the norm of a [`StateVector`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// A classical configuration of an `N`-site chain.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitConfig {
    n_sites: usize,
    mask: u64,
}

impl BitConfig {
    pub fn zeros(n_sites: usize) -> Self {
        assert!(n_sites <= MAX_SITES, "too many sites: {n_sites}");
        BitConfig { n_sites, mask: 0 }
    }

    pub fn ones(n_sites: usize) -> Self {
        Self::from_index(n_sites, full_mask(n_sites) as usize)
    }

    /// Builds a configuration from a basis index; bits above `n_sites` must be clear.
    pub fn from_index(n_sites: usize, index: usize) -> Self {
        assert!(n_sites <= MAX_SITES, "too many sites: {n_sites}");
        assert!(
            (index as u64) & !full_mask(n_sites) == 0,
            "index {index} does not fit in {n_sites} sites"
        );
        BitConfig {
            n_sites,
            mask: index as u64,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut c = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                c.mask |= 1 << i;
            }
        }
        c
    }

    /// Single excitation at `site`.
    pub fn single(n_sites: usize, site: usize) -> Result<Self> {
        let mut c = Self::zeros(n_sites);
        c.set(site, true)?;
        Ok(c)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn index(&self) -> usize {
        self.mask as usize
    }

    pub fn get(&self, site: usize) -> bool {
        assert!(site >= 1 && site <= self.n_sites, "site {site} out of range");
        self.mask & (1 << (site - 1)) != 0
    }

    pub fn set(&mut self, site: usize, value: bool) -> Result<()> {
        if site == 0 || site > self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            });
        }
        let bit = 1u64 << (site - 1);
        if value {
            self.mask |= bit;
        } else {
            self.mask &= !bit;
        }
        Ok(())
    }

    pub fn flipped(mut self, site: usize) -> Self {
        assert!(site >= 1 && site <= self.n_sites, "site {site} out of range");
        self.mask ^= 1 << (site - 1);
        self
    }

    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Site order reversed: site `i` goes to site `N + 1 - i`.
    pub fn reversed(&self) -> Self {
        let mut out = Self::zeros(self.n_sites);
        for i in 1..=self.n_sites {
            if self.get(i) {
                out.mask |= 1 << (self.n_sites - i);
            }
        }
        out
    }

    pub fn xor(&self, other: &BitConfig) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: other.n_sites,
            });
        }
        Ok(BitConfig {
            n_sites: self.n_sites,
            mask: self.mask ^ other.mask,
        })
    }

    /// Adjacent pairs with differing bits, plus one when site `N` is set
    /// (a virtual 0 sits beyond the last site).
    pub fn domain_walls(&self) -> u32 {
        let m = self.mask;
        ((m ^ (m >> 1)) & full_mask(self.n_sites)).count_ones()
    }

    /// All `2^N` configurations in basis order.
    pub fn all(n_sites: usize) -> impl Iterator<Item = BitConfig> {
        (0..1usize << n_sites).map(move |i| BitConfig::from_index(n_sites, i))
    }
}

pub(crate) fn full_mask(n_sites: usize) -> u64 {
    if n_sites >= 64 {
        u64::MAX
    } else {
        (1u64 << n_sites) - 1
    }
}

impl fmt::Display for BitConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.n_sites {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for BitConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() > MAX_SITES {
            return Err(Error::Parse {
                what: "bit configuration",
                input: s.to_string(),
                reason: format!("expected 1..={MAX_SITES} characters"),
            });
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    what: "bit configuration",
                    input: s.to_string(),
                    reason: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitConfig::from_bits(&bits))
    }
}

/// A normalized pure state over the `2^N` computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn basis(config: &BitConfig) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << config.n_sites()];
        amplitudes[config.index()] = C64::new(1.0, 0.0);
        StateVector {
            n_sites: config.n_sites(),
            amplitudes,
        }
    }

    /// Normalizes `amplitudes`, which must have length `2^n_sites` and nonzero norm.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_len(n_sites, amplitudes.len())?;
        let norm = norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("amplitudes", format!("norm is {norm}")));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector {
            n_sites,
            amplitudes,
        })
    }

    /// Wraps amplitudes that are already normalized within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(n_sites: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_len(n_sites, amplitudes.len())?;
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(
                "amplitudes",
                format!("norm {norm} differs from 1"),
            ));
        }
        Ok(StateVector {
            n_sites,
            amplitudes,
        })
    }

    /// Haar-like random state from independent Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n_sites)
            .map(|_| C64::new(gaussian(rng), gaussian(rng)))
            .collect();
        Self::normalized(n_sites, amps).expect("gaussian vector has nonzero norm")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, config: &BitConfig) -> C64 {
        self.amplitudes[config.index()]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n_sites != other.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: other.n_sites,
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Probability that `site` reads 1.
    pub fn excitation_probability(&self, site: usize) -> f64 {
        let bit = 1usize << (site - 1);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

fn check_len(n_sites: usize, len: usize) -> Result<()> {
    if n_sites > MAX_SITES || len != 1usize << n_sites {
        return Err(Error::LengthMismatch {
            what: "state amplitudes",
            expected: 1usize << n_sites.min(MAX_SITES),
            found: len,
        });
    }
    Ok(())
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
