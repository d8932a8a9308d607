//! Pauli strings and weighted Pauli terms.
//!
//! A [`PauliString`] stores its letters as two bitmasks, `x` and `z`, where
//! site `i` (1-based) lives in bit `i - 1`. `X` sets the x bit, `Z` the z bit
//! and `Y` both. The string always denotes the Hermitian product of the
//! letters, so `Y` means the Pauli `Y` matrix and not `XZ`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of sites a Pauli string can address.
pub const MAX_SITES: usize = 63;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            _ => Err(Error::Parse {
                what: "Pauli letter",
                input: s.to_string(),
                reason: "expected one of X, Y, Z".into(),
            }),
        }
    }
}

/// A tensor product of single-site Paulis; absent sites carry the identity.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn from_masks(x: u64, z: u64) -> Self {
        PauliString { x, z }
    }

    pub fn single(site: usize, letter: Pauli) -> Result<Self> {
        Self::from_letters([(site, letter)])
    }

    /// Builds a string from `(site, letter)` pairs. Sites are 1-based and may
    /// appear only once.
    pub fn from_letters(letters: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut s = PauliString::IDENTITY;
        for (site, letter) in letters {
            if site == 0 || site > MAX_SITES {
                return Err(Error::SiteOutOfRange {
                    site,
                    n_sites: MAX_SITES,
                });
            }
            let bit = 1u64 << (site - 1);
            if s.support() & bit != 0 {
                return Err(Error::invalid(
                    "letters",
                    format!("site {site} appears more than once"),
                ));
            }
            let (x, z) = letter.bits();
            if x {
                s.x |= bit;
            }
            if z {
                s.z |= bit;
            }
        }
        Ok(s)
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Highest site touched, or 0 for the identity.
    pub fn max_site(&self) -> usize {
        64 - self.support().leading_zeros() as usize
    }

    pub fn letter(&self, site: usize) -> Option<Pauli> {
        if site == 0 || site > 64 {
            return None;
        }
        let bit = 1u64 << (site - 1);
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn with_letter(mut self, site: usize, letter: Option<Pauli>) -> Self {
        let bit = 1u64 << (site - 1);
        self.x &= !bit;
        self.z &= !bit;
        if let Some(l) = letter {
            let (x, z) = l.bits();
            if x {
                self.x |= bit;
            }
            if z {
                self.z |= bit;
            }
        }
        self
    }

    /// Non-identity letters in increasing site order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        let support = self.support();
        (0..64)
            .filter(move |b| support & (1u64 << b) != 0)
            .map(move |b| (b + 1, self.letter(b + 1).expect("site in support")))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    pub fn apply_to_basis(&self, b: usize) -> (usize, C64) {
        let b = b as u64;
        let sign = if (b & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        ((b ^ self.x) as usize, i_power(self.y_count()) * sign)
    }
}

/// `i^k`.
pub(crate) fn i_power(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (site, letter) in self.letters() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{letter}{site}")?;
            first = false;
        }
        Ok(())
    }
}

/// Parses the display form, e.g. `"X1 Z2 Y4"` or `"I"`.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "I" {
            return Ok(PauliString::IDENTITY);
        }
        let err = |reason: &str| Error::Parse {
            what: "Pauli string",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let letters = s
            .split_whitespace()
            .map(|tok| {
                let letter = tok.get(..1).ok_or_else(|| err("empty token"))?.parse::<Pauli>()?;
                let site = tok[1..]
                    .parse::<usize>()
                    .map_err(|_| err("expected a letter followed by a site number"))?;
                Ok((site, letter))
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(err("empty string"));
        }
        PauliString::from_letters(letters)
    }
}

/// A real coefficient times a Pauli string.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTerm", into = "RawTerm")]
pub struct PauliTerm {
    coefficient: f64,
    string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Result<Self> {
        if !coefficient.is_finite() || coefficient == 0.0 {
            return Err(Error::InvalidCoefficient(coefficient));
        }
        Ok(PauliTerm {
            coefficient,
            string,
        })
    }

    /// Convenience constructor from `(site, letter)` pairs.
    pub fn from_letters(
        coefficient: f64,
        letters: impl IntoIterator<Item = (usize, Pauli)>,
    ) -> Result<Self> {
        Self::new(coefficient, PauliString::from_letters(letters)?)
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn string(&self) -> &PauliString {
        &self.string
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}*{}", self.coefficient, self.string)
    }
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    coeff: f64,
    letters: BTreeMap<usize, Pauli>,
}

impl TryFrom<RawTerm> for PauliTerm {
    type Error = Error;

    fn try_from(raw: RawTerm) -> Result<Self> {
        PauliTerm::from_letters(raw.coeff, raw.letters)
    }
}

impl From<PauliTerm> for RawTerm {
    fn from(t: PauliTerm) -> Self {
        RawTerm {
            coeff: t.coefficient,
            letters: t.string.letters().collect(),
        }
    }
}
