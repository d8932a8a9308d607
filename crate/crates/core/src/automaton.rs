//! The classical cellular automaton and its comparison with continuous
//! evolution under the cluster chain.
//!
//! A half-step of parity `p` updates every site `n >= 2` with `n % 2 == p`
//! at once: bulk sites flip iff their two neighbours differ, site `N` flips
//! iff site `N - 1` is set, and site 1 never changes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::algebra::BitConfig;
use crate::basis::mirror_map;
use crate::chains::{cluster_chain, CouplingProfile};
use crate::error::{Error, Result};
use crate::evolution::{pst_time, Propagator};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn other(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn matches(self, site: usize) -> bool {
        site.is_multiple_of(2) == (self == Parity::Even)
    }
}

impl FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(Error::Parse {
                what: "parity",
                input: s.into(),
                reason: "expected even or odd".into(),
            }),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

pub fn ca_half_step(b: &BitConfig, parity: Parity) -> BitConfig {
    let n = b.n_sites();
    let mut out = *b;
    for site in (2..=n).filter(|&s| parity.matches(s)) {
        let flip = if site == n {
            b.get(n - 1)
        } else {
            b.get(site - 1) != b.get(site + 1)
        };
        if flip {
            out = out.flipped(site);
        }
    }
    out
}

/// Trajectory of alternating half-steps.
#[derive(Clone, Debug, PartialEq)]
pub struct CaRun {
    pub initial: BitConfig,
    pub half_steps: Vec<Parity>,
    pub trajectory: Vec<BitConfig>,
}

impl CaRun {
    pub fn last(&self) -> &BitConfig {
        self.trajectory.last().expect("trajectory holds the initial state")
    }
}

pub fn ca_run(b: &BitConfig, half_steps: usize, start: Parity) -> CaRun {
    let mut parity = start;
    let mut parities = Vec::with_capacity(half_steps);
    let mut trajectory = Vec::with_capacity(half_steps + 1);
    trajectory.push(*b);
    for _ in 0..half_steps {
        let next = ca_half_step(trajectory.last().unwrap(), parity);
        trajectory.push(next);
        parities.push(parity);
        parity = parity.other();
    }
    CaRun {
        initial: *b,
        half_steps: parities,
        trajectory,
    }
}

/// Half-step budget when searching a trajectory.
pub fn step_cap(n_sites: usize) -> usize {
    4 * n_sites
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaComparisonRow {
    pub input: BitConfig,
    /// Most probable basis state after evolving for the transfer time.
    pub continuous_output: BitConfig,
    pub continuous_prob: f64,
    pub mirror_output: BitConfig,
    pub agree: bool,
    /// First half-step at which the canonical run reaches `mirror_output`.
    pub ca_hit_step: Option<usize>,
    /// The run hit the step cap before revisiting a configuration.
    pub cap_exceeded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaComparisonReport {
    pub n_sites: usize,
    pub time: f64,
    pub rows: Vec<CaComparisonRow>,
}

impl CaComparisonReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.agree)
    }

    pub fn min_continuous_prob(&self) -> f64 {
        self.rows.iter().fold(1.0, |m, r| m.min(r.continuous_prob))
    }
}

/// Compares, for every configuration of the chain, continuous evolution at the
/// transfer time, the mirror map and the canonical (even-first) automaton run.
/// Rows are in basis order.
pub fn ca_vs_hamiltonian_report(profile: &CouplingProfile) -> Result<CaComparisonReport> {
    let n = profile.n_sites();
    let prop = Propagator::dense(&cluster_chain(profile)?)?;
    let time = pst_time(n);
    let u = prop.unitary(time)?;
    let rows = BitConfig::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|input| {
            let column = u.column(input.index());
            let (best, prob) = column
                .iter()
                .enumerate()
                .map(|(i, a)| (i, a.norm_sqr()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let continuous_output = BitConfig::from_index(n, best);
            let mirror_output = mirror_map(&input);
            let (ca_hit_step, cap_exceeded) = search_trajectory(&input, &mirror_output);
            CaComparisonRow {
                input,
                continuous_output,
                continuous_prob: prob,
                mirror_output,
                agree: continuous_output == mirror_output,
                ca_hit_step,
                cap_exceeded,
            }
        })
        .collect();
    Ok(CaComparisonReport { n_sites: n, time, rows })
}

fn search_trajectory(input: &BitConfig, wanted: &BitConfig) -> (Option<usize>, bool) {
    let cap = step_cap(input.n_sites());
    let mut seen = std::collections::HashSet::new();
    let mut current = *input;
    let mut parity = Parity::Even;
    for step in 0..=cap {
        if current == *wanted {
            return (Some(step), false);
        }
        // the state alone does not fix the next move, the parity does too
        if !seen.insert((current, parity)) {
            return (None, false);
        }
        current = ca_half_step(&current, parity);
        parity = parity.other();
    }
    (None, true)
}
