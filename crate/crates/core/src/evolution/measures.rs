use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::Propagator;
use crate::algebra::{BitConfig, StateVector};
use crate::basis::mirror_map;
use crate::chains::ChainFamily;
use crate::error::{Error, Result};

/// Perfect-transfer time of the engineered profile `J_n = sqrt(n (N - n))`.
///
/// The single-excitation block of the exchange chain is then `2 J_x` of a
/// spin `(N-1)/2`, whose spectrum is evenly spaced by 2, so `exp(-i H pi/2)`
/// is a rotation by `pi` that mirrors the chain for every `N >= 2`.
pub fn pst_time(n_sites: usize) -> f64 {
    debug_assert!(n_sites >= 2);
    PI / 2.0
}

/// `|<target|U(t)|source>|^2`.
pub fn transfer_fidelity(
    prop: &Propagator,
    source: &BitConfig,
    target: &BitConfig,
    t: f64,
) -> Result<f64> {
    Ok(prop.amplitude(source, target, t)?.norm_sqr())
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub t_max: f64,
    pub grid_step: f64,
    /// Width at which golden-section refinement stops.
    pub tolerance: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            t_max: 200.0,
            grid_step: 0.1,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    /// Refined maximizer.
    pub time: f64,
    pub fidelity: f64,
    /// `(t, F(t))` on the uniform grid.
    pub grid: Vec<(f64, f64)>,
}

/// Grid scan of the transfer fidelity on `[0, t_max]` followed by
/// golden-section refinement of every grid peak close to the best one. Ties
/// (within `1e-12`) go to the earliest time.
pub fn max_fidelity_scan(
    prop: &Propagator,
    source: &BitConfig,
    target: &BitConfig,
    options: &ScanOptions,
) -> Result<ScanResult> {
    if !(options.t_max > 0.0 && options.t_max.is_finite()) {
        return Err(Error::invalid("t_max", format!("{} is not positive", options.t_max)));
    }
    if !(options.grid_step > 0.0 && options.grid_step.is_finite()) {
        return Err(Error::invalid(
            "grid_step",
            format!("{} is not positive", options.grid_step),
        ));
    }
    let fidelity = |t: f64| transfer_fidelity(prop, source, target, t);
    let points = (options.t_max / options.grid_step).round() as usize;
    let grid = (0..=points)
        .map(|i| {
            let t = (i as f64 * options.grid_step).min(options.t_max);
            fidelity(t).map(|f| (t, f))
        })
        .collect::<Result<Vec<_>>>()?;

    let best_grid = grid.iter().fold(0.0f64, |m, &(_, f)| m.max(f));
    let margin = 0.05;
    let mut best = (grid[0].0, grid[0].1);
    for i in 0..grid.len() {
        let f = grid[i].1;
        let left = if i > 0 { grid[i - 1].1 } else { f64::NEG_INFINITY };
        let right = grid.get(i + 1).map_or(f64::NEG_INFINITY, |p| p.1);
        if f < left || f < right || f < best_grid - margin {
            continue;
        }
        let lo = if i > 0 { grid[i - 1].0 } else { grid[i].0 };
        let hi = grid.get(i + 1).map_or(grid[i].0, |p| p.0);
        let (t, value) = golden_section_max(&fidelity, lo, hi, options.tolerance)?;
        let (t, value) = if f > value { (grid[i].0, f) } else { (t, value) };
        // candidates arrive in time order, so near-ties keep the earlier peak
        if value > best.1 + 1e-12 {
            best = (t, value);
        }
    }
    Ok(ScanResult {
        time: best.0,
        fidelity: best.1,
        grid,
    })
}

fn golden_section_max<F>(f: &F, mut lo: f64, mut hi: f64, tolerance: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    while hi - lo > tolerance {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b)?;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((t, f(t)?))
}

/// Outcome of evolving `alpha|0...0> + beta|10...0>` under the cluster chain.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AmplificationRecord {
    pub time: f64,
    /// `|<0...0|U|0...0>|^2`.
    pub fid0: f64,
    /// `|<1...1|U|10...0>|^2`.
    pub fid1: f64,
    /// Overlap with `alpha|0...0> + e^{i phase} beta|1...1>`, maximized over `phase`.
    pub fidelity: f64,
    pub phase: f64,
}

pub fn amplification_check(
    prop: &Propagator,
    alpha: C64,
    beta: C64,
    t: f64,
) -> Result<AmplificationRecord> {
    let weight = alpha.norm_sqr() + beta.norm_sqr();
    if (weight - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(
            "alpha, beta",
            format!("|alpha|^2 + |beta|^2 = {weight}, expected 1"),
        ));
    }
    let n = prop.n_sites();
    let zeros = BitConfig::zeros(n);
    let first = BitConfig::single(n, 1)?;
    let ones = BitConfig::ones(n);
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    amps[zeros.index()] = alpha;
    amps[first.index()] += beta;
    let psi = StateVector::from_amplitudes(n, amps)?;
    let out = prop.evolve(&psi, t)?;

    let a = alpha.conj() * out.amplitude(&zeros);
    let b = beta.conj() * out.amplitude(&ones);
    let phase = if b.norm() > 1e-15 {
        wrap_phase(b.arg() - if a.norm() > 1e-15 { a.arg() } else { 0.0 })
    } else {
        0.0
    };
    Ok(AmplificationRecord {
        time: t,
        fid0: prop.amplitude(&zeros, &zeros, t)?.norm_sqr(),
        fid1: prop.amplitude(&first, &ones, t)?.norm_sqr(),
        fidelity: (a.norm() + b.norm()).powi(2),
        phase,
    })
}

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Two-excitation phase and its deviation from the sum of single phases.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PairPhase {
    pub first: usize,
    pub second: usize,
    /// `None` when the matrix element vanished and the pair was excluded.
    pub phase: Option<f64>,
    /// `phi_2(n, m) - phi_1(n) - phi_1(m)` wrapped into `(-pi, pi]`.
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseReport {
    pub family: ChainFamily,
    pub time: f64,
    /// `(site, phi_1(site))`; `None` marks a degenerate element.
    pub singles: Vec<(usize, Option<f64>)>,
    pub pairs: Vec<PairPhase>,
}

impl PhaseReport {
    fn deviations(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().filter_map(|p| p.deviation)
    }

    /// Largest `|deviation|` over the retained pairs.
    pub fn max_abs_deviation(&self) -> f64 {
        self.deviations().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// The deviation shared by every retained pair, if all agree within
    /// `tolerance` on the unit circle.
    pub fn common_deviation(&self, tolerance: f64) -> Option<f64> {
        let mut it = self.deviations();
        let first = it.next()?;
        let reference = C64::from_polar(1.0, first);
        self.deviations()
            .all(|d| (C64::from_polar(1.0, d) - reference).norm() <= tolerance)
            .then_some(first)
    }

    pub fn degenerate_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.phase.is_none()).count()
    }
}

/// Transfer phases of single excitations and of excitation pairs at time `t`.
///
/// For the exchange chain the expected image of a configuration is its
/// reversal; for the cluster chain it is [`mirror_map`], and site 1 is
/// skipped because a lone excitation there is amplified rather than moved.
pub fn phase_separability_probe(
    prop: &Propagator,
    family: ChainFamily,
    t: f64,
) -> Result<PhaseReport> {
    let n = prop.n_sites();
    let image = |b: &BitConfig| match family {
        ChainFamily::Exchange => b.reversed(),
        ChainFamily::Cluster => mirror_map(b),
    };
    let first_site = match family {
        ChainFamily::Exchange => 1,
        ChainFamily::Cluster => 2,
    };
    let phase_of = |b: &BitConfig| -> Result<Option<f64>> {
        let a = prop.amplitude(b, &image(b), t)?;
        Ok((a.norm() > 1e-6).then(|| a.arg()))
    };

    let sites: Vec<usize> = (first_site..=n).collect();
    let singles = sites
        .iter()
        .map(|&s| Ok((s, phase_of(&BitConfig::single(n, s)?)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    for (i, &(s1, p1)) in singles.iter().enumerate() {
        for &(s2, p2) in &singles[i + 1..] {
            let b = BitConfig::single(n, s1)?.flipped(s2);
            let phase = phase_of(&b)?;
            let deviation = match (phase, p1, p2) {
                (Some(p), Some(a), Some(c)) => Some(wrap_phase(p - a - c)),
                _ => None,
            };
            pairs.push(PairPhase {
                first: s1,
                second: s2,
                phase,
                deviation,
            });
        }
    }
    Ok(PhaseReport {
        family,
        time: t,
        singles,
        pairs,
    })
}
