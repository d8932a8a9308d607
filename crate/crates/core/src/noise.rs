//! Monte Carlo dephasing during state transfer.
//!
//! The transfer time is cut into `steps` equal segments. After each segment
//! one Bernoulli(`p`) draw decides whether a `Z` error hits a site chosen
//! uniformly from all `N` sites. Every step draws both numbers whether or not
//! a flip happens, so a trial sees the same stream at every `p` and flip
//! events at larger `p` contain those at smaller `p`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::BitConfig;
use crate::error::{Error, Result};
use crate::evolution::{Propagator, SectorPropagator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub p: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_steps() -> usize {
    25
}

fn default_trials() -> usize {
    10_000
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            p: 0.0,
            steps: default_steps(),
            trials: default_trials(),
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", format!("{} is outside [0, 1]", self.p)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }
}

/// Where in each segment the error is applied; recorded with every result.
pub const ERROR_PLACEMENT: &str = "after-segment";

/// Per-trial random stream, fixed by `(seed, trial)` alone.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One noisy transfer setup: a chain, a source configuration and the site
/// whose excitation probability is read out.
#[derive(Clone, Debug)]
pub struct DephasingModel {
    sector: SectorPropagator,
    segment: DMatrix<C64>,
    source_local: usize,
    /// `Z_k` eigenvalues on the sector basis, one vector per site.
    z_signs: Vec<Vec<f64>>,
    readout: Vec<bool>,
    steps: usize,
    total_time: f64,
    measure_site: usize,
}

impl DephasingModel {
    pub fn new(
        prop: &Propagator,
        source: &BitConfig,
        measure_site: usize,
        total_time: f64,
        steps: usize,
    ) -> Result<Self> {
        let n = prop.n_sites();
        if source.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: source.n_sites(),
            });
        }
        if measure_site == 0 || measure_site > n {
            return Err(Error::SiteOutOfRange {
                site: measure_site,
                n_sites: n,
            });
        }
        if steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::invalid(
                "total_time",
                format!("{total_time} is not positive"),
            ));
        }
        let sector = SectorPropagator::new(prop.spec(), &[*source])?;
        let segment = sector.unitary(total_time / steps as f64);
        let source_local = sector.local_index(source).expect("source spans its own sector");
        let z_signs = (0..n)
            .map(|k| {
                sector
                    .basis()
                    .iter()
                    .map(|&b| if b & (1 << k) == 0 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        let readout = sector
            .basis()
            .iter()
            .map(|&b| b & (1 << (measure_site - 1)) != 0)
            .collect();
        Ok(DephasingModel {
            sector,
            segment,
            source_local,
            z_signs,
            readout,
            steps,
            total_time,
            measure_site,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.sector.n_sites()
    }

    pub fn measure_site(&self) -> usize {
        self.measure_site
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn sector_dim(&self) -> usize {
        self.sector.basis().len()
    }

    /// Final state of one trial on the sector basis.
    pub fn trial_state<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Vec<C64> {
        let n = self.n_sites();
        let mut psi = nalgebra::DVector::<C64>::zeros(self.sector_dim());
        psi[self.source_local] = C64::new(1.0, 0.0);
        for _ in 0..self.steps {
            psi = &self.segment * psi;
            let u: f64 = rng.random();
            let site = rng.random_range(0..n);
            if u < p {
                for (a, s) in psi.iter_mut().zip(&self.z_signs[site]) {
                    *a *= *s;
                }
            }
        }
        psi.iter().copied().collect()
    }

    /// Probability that the readout site is excited at the end of one trial.
    pub fn trial<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> f64 {
        self.trial_state(p, rng)
            .iter()
            .zip(&self.readout)
            .filter(|(_, &r)| r)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }
}

/// One trial under `cfg.p` with the stream for trial index `trial`.
pub fn dephasing_trial(model: &DephasingModel, cfg: &NoiseConfig, trial: u64) -> Result<f64> {
    cfg.validate()?;
    if cfg.steps != model.steps() {
        return Err(Error::invalid(
            "steps",
            format!("model has {} segments, config asks for {}", model.steps(), cfg.steps),
        ));
    }
    Ok(model.trial(cfg.p, &mut trial_rng(cfg.seed, trial)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub hamiltonian: String,
    pub p: f64,
    pub mean_fidelity: f64,
    pub standard_error: f64,
    pub trials: usize,
    pub seed: u64,
    pub source_site: usize,
    pub target_site: usize,
    pub steps: usize,
    pub error_placement: String,
}

/// Mean and standard error of `cfg.trials` trials. Trials run in parallel;
/// the sum is reduced in trial order so the result does not depend on scheduling.
pub fn run_trials(model: &DephasingModel, cfg: &NoiseConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let values: Vec<f64> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| model.trial(cfg.p, &mut trial_rng(cfg.seed, i)))
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / n).sqrt()))
}

/// A labelled transfer setup taking part in a sweep.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub label: String,
    pub source_site: usize,
    pub model: DephasingModel,
}

/// One record per `(entry, p)`, grouped by `p` in grid order. Every entry at
/// a given `p` uses the same seed, so they share random streams.
pub fn noise_sweep(
    entries: &[SweepEntry],
    p_grid: &[f64],
    base: &NoiseConfig,
) -> Result<Vec<RunRecord>> {
    if p_grid.is_empty() {
        return Err(Error::invalid("p_grid", "must not be empty"));
    }
    let mut records = Vec::with_capacity(entries.len() * p_grid.len());
    for &p in p_grid {
        let cfg = NoiseConfig { p, ..base.clone() };
        for entry in entries {
            if entry.model.steps() != cfg.steps {
                return Err(Error::invalid(
                    "steps",
                    format!("{} was built with {} segments", entry.label, entry.model.steps()),
                ));
            }
            let (mean, se) = run_trials(&entry.model, &cfg)?;
            records.push(RunRecord {
                hamiltonian: entry.label.clone(),
                p,
                mean_fidelity: mean,
                standard_error: se,
                trials: cfg.trials,
                seed: cfg.seed,
                source_site: entry.source_site,
                target_site: entry.model.measure_site(),
                steps: cfg.steps,
                error_placement: ERROR_PLACEMENT.to_string(),
            });
        }
    }
    Ok(records)
}
