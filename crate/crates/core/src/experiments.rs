//! File-producing experiments behind the command-line front end.
//!
//! Every runner takes an [`ExperimentConfig`], fills in defaults, validates
//! the fields its command needs and returns an [`Artifact`] holding the exact
//! bytes to write. Output carries no timestamps, so identical configs give
//! identical files.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{max_abs_diff, realize_dense, realize_sparse, BitConfig, HamiltonianSpec, DENSE_CAP};
use crate::automaton::ca_vs_hamiltonian_report;
use crate::basis::conjugate_hamiltonian;
use crate::chains::{
    cluster_chain, exchange_chain, star_hamiltonian, ChainFamily, CouplingProfile, ProfileKind,
    StarLayout,
};
use crate::error::{Error, Result};
use crate::evolution::{
    amplification_check, max_fidelity_scan, pst_time, Method, Propagator, ScanOptions,
};
use crate::noise::{noise_sweep, DephasingModel, NoiseConfig, SweepEntry};

pub const ARTIFACT: &str = "spinamp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest chain evolved with the dense method by the runners; longer chains
/// use Krylov propagation.
const DENSE_EVOLUTION_LIMIT: usize = 10;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Command {
    VerifyEquivalence,
    Amplify,
    Transfer,
    Scan,
    CaCompare,
    NoiseSweep,
    StarDemo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyEquivalence => "verify-equivalence",
            Command::Amplify => "amplify",
            Command::Transfer => "transfer",
            Command::Scan => "scan",
            Command::CaCompare => "ca-compare",
            Command::NoiseSweep => "noise-sweep",
            Command::StarDemo => "star-demo",
        }
    }
}

/// A time given either as a number or as a multiple of pi such as `"pi/2"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeValue {
    Number(f64),
    Text(String),
}

impl TimeValue {
    pub fn value(&self) -> Result<f64> {
        match self {
            TimeValue::Number(x) => Ok(*x),
            TimeValue::Text(s) => parse_time(s),
        }
    }
}

/// Parses a decimal number or `[sign][multiplier][*]pi[/denominator]`,
/// e.g. `pi`, `pi/2`, `3pi/4`, `-2*pi`, `1.5`.
pub fn parse_time(input: &str) -> Result<f64> {
    let err = |reason: &str| Error::Parse {
        what: "time",
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| err("expected a number or a multiple of pi"));
    };
    let (head, tail) = (&s[..pos], &s[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let multiplier = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| err("bad multiplier before pi"))?,
    };
    let denominator = match tail {
        "" => 1.0,
        t => {
            let d = t
                .strip_prefix('/')
                .ok_or_else(|| err("only a /denominator may follow pi"))?;
            d.parse::<f64>().map_err(|_| err("bad denominator"))?
        }
    };
    if denominator == 0.0 {
        return Err(err("zero denominator"));
    }
    let t = multiplier * PI / denominator;
    if !t.is_finite() {
        return Err(err("not finite"));
    }
    Ok(t)
}

/// Profile selection: a named kind or a full profile object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileChoice {
    Kind(ProfileKind),
    Explicit(CouplingProfile),
}

impl ProfileChoice {
    fn build(&self, n_sites: Option<usize>) -> Result<CouplingProfile> {
        match self {
            ProfileChoice::Kind(kind) => {
                let n = n_sites.ok_or_else(|| Error::invalid("n_sites", "required"))?;
                CouplingProfile::of_kind(*kind, n)
            }
            ProfileChoice::Explicit(p) => {
                if let Some(n) = n_sites {
                    if n != p.n_sites() {
                        return Err(Error::invalid(
                            "profile",
                            format!("has {} sites but n_sites is {n}", p.n_sites()),
                        ));
                    }
                }
                Ok(p.clone())
            }
        }
    }
}

/// Parameters for every command; each command reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<ChainFamily>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spikes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spike_length: Option<usize>,
    /// Random profiles per chain length in `verify-equivalence`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profiles: Option<usize>,
    /// Negative control for `verify-equivalence`: perturbs `J_1` on the
    /// cluster side so every check must fail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merged(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            n_sites, n_min, n_max, profile, family, time, t_max, grid_step, source, target, alpha,
            beta, p, p_grid, steps, trials, seed, spikes, spike_length, profiles, corrupt
        );
        self
    }

    fn with_defaults(mut self, command: Command) -> Self {
        if let (None, Some(ProfileChoice::Explicit(p))) = (self.n_sites, &self.profile) {
            self.n_sites = Some(p.n_sites());
        }
        match command {
            Command::VerifyEquivalence => {
                fill(&mut self.n_min, 2);
                fill(&mut self.n_max, 8);
                fill(&mut self.profiles, 5);
                fill(&mut self.seed, 0);
                fill(&mut self.corrupt, false);
            }
            Command::Amplify => {
                fill(&mut self.n_sites, 6);
                fill(&mut self.profile, ProfileChoice::Kind(ProfileKind::Engineered));
                fill(&mut self.time, TimeValue::Text("pi/2".into()));
                fill(&mut self.alpha, FRAC_1_SQRT_2);
                fill(&mut self.beta, FRAC_1_SQRT_2);
            }
            Command::Transfer => {
                fill(&mut self.profile, ProfileChoice::Kind(ProfileKind::Engineered));
                fill(&mut self.family, ChainFamily::Cluster);
                fill(&mut self.time, TimeValue::Text("pi/2".into()));
            }
            Command::Scan => {
                fill(&mut self.profile, ProfileChoice::Kind(ProfileKind::Uniform));
                fill(&mut self.family, ChainFamily::Cluster);
                fill(&mut self.t_max, 200.0);
                fill(&mut self.grid_step, 0.1);
            }
            Command::CaCompare => {
                fill(&mut self.n_sites, 6);
                fill(&mut self.profile, ProfileChoice::Kind(ProfileKind::Engineered));
            }
            Command::NoiseSweep => {
                fill(&mut self.n_sites, 6);
                fill(&mut self.profile, ProfileChoice::Kind(ProfileKind::Engineered));
                if self.p_grid.is_none() {
                    self.p_grid = Some(match self.p {
                        Some(p) => vec![p],
                        None => vec![0.0, 0.02, 0.05, 0.1, 0.15, 0.2],
                    });
                }
                fill(&mut self.steps, 25);
                fill(&mut self.trials, 10_000);
                fill(&mut self.seed, 0);
            }
            Command::StarDemo => {
                fill(&mut self.spikes, 3);
                fill(&mut self.spike_length, 3);
                fill(&mut self.profile, ProfileChoice::Kind(ProfileKind::Engineered));
                fill(&mut self.time, TimeValue::Text("pi/2".into()));
            }
        }
        self
    }

    fn chain_profile(&self) -> Result<CouplingProfile> {
        let choice = self
            .profile
            .as_ref()
            .ok_or_else(|| Error::invalid("profile", "required"))?;
        choice.build(self.n_sites)
    }

    fn time_value(&self) -> Result<f64> {
        self.time
            .as_ref()
            .ok_or_else(|| Error::invalid("time", "required"))?
            .value()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ArtifactFormat {
    Csv,
    Json,
}

/// Output of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub format: ArtifactFormat,
    pub contents: String,
    /// False when a check inside the command failed.
    pub passed: bool,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

/// Formats with 15 significant digits, independent of locale.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // take the exponent after rounding so 0.9999999999999999 becomes 1.0..
    let sci = format!("{x:.14e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Rounds to 15 significant digits so JSON output obeys the same precision.
fn round15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn fill<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

fn csv_header(command: Command, config: &ExperimentConfig) -> Result<String> {
    Ok(format!(
        "# {ARTIFACT} {VERSION}\n# command: {}\n# config: {}\n",
        command.name(),
        serde_json::to_string(config)?
    ))
}

fn json_artifact(
    command: Command,
    config: &ExperimentConfig,
    result: serde_json::Value,
    passed: bool,
    summary: Vec<String>,
) -> Result<Artifact> {
    let doc = json!({
        "meta": {
            "artifact": ARTIFACT,
            "version": VERSION,
            "command": command.name(),
            "config": config,
        },
        "result": result,
    });
    let mut contents = serde_json::to_string_pretty(&doc)?;
    contents.push('\n');
    Ok(Artifact {
        format: ArtifactFormat::Json,
        contents,
        passed,
        summary,
    })
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid("out", format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn run(command: Command, config: ExperimentConfig) -> Result<Artifact> {
    match command {
        Command::VerifyEquivalence => verify_equivalence(config),
        Command::Amplify => amplify(config),
        Command::Transfer => transfer(config),
        Command::Scan => scan(config),
        Command::CaCompare => ca_compare(config),
        Command::NoiseSweep => noise_sweep_cmd(config),
        Command::StarDemo => star_demo(config),
    }
}

/// Propagator choice used by the runners.
fn propagator(spec: &HamiltonianSpec) -> Result<Propagator> {
    if spec.n_sites() <= DENSE_EVOLUTION_LIMIT {
        Propagator::new(spec, Method::Dense)
    } else {
        Propagator::new(spec, Method::Krylov)
    }
}

/// Basis permutation of the CNOT ladder, composed gate by gate from the
/// CNOT truth table: `C_N^{N-1}` acts first, `C_2^1` last.
pub fn ladder_permutation(n_sites: usize) -> Vec<usize> {
    (0..1usize << n_sites)
        .map(|b| {
            let mut s = b;
            for control in (2..=n_sites).rev() {
                let target = control - 1;
                if s & (1 << (control - 1)) != 0 {
                    s ^= 1 << (target - 1);
                }
            }
            s
        })
        .collect()
}

/// A random profile with couplings in `[0.2, 2)` and fields in `[-1, 1)`.
pub fn random_profile<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> Result<CouplingProfile> {
    let couplings = (1..n_sites).map(|_| rng.random_range(0.2..2.0)).collect();
    let fields = (0..n_sites).map(|_| rng.random_range(-1.0..1.0)).collect();
    CouplingProfile::custom(couplings, Some(fields))
}

/// Symbolic and dense comparison of the ladder-conjugated exchange chain
/// with the cluster chain.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCheck {
    pub n_sites: usize,
    pub label: String,
    pub symbolic_deviation: f64,
    pub dense_deviation: f64,
    /// Terms whose coefficients differ, as `string: conjugated vs cluster`.
    pub mismatches: Vec<String>,
}

pub fn check_equivalence(
    exchange_profile: &CouplingProfile,
    cluster_profile: &CouplingProfile,
    label: &str,
) -> Result<EquivalenceCheck> {
    let n = exchange_profile.n_sites();
    let exchange = exchange_chain(exchange_profile)?;
    let cluster = cluster_chain(cluster_profile)?.canonical();
    let conjugated = conjugate_hamiltonian(&exchange);

    let strings: BTreeSet<_> = conjugated
        .terms()
        .iter()
        .chain(cluster.terms())
        .map(|t| *t.string())
        .collect();
    let mut mismatches = Vec::new();
    let mut symbolic_deviation = 0.0f64;
    for s in strings {
        let a = conjugated.coefficient_of(&s);
        let b = cluster.coefficient_of(&s);
        let d = (a - b).abs();
        symbolic_deviation = symbolic_deviation.max(d);
        if d > 1e-12 {
            mismatches.push(format!("{s}: {} vs {}", fmt_num(a), fmt_num(b)));
        }
    }

    let h_ex = realize_dense(&exchange)?;
    let h = realize_dense(&cluster)?;
    let perm = ladder_permutation(n);
    let mut dense_deviation = 0.0f64;
    for j in 0..h_ex.ncols() {
        for i in 0..h_ex.nrows() {
            dense_deviation = dense_deviation.max((h[(perm[i], perm[j])] - h_ex[(i, j)]).norm());
        }
    }
    Ok(EquivalenceCheck {
        n_sites: n,
        label: label.to_string(),
        symbolic_deviation,
        dense_deviation,
        mismatches,
    })
}

fn verify_equivalence(config: ExperimentConfig) -> Result<Artifact> {
    let cfg = config.with_defaults(Command::VerifyEquivalence);
    let (n_min, n_max) = (cfg.n_min.unwrap(), cfg.n_max.unwrap());
    if n_min < 2 || n_min > n_max {
        return Err(Error::invalid("n_min", format!("need 2 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    if n_max > DENSE_CAP {
        return Err(Error::TooLargeForDense { n_sites: n_max, cap: DENSE_CAP });
    }
    let corrupt = cfg.corrupt.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap());
    let mut out = csv_header(Command::VerifyEquivalence, &cfg)?;
    out.push_str("n_sites,profile,symbolic_max_dev,dense_max_dev,ok\n");
    let mut passed = true;
    let mut summary = Vec::new();
    for n in n_min..=n_max {
        let mut profiles = vec![
            ("uniform".to_string(), CouplingProfile::uniform(n)?),
            ("engineered".to_string(), CouplingProfile::engineered(n)?),
        ];
        for k in 0..cfg.profiles.unwrap() {
            profiles.push((format!("random{k}"), random_profile(n, &mut rng)?));
        }
        let mut worst = 0.0f64;
        for (label, p) in &profiles {
            let cluster_side = if corrupt {
                p.with_coupling(1, p.coupling(1) * 1.1 + 0.1)?
            } else {
                p.clone()
            };
            let check = check_equivalence(p, &cluster_side, label)?;
            let ok = check.mismatches.is_empty() && check.dense_deviation < 1e-12;
            worst = worst.max(check.symbolic_deviation).max(check.dense_deviation);
            writeln!(
                out,
                "{n},{label},{},{},{ok}",
                fmt_num(check.symbolic_deviation),
                fmt_num(check.dense_deviation)
            )
            .expect("write to string");
            if !ok {
                passed = false;
                for m in &check.mismatches {
                    summary.push(format!("N={n} {label}: mismatched term {m}"));
                }
            }
        }
        summary.push(format!("N={n}: max deviation {}", fmt_num(worst)));
    }
    Ok(Artifact {
        format: ArtifactFormat::Csv,
        contents: out,
        passed,
        summary,
    })
}

fn amplify(config: ExperimentConfig) -> Result<Artifact> {
    let cfg = config.with_defaults(Command::Amplify);
    let profile = cfg.chain_profile()?;
    let t = cfg.time_value()?;
    let (alpha, beta) = (cfg.alpha.unwrap(), cfg.beta.unwrap());
    let prop = propagator(&cluster_chain(&profile)?)?;
    let rec = amplification_check(&prop, C64::new(alpha, 0.0), C64::new(beta, 0.0), t)?;
    let result = json!({
        "n_sites": profile.n_sites(),
        "profile": profile.kind(),
        "method": format!("{:?}", prop.method()).to_lowercase(),
        "time": round15(t),
        "fid0": round15(rec.fid0),
        "fid1": round15(rec.fid1),
        "fidelity": round15(rec.fidelity),
        "phase": round15(rec.phase),
    });
    let summary = vec![format!(
        "N={} t={}: fidelity {} (fid0 {}, fid1 {}, phase {})",
        profile.n_sites(),
        fmt_num(t),
        fmt_num(rec.fidelity),
        fmt_num(rec.fid0),
        fmt_num(rec.fid1),
        fmt_num(rec.phase)
    )];
    json_artifact(Command::Amplify, &cfg, result, true, summary)
}

fn parse_config_field(cfg: &Option<String>, name: &str, n_sites: usize) -> Result<BitConfig> {
    let text = cfg.as_ref().ok_or_else(|| Error::invalid(name, "required"))?;
    let b: BitConfig = text.parse()?;
    if b.n_sites() != n_sites {
        return Err(Error::invalid(
            name,
            format!("{text:?} has {} sites, chain has {n_sites}", b.n_sites()),
        ));
    }
    Ok(b)
}

/// Resolves `n_sites` from the source configuration when it is not given.
fn infer_sites(cfg: &mut ExperimentConfig) {
    if cfg.n_sites.is_none() {
        if let Some(ProfileChoice::Explicit(p)) = &cfg.profile {
            cfg.n_sites = Some(p.n_sites());
        } else if let Some(s) = &cfg.source {
            cfg.n_sites = Some(s.trim().len());
        }
    }
}

fn transfer(config: ExperimentConfig) -> Result<Artifact> {
    let mut cfg = config.with_defaults(Command::Transfer);
    infer_sites(&mut cfg);
    let profile = cfg.chain_profile()?;
    let n = profile.n_sites();
    let source = parse_config_field(&cfg.source, "source", n)?;
    let target = parse_config_field(&cfg.target, "target", n)?;
    let t = cfg.time_value()?;
    let family = cfg.family.unwrap();
    let prop = propagator(&family.build(&profile)?)?;
    let a = prop.amplitude(&source, &target, t)?;
    let result = json!({
        "n_sites": n,
        "family": family,
        "source": source.to_string(),
        "target": target.to_string(),
        "time": round15(t),
        "fidelity": round15(a.norm_sqr()),
        "amplitude_re": round15(a.re),
        "amplitude_im": round15(a.im),
    });
    let summary = vec![format!(
        "{family} {source} -> {target} at t={}: fidelity {}",
        fmt_num(t),
        fmt_num(a.norm_sqr())
    )];
    json_artifact(Command::Transfer, &cfg, result, true, summary)
}

fn scan(config: ExperimentConfig) -> Result<Artifact> {
    let mut cfg = config.with_defaults(Command::Scan);
    infer_sites(&mut cfg);
    let profile = cfg.chain_profile()?;
    let n = profile.n_sites();
    let family = cfg.family.unwrap();
    // default endpoints are the amplification pair for the cluster chain and
    // end-to-end transfer for the exchange chain
    if cfg.source.is_none() {
        cfg.source = Some(BitConfig::single(n, 1)?.to_string());
    }
    if cfg.target.is_none() {
        cfg.target = Some(match family {
            ChainFamily::Cluster => BitConfig::ones(n).to_string(),
            ChainFamily::Exchange => BitConfig::single(n, n)?.to_string(),
        });
    }
    let source = parse_config_field(&cfg.source, "source", n)?;
    let target = parse_config_field(&cfg.target, "target", n)?;
    let options = ScanOptions {
        t_max: cfg.t_max.unwrap(),
        grid_step: cfg.grid_step.unwrap(),
        ..ScanOptions::default()
    };
    let prop = propagator(&family.build(&profile)?)?;
    let result = max_fidelity_scan(&prop, &source, &target, &options)?;
    let mut out = csv_header(Command::Scan, &cfg)?;
    writeln!(
        out,
        "# best_t: {}\n# best_fidelity: {}",
        fmt_num(result.time),
        fmt_num(result.fidelity)
    )
    .expect("write to string");
    out.push_str("t,fidelity\n");
    for (t, f) in &result.grid {
        writeln!(out, "{},{}", fmt_num(*t), fmt_num(*f)).expect("write to string");
    }
    Ok(Artifact {
        format: ArtifactFormat::Csv,
        contents: out,
        passed: true,
        summary: vec![format!(
            "{family} {source} -> {target}: max fidelity {} at t={}",
            fmt_num(result.fidelity),
            fmt_num(result.time)
        )],
    })
}

fn ca_compare(config: ExperimentConfig) -> Result<Artifact> {
    let cfg = config.with_defaults(Command::CaCompare);
    let profile = cfg.chain_profile()?;
    if profile.n_sites() > DENSE_EVOLUTION_LIMIT {
        return Err(Error::TooLargeForDense {
            n_sites: profile.n_sites(),
            cap: DENSE_EVOLUTION_LIMIT,
        });
    }
    let report = ca_vs_hamiltonian_report(&profile)?;
    let mut out = csv_header(Command::CaCompare, &cfg)?;
    out.push_str("input,continuous_output,continuous_prob,mirror_output,agree,ca_hit_step\n");
    for r in &report.rows {
        let hit = r.ca_hit_step.map_or(-1, |s| s as i64);
        writeln!(
            out,
            "{},{},{},{},{},{hit}",
            r.input,
            r.continuous_output,
            fmt_num(r.continuous_prob),
            r.mirror_output,
            r.agree
        )
        .expect("write to string");
    }
    let hits = report.rows.iter().filter(|r| r.ca_hit_step.is_some()).count();
    let capped = report.rows.iter().filter(|r| r.cap_exceeded).count();
    Ok(Artifact {
        format: ArtifactFormat::Csv,
        contents: out,
        passed: report.all_agree(),
        summary: vec![
            format!(
                "{} rows, all agree: {}, min probability {}",
                report.rows.len(),
                report.all_agree(),
                fmt_num(report.min_continuous_prob())
            ),
            format!("{hits} mirror outputs reached by the automaton, {capped} rows hit the step cap"),
        ],
    })
}

/// The two transfer setups compared under dephasing: the cluster chain moves
/// an excitation from site 2 to site `N`, the exchange chain from site 1 to
/// site `N`.
pub fn dephasing_entries(profile: &CouplingProfile, steps: usize) -> Result<Vec<SweepEntry>> {
    let n = profile.n_sites();
    let t = pst_time(n);
    let cluster = Propagator::new(&cluster_chain(profile)?, Method::Dense)?;
    let exchange = Propagator::new(&exchange_chain(profile)?, Method::Dense)?;
    Ok(vec![
        SweepEntry {
            label: ChainFamily::Cluster.label().into(),
            source_site: 2,
            model: DephasingModel::new(&cluster, &BitConfig::single(n, 2)?, n, t, steps)?,
        },
        SweepEntry {
            label: ChainFamily::Exchange.label().into(),
            source_site: 1,
            model: DephasingModel::new(&exchange, &BitConfig::single(n, 1)?, n, t, steps)?,
        },
    ])
}

fn noise_sweep_cmd(config: ExperimentConfig) -> Result<Artifact> {
    let cfg = config.with_defaults(Command::NoiseSweep);
    let profile = cfg.chain_profile()?;
    if profile.n_sites() < 3 {
        return Err(Error::TooFewSites { n_sites: profile.n_sites(), min: 3 });
    }
    if profile.n_sites() > DENSE_EVOLUTION_LIMIT {
        return Err(Error::TooLargeForDense {
            n_sites: profile.n_sites(),
            cap: DENSE_EVOLUTION_LIMIT,
        });
    }
    let base = NoiseConfig {
        p: 0.0,
        steps: cfg.steps.unwrap(),
        trials: cfg.trials.unwrap(),
        seed: cfg.seed.unwrap(),
    };
    let p_grid = cfg.p_grid.clone().unwrap();
    for &p in &p_grid {
        NoiseConfig { p, ..base.clone() }.validate()?;
    }
    base.validate()?;
    let entries = dephasing_entries(&profile, base.steps)?;
    let records = noise_sweep(&entries, &p_grid, &base)?;
    let mut out = csv_header(Command::NoiseSweep, &cfg)?;
    writeln!(
        out,
        "# error_placement: {}\n# sources: cluster site 2, exchange site 1; readout site {}",
        crate::noise::ERROR_PLACEMENT,
        profile.n_sites()
    )
    .expect("write to string");
    out.push_str("hamiltonian,p,mean_fidelity,std_error,trials,seed\n");
    let mut summary = Vec::new();
    for r in &records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.hamiltonian,
            fmt_num(r.p),
            fmt_num(r.mean_fidelity),
            fmt_num(r.standard_error),
            r.trials,
            r.seed
        )
        .expect("write to string");
        summary.push(format!(
            "{:<8} p={:<5} F={} +- {}",
            r.hamiltonian,
            r.p,
            fmt_num(r.mean_fidelity),
            fmt_num(r.standard_error)
        ));
    }
    Ok(Artifact {
        format: ArtifactFormat::Csv,
        contents: out,
        passed: true,
        summary,
    })
}

/// Checks on a star of cluster chains sharing their first site.
#[derive(Clone, Debug, PartialEq)]
pub struct StarReport {
    /// `(r, s, max |[H_r, H_s]|)` for every spike pair.
    pub commutators: Vec<(usize, usize, f64)>,
    /// `max |U_star(t) - prod_r U_r(t)|`.
    pub product_deviation: f64,
    /// Probability that spike `r` reads all ones, starting from an excited center.
    pub spike_all_ones: Vec<f64>,
    /// Probability that the whole star reads all ones.
    pub all_ones: f64,
}

pub fn star_report(layout: &StarLayout, t: f64) -> Result<StarReport> {
    let spikes: Vec<HamiltonianSpec> = (0..layout.spikes())
        .map(|r| layout.spike_hamiltonian(r))
        .collect::<Result<_>>()?;
    let sparse: Vec<_> = spikes.iter().map(realize_sparse).collect::<Result<_>>()?;
    let mut commutators = Vec::new();
    for r in 0..spikes.len() {
        for s in r + 1..spikes.len() {
            commutators.push((r, s, sparse[r].commutator_max_abs(&sparse[s])));
        }
    }
    let star = Propagator::dense(&star_hamiltonian(layout)?)?;
    let u_star = star.unitary(t)?;
    let mut product = nalgebra::DMatrix::<C64>::identity(u_star.nrows(), u_star.ncols());
    for spec in &spikes {
        product = Propagator::dense(spec)?.unitary(t)? * product;
    }
    let product_deviation = max_abs_diff(&u_star, &product);

    let n = layout.n_sites();
    let start = crate::algebra::StateVector::basis(&BitConfig::single(n, 1)?);
    let end = star.evolve(&start, t)?;
    let spike_all_ones = (0..layout.spikes())
        .map(|r| {
            let mask: usize = (1..=layout.spike_length())
                .map(|k| 1usize << (layout.global_site(r, k) - 1))
                .sum();
            end.amplitudes()
                .iter()
                .enumerate()
                .filter(|(b, _)| b & mask == mask)
                .map(|(_, a)| a.norm_sqr())
                .sum()
        })
        .collect();
    let all_ones = end.amplitude(&BitConfig::ones(n)).norm_sqr();
    Ok(StarReport {
        commutators,
        product_deviation,
        spike_all_ones,
        all_ones,
    })
}

fn star_demo(config: ExperimentConfig) -> Result<Artifact> {
    let mut cfg = config.with_defaults(Command::StarDemo);
    cfg.n_sites = Some(cfg.spike_length.unwrap());
    let profile = cfg.chain_profile()?;
    let layout = StarLayout::new(cfg.spikes.unwrap(), profile)?;
    let t = cfg.time_value()?;
    let report = star_report(&layout, t)?;
    let max_commutator = report.commutators.iter().fold(0.0f64, |m, c| m.max(c.2));
    let result = json!({
        "spikes": layout.spikes(),
        "spike_length": layout.spike_length(),
        "n_sites": layout.n_sites(),
        "time": round15(t),
        "commutator_norms": report.commutators.iter().map(|c| json!({
            "spikes": [c.0, c.1],
            "max_abs": round15(c.2),
        })).collect::<Vec<_>>(),
        "product_deviation": round15(report.product_deviation),
        "spike_all_ones": report.spike_all_ones.iter().map(|&x| round15(x)).collect::<Vec<_>>(),
        "all_ones": round15(report.all_ones),
    });
    let summary = vec![
        format!("max spike commutator {}", fmt_num(max_commutator)),
        format!("U_star vs product of spikes: {}", fmt_num(report.product_deviation)),
        format!("all-ones probability {}", fmt_num(report.all_ones)),
    ];
    json_artifact(Command::StarDemo, &cfg, result, true, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_tokens() {
        assert_eq!(parse_time("pi").unwrap(), PI);
        assert_eq!(parse_time("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_time("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_time("-2*pi").unwrap(), -2.0 * PI);
        assert_eq!(parse_time("1.25").unwrap(), 1.25);
        for bad in ["", "tau", "pi/0", "2pie", "x*pi"] {
            assert!(parse_time(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000000");
        assert_eq!(fmt_num(PI / 2.0), "1.57079632679490");
        assert_eq!(fmt_num(0.001), "0.00100000000000000");
        assert_eq!(fmt_num(123.5), "123.500000000000");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(0.9999999999999999), "1.00000000000000");
        assert_eq!(fmt_num(2.5e-13), "2.50000000000000e-13");
    }

    #[test]
    fn ladder_permutation_sends_excitations_to_tilde_states() {
        let perm = ladder_permutation(5);
        let single: BitConfig = "00100".parse().unwrap();
        assert_eq!(BitConfig::from_index(5, perm[single.index()]).to_string(), "11100");
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let err = ExperimentConfig::from_json(r#"{"n_sites": 4, "colour": 1}"#).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn profile_choice_accepts_kind_or_object() {
        let a = ExperimentConfig::from_json(r#"{"profile": "uniform"}"#).unwrap();
        assert_eq!(a.profile, Some(ProfileChoice::Kind(ProfileKind::Uniform)));
        let b = ExperimentConfig::from_json(
            r#"{"profile": {"n_sites": 2, "couplings": [1.0], "fields": null, "kind": "custom"}}"#,
        )
        .unwrap();
        assert!(matches!(b.profile, Some(ProfileChoice::Explicit(_))));
    }

    #[test]
    fn merge_prefers_the_override() {
        let base = ExperimentConfig { n_sites: Some(4), seed: Some(1), ..Default::default() };
        let over = ExperimentConfig { seed: Some(9), ..Default::default() };
        let m = base.merged(over);
        assert_eq!((m.n_sites, m.seed), (Some(4), Some(9)));
    }
}
