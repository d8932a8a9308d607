use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinamp::chains::ChainFamily;
use spinamp::experiments::{
    run, write_atomic, Command, ExperimentConfig, ProfileChoice, TimeValue,
};

/// Spin-chain amplification experiments.
///
/// Parameters come from an optional JSON config; flags override it. Output
/// goes to --out (written atomically) or stdout, with a summary on stderr.
/// Exit status: 0 success, 1 failed check or numeric failure, 2 usage error.
#[derive(Parser, Debug)]
#[command(name = "spinamp", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Chain length.
    #[arg(short = 'n', long, global = true)]
    n_sites: Option<usize>,

    /// uniform, engineered or custom.
    #[arg(long, global = true)]
    profile: Option<String>,

    /// cluster or exchange.
    #[arg(long, global = true)]
    family: Option<String>,

    /// Evolution time, e.g. 1.25, pi/2 or 3pi/4.
    #[arg(long, global = true, allow_hyphen_values = true)]
    time: Option<String>,

    /// Source configuration such as 010000.
    #[arg(long, global = true)]
    source: Option<String>,

    /// Target configuration.
    #[arg(long, global = true)]
    target: Option<String>,

    #[arg(long, global = true)]
    t_max: Option<f64>,

    #[arg(long, global = true)]
    grid_step: Option<f64>,

    /// Comma-separated dephasing probabilities.
    #[arg(long, global = true, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,

    #[arg(long, global = true)]
    trials: Option<usize>,

    #[arg(long, global = true)]
    steps: Option<usize>,

    #[arg(long, global = true)]
    n_min: Option<usize>,

    #[arg(long, global = true)]
    n_max: Option<usize>,

    #[arg(long, global = true)]
    spikes: Option<usize>,

    #[arg(long, global = true)]
    spike_length: Option<usize>,

    /// Perturb J_1 on the cluster side of verify-equivalence.
    #[arg(long, global = true)]
    corrupt: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Check that the CNOT ladder maps the exchange chain onto the cluster chain.
    VerifyEquivalence,
    /// Evolve alpha|0..0> + beta|10..0> and report the amplification fidelity.
    Amplify,
    /// Transfer amplitude between two basis configurations.
    Transfer,
    /// Fidelity over a time window, with the refined maximum in the header.
    Scan,
    /// Continuous evolution against the mirror map and the cellular automaton.
    CaCompare,
    /// Monte Carlo dephasing sweep for both chain families.
    NoiseSweep,
    /// Star of cluster chains sharing a center site.
    StarDemo,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifyEquivalence => Command::VerifyEquivalence,
            Cmd::Amplify => Command::Amplify,
            Cmd::Transfer => Command::Transfer,
            Cmd::Scan => Command::Scan,
            Cmd::CaCompare => Command::CaCompare,
            Cmd::NoiseSweep => Command::NoiseSweep,
            Cmd::StarDemo => Command::StarDemo,
        }
    }
}

impl Overrides {
    fn into_config(self, seed: Option<u64>) -> spinamp::Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            n_sites: self.n_sites,
            n_min: self.n_min,
            n_max: self.n_max,
            profile: self
                .profile
                .map(|s| s.parse().map(ProfileChoice::Kind))
                .transpose()?,
            family: self.family.map(|s| s.parse::<ChainFamily>()).transpose()?,
            time: self.time.map(TimeValue::Text),
            t_max: self.t_max,
            grid_step: self.grid_step,
            source: self.source,
            target: self.target,
            p_grid: self.p_grid,
            steps: self.steps,
            trials: self.trials,
            seed,
            spikes: self.spikes,
            spike_length: self.spike_length,
            corrupt: self.corrupt.then_some(true),
            ..Default::default()
        })
    }
}

fn execute(cli: Cli) -> spinamp::Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| spinamp::Error::InvalidParameter {
                name: "threads".into(),
                reason: e.to_string(),
            })?;
    }
    let base = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let config = base.merged(cli.overrides.into_config(cli.seed)?);
    let artifact = run(cli.command.into(), config)?;
    match &cli.out {
        Some(path) => write_atomic(path, &artifact.contents)?,
        None => print!("{}", artifact.contents),
    }
    for line in &artifact.summary {
        eprintln!("{line}");
    }
    Ok(artifact.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
