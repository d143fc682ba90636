//! `har`: run the activity-recognition hyperparameter study from the
//! command line.
//!
//! Exit codes: 0 when every requested evaluation succeeded, 1 when an
//! experiment failed, 2 for usage errors.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use har_core::synth::SynthOptions;

use manifest::{CapSetting, Manifest, Settings, SweepMode, UsageError};

#[derive(Parser)]
#[command(name = "har", version, about = "kNN activity-recognition hyperparameter study")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and clean a PAMAP2 directory; write per-user caches and a summary.
    Ingest(Flags),
    /// Evaluate one configuration under leave-one-subject-out.
    Evaluate(Flags),
    /// Evaluate a grid, an NSGA-II search or a one-axis sweep.
    Sweep(Flags),
    /// Extract per-user Pareto fronts from a results CSV.
    Pareto(Flags),
    /// Grid ANOVA importance of each hyperparameter from a results CSV.
    Importance(Flags),
    /// Accuracy for every train/test sampling-frequency pair.
    FreqMatrix(Flags),
    /// Write a synthetic dataset in the PAMAP2 file layout.
    Synth(SynthFlags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON manifest; its fields override the flags.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    dataset_dir: Option<PathBuf>,
    /// Test users (comma separated); all users by default.
    #[arg(long, value_delimiter = ',')]
    user: Option<Vec<u8>>,
    /// Window sizes in samples at 100 Hz.
    #[arg(long, value_delimiter = ',')]
    window: Option<Vec<usize>>,
    /// Overlaps as fractions, e.g. 0.5.
    #[arg(long, value_delimiter = ',')]
    overlap: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// euclidean, manhattan or chebyshev.
    #[arg(long, value_delimiter = ',')]
    distance: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    train_hz: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    test_hz: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// NSGA-II trial budget.
    #[arg(long)]
    trials: Option<usize>,
    /// NSGA-II population size.
    #[arg(long)]
    population: Option<usize>,
    /// Average power of the constant-power energy model, in watts.
    #[arg(long)]
    power_watts: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate configurations concurrently. Response times of concurrent
    /// runs are not comparable with sequential ones.
    #[arg(long)]
    parallel: bool,
    /// Sweep mode: grid, nsga2 or axis.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<SweepMode>,
    /// Axis of a one-axis sweep: window_size, overlap or k.
    #[arg(long)]
    axis: Option<String>,
    /// Values of a one-axis sweep (overlap in percent); the reference
    /// study's values by default.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    /// Training windows per fold: reference (1661), dataset-minimum, none or a count.
    #[arg(long)]
    instance_cap: Option<String>,
    /// Untimed inferences before measuring.
    #[arg(long)]
    warmup: Option<usize>,
    /// Results CSV to analyse (default: <out>/results.csv).
    #[arg(long)]
    results: Option<PathBuf>,
    /// Pareto objectives: accuracy, response_time, energy.
    #[arg(long, value_delimiter = ',')]
    objectives: Option<Vec<String>>,
    /// Importance metrics: accuracy, macro_f1, mean_response_ms, energy_mJ.
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<String>>,
}

fn parse_mode(s: &str) -> Result<SweepMode, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| format!("unknown mode {s:?}; expected grid, nsga2 or axis"))
}

impl Flags {
    fn manifest(&self) -> Manifest {
        Manifest {
            experiment: None,
            dataset_dir: self.dataset_dir.clone(),
            out: self.out.clone(),
            seed: self.seed,
            power_watts: self.power_watts,
            users: self.user.clone(),
            window_sizes: self.window.clone(),
            overlaps: self.overlap.clone(),
            ks: self.k.clone(),
            distances: self.distance.clone(),
            train_hz: self.train_hz.clone(),
            test_hz: self.test_hz.clone(),
            mode: self.mode,
            axis: self.axis.clone(),
            values: self.values.clone(),
            trials: self.trials,
            population: self.population,
            instance_cap: self.instance_cap.clone().map(CapSetting::Named),
            warmup: self.warmup,
            parallel: self.parallel.then_some(true),
            results: self.results.clone(),
            objectives: self.objectives.clone(),
            metrics: self.metrics.clone(),
        }
    }

    fn resolve(&self, command: &str) -> anyhow::Result<(Settings, Manifest)> {
        let mut m = self.manifest();
        if let Some(path) = &self.manifest {
            m = m.overlay(Manifest::load(path)?);
        }
        Ok((Settings::resolve(&m, command)?, m))
    }
}

#[derive(Args, Debug)]
struct SynthFlags {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 9)]
    users: u8,
    #[arg(long, default_value_t = 60.0)]
    seconds: f64,
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    /// Fractional variation of run lengths between users.
    #[arg(long, default_value_t = 0.2)]
    jitter: f64,
    /// Probability per row of a short IMU dropout.
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(cli: Cli) -> anyhow::Result<commands::Outcome> {
    match cli.command {
        Command::Ingest(f) => commands::cmd_ingest(&f.resolve("ingest")?.0),
        Command::Evaluate(f) => commands::cmd_evaluate(&f.resolve("evaluate")?.0),
        Command::Sweep(f) => commands::cmd_sweep(&f.resolve("sweep")?.0),
        Command::Pareto(f) => commands::cmd_pareto(&f.resolve("pareto")?.0),
        Command::Importance(f) => commands::cmd_importance(&f.resolve("importance")?.0),
        Command::FreqMatrix(f) => {
            let (s, m) = f.resolve("freq-matrix")?;
            commands::cmd_freq_matrix(&s, (m.train_hz.is_some(), m.test_hz.is_some()))
        }
        Command::Synth(f) => {
            let opts = SynthOptions {
                users: f.users,
                seconds_per_activity: f.seconds,
                noise: f.noise,
                length_jitter: f.jitter,
                dropout_rate: f.dropout,
                seed: f.seed,
                ..SynthOptions::default()
            };
            commands::cmd_synth(&opts, &f.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) if outcome.failures == 0 => ExitCode::SUCCESS,
        Ok(outcome) => {
            eprintln!("error: {} evaluation(s) failed", outcome.failures);
            ExitCode::from(1)
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
