//! Run manifests: every flag can also come from a JSON file, and the file
//! wins where both are given.

use std::fmt;
use std::path::{Path, PathBuf};

use har_core::evaluation::{InstanceCap, DEFAULT_POWER_WATTS, DEFAULT_WARMUP, REFERENCE_INSTANCE_CAP};
use har_core::search::{Nsga2Options, Objective, SearchSpace, SweepAxis};
use har_core::{Configuration, Distance};
use serde::{Deserialize, Serialize};

/// Invalid flags or manifest contents; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Grid,
    Nsga2,
    Axis,
}

/// `"reference"`, `"dataset_minimum"`, `"none"` or a window count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapSetting {
    Count(usize),
    Named(String),
}

impl CapSetting {
    fn resolve(&self) -> anyhow::Result<InstanceCap> {
        match self {
            CapSetting::Count(0) => Err(usage("instance cap must be positive")),
            CapSetting::Count(n) => Ok(InstanceCap::Fixed(*n)),
            CapSetting::Named(s) => match s.to_ascii_lowercase().replace('-', "_").as_str() {
                "reference" => Ok(InstanceCap::Fixed(REFERENCE_INSTANCE_CAP)),
                "dataset_minimum" | "min" => Ok(InstanceCap::DatasetMinimum),
                "none" => Ok(InstanceCap::None),
                other => other
                    .parse::<usize>()
                    .map_err(|_| usage(format!("unknown instance cap {s:?}")))
                    .and_then(|n| CapSetting::Count(n).resolve()),
            },
        }
    }
}

/// Everything a run can be configured with. All fields are optional; see
/// [`Settings`] for the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    /// Must match the subcommand when present.
    pub experiment: Option<String>,
    pub dataset_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub power_watts: Option<f64>,
    pub users: Option<Vec<u8>>,
    pub window_sizes: Option<Vec<usize>>,
    /// Fractions, 0.0 to 0.9.
    pub overlaps: Option<Vec<f64>>,
    pub ks: Option<Vec<usize>>,
    pub distances: Option<Vec<String>>,
    pub train_hz: Option<Vec<f64>>,
    pub test_hz: Option<Vec<f64>>,
    pub mode: Option<SweepMode>,
    pub axis: Option<String>,
    pub values: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub population: Option<usize>,
    pub instance_cap: Option<CapSetting>,
    pub warmup: Option<usize>,
    pub parallel: Option<bool>,
    pub results: Option<PathBuf>,
    pub objectives: Option<Vec<String>>,
    pub metrics: Option<Vec<String>>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        Manifest { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Manifest {
    pub fn load(path: &Path) -> anyhow::Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid manifest {}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: Manifest) -> Manifest {
        let base = self;
        overlay_fields!(base, top; experiment, dataset_dir, out, seed, power_watts, users, window_sizes,
            overlaps, ks, distances, train_hz, test_hz, mode, axis, values, trials, population,
            instance_cap, warmup, parallel, results, objectives, metrics)
    }
}

/// Metrics the importance command can decompose.
pub const METRICS: [&str; 4] = ["accuracy", "macro_f1", "mean_response_ms", "energy_mJ"];

/// A manifest with defaults filled in and every value checked.
#[derive(Debug, Clone)]
pub struct Settings {
    pub dataset_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub power_watts: f64,
    pub users: Option<Vec<u8>>,
    pub space: SearchSpace,
    /// Whether each space axis was given explicitly.
    pub explicit: [bool; 4],
    pub train_hz: Vec<f64>,
    pub test_hz: Vec<f64>,
    pub mode: SweepMode,
    pub axis: Option<SweepAxis>,
    pub values: Option<Vec<usize>>,
    pub nsga2: Nsga2Options,
    pub instance_cap: InstanceCap,
    pub warmup: usize,
    pub parallel: bool,
    pub results: Option<PathBuf>,
    pub objectives: Vec<Objective>,
    pub metrics: Vec<String>,
}

fn overlap_pct(x: f64) -> anyhow::Result<u8> {
    let pct = (x * 100.0).round();
    if !(0.0..100.0).contains(&pct) || (x * 100.0 - pct).abs() > 1e-6 {
        return Err(usage(format!("overlap {x} is not a fraction in [0, 1) with whole percent")));
    }
    Ok(pct as u8)
}

impl Settings {
    pub fn resolve(m: &Manifest, command: &str) -> anyhow::Result<Settings> {
        if let Some(e) = &m.experiment {
            if e.replace('_', "-") != command {
                return Err(usage(format!("manifest is for experiment {e:?}, not {command:?}")));
            }
        }
        let table = SearchSpace::full_grid();
        let distances = match &m.distances {
            Some(ds) => Some(
                ds.iter()
                    .map(|d| d.parse::<Distance>().map_err(|e| usage(e.to_string())))
                    .collect::<anyhow::Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let overlaps = match &m.overlaps {
            Some(os) => Some(os.iter().map(|&o| overlap_pct(o)).collect::<anyhow::Result<Vec<_>>>()?),
            None => None,
        };
        let explicit = [
            m.window_sizes.is_some(),
            overlaps.is_some(),
            m.ks.is_some(),
            distances.is_some(),
        ];
        let space = SearchSpace {
            window_sizes: m.window_sizes.clone().unwrap_or(table.window_sizes),
            overlaps_pct: overlaps.unwrap_or(table.overlaps_pct),
            ks: m.ks.clone().unwrap_or(table.ks),
            distances: distances.unwrap_or(table.distances),
        };
        space.validate().map_err(|e| usage(e.to_string()))?;

        let power_watts = m.power_watts.unwrap_or(DEFAULT_POWER_WATTS);
        if !(power_watts.is_finite() && power_watts > 0.0) {
            return Err(usage(format!("power must be positive, got {power_watts} W")));
        }
        let train_hz = m.train_hz.clone().unwrap_or_else(|| vec![100.0]);
        let test_hz = m.test_hz.clone().unwrap_or_else(|| vec![100.0]);
        for hz in train_hz.iter().chain(&test_hz) {
            if !har_core::dataset::SUPPORTED_HZ.contains(hz) {
                return Err(usage(format!("unsupported frequency {hz} Hz")));
            }
        }
        if train_hz.is_empty() || test_hz.is_empty() {
            return Err(usage("frequency lists must not be empty"));
        }
        let axis = match &m.axis {
            Some(a) => Some(a.parse::<SweepAxis>().map_err(usage)?),
            None => None,
        };
        let seed = m.seed.unwrap_or(0);
        let defaults = Nsga2Options::default();
        let nsga2 = Nsga2Options {
            trials: m.trials.unwrap_or(defaults.trials),
            population: m.population.unwrap_or(defaults.population),
            seed,
            parallel: m.parallel.unwrap_or(false),
            ..defaults
        };
        let objectives = match &m.objectives {
            Some(os) => os
                .iter()
                .map(|o| o.parse::<Objective>().map_err(usage))
                .collect::<anyhow::Result<Vec<_>>>()?,
            None => vec![Objective::Accuracy, Objective::ResponseTime],
        };
        if !(2..=3).contains(&objectives.len()) {
            return Err(usage("pareto needs two or three objectives"));
        }
        let metrics = m.metrics.clone().unwrap_or_else(|| METRICS.iter().map(|s| s.to_string()).collect());
        for metric in &metrics {
            if !METRICS.contains(&metric.as_str()) {
                return Err(usage(format!("unknown metric {metric:?}; expected one of {METRICS:?}")));
            }
        }
        if let Some(users) = &m.users {
            if users.is_empty() {
                return Err(usage("user list must not be empty"));
            }
        }
        Ok(Settings {
            dataset_dir: m.dataset_dir.clone(),
            out: m.out.clone().unwrap_or_else(|| PathBuf::from("har-out")),
            seed,
            power_watts,
            users: m.users.clone(),
            space,
            explicit,
            train_hz,
            test_hz,
            mode: m.mode.unwrap_or(SweepMode::Grid),
            axis,
            values: m.values.clone(),
            nsga2,
            instance_cap: m.instance_cap.as_ref().map_or(Ok(InstanceCap::Fixed(REFERENCE_INSTANCE_CAP)), CapSetting::resolve)?,
            warmup: m.warmup.unwrap_or(DEFAULT_WARMUP),
            parallel: m.parallel.unwrap_or(false),
            results: m.results.clone(),
            objectives,
            metrics,
        })
    }

    /// The single configuration named by the flags, at the first train and
    /// test frequency.
    pub fn single_config(&self) -> anyhow::Result<Configuration> {
        let names = ["--window", "--overlap", "--k", "--distance"];
        let lens = self.space.axis_lengths();
        for ((name, given), len) in names.iter().zip(self.explicit).zip(lens) {
            if !given {
                return Err(usage(format!("{name} is required")));
            }
            if len != 1 {
                return Err(usage(format!("{name} takes exactly one value here")));
            }
        }
        let c = self.space.decode(&[0; 4]).at_frequencies(self.train_hz[0], self.test_hz[0]);
        c.validate().map_err(|e| usage(e.to_string()))?;
        Ok(c)
    }

    pub fn dataset_dir(&self) -> anyhow::Result<&Path> {
        self.dataset_dir.as_deref().ok_or_else(|| usage("--dataset-dir is required"))
    }
}
