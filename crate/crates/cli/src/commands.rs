use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{bail, Context};
use har_core::dataset::{clean, load_pamap2, write_session_rows, CleanPolicy, SUPPORTED_HZ};
use har_core::evaluation::{ConstantPowerMeter, EvaluationOptions, LosoEvaluator};
use har_core::report::{
    front_of_rows, read_results_csv, write_frequency_csv, write_front_csv, write_importance_csv, write_json,
    write_results_csv, FrontReport, Metadata, ResultRow,
};
use har_core::search::{
    enumerate_grid, fixed_value_sweep, frequency_matrix, hyperparameter_importance, nsga2_search, reference_sweep,
    Direction, FrequencyMatrix, Objective,
};
use har_core::synth::{write_pamap2_dir, SynthOptions};
use har_core::{Activity, Configuration, Error, EvaluationResult, SensorSession};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::manifest::{usage, Settings, SweepMode};

/// How many requested evaluations failed; any failure makes the exit code 1.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: usize,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the names and contents of the recording files in `dir`.
pub fn dataset_hash(dir: &Path) -> anyhow::Result<String> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("dat") | Some("txt")))
        .collect();
    files.sort();
    let mut h = Sha256::new();
    for f in &files {
        h.update(f.file_name().unwrap_or_default().as_encoded_bytes());
        h.update([0]);
        h.update(fs::read(f).with_context(|| format!("reading {}", f.display()))?);
    }
    Ok(hex(&h.finalize()))
}

/// SHA-256 of the experiment definition: everything that changes results
/// apart from the dataset and the seed.
fn space_hash(s: &Settings, command: &str) -> String {
    #[derive(Serialize)]
    struct Definition<'a> {
        command: &'a str,
        space: &'a har_core::search::SearchSpace,
        train_hz: &'a [f64],
        test_hz: &'a [f64],
        users: &'a Option<Vec<u8>>,
        mode: SweepMode,
        axis: Option<&'static str>,
        values: &'a Option<Vec<usize>>,
        trials: usize,
        population: usize,
        instance_cap: String,
        warmup: usize,
    }
    let def = Definition {
        command,
        space: &s.space,
        train_hz: &s.train_hz,
        test_hz: &s.test_hz,
        users: &s.users,
        mode: s.mode,
        axis: s.axis.map(|a| a.name()),
        values: &s.values,
        trials: s.nsga2.trials,
        population: s.nsga2.population,
        instance_cap: format!("{:?}", s.instance_cap),
        warmup: s.warmup,
    };
    hex(&Sha256::digest(serde_json::to_vec(&def).expect("serializable")))
}

fn metadata(s: &Settings, command: &str, dataset_sha: &str) -> Metadata {
    vec![
        ("command".into(), command.into()),
        ("seed".into(), s.seed.to_string()),
        ("space_sha256".into(), space_hash(s, command)),
        ("dataset_sha256".into(), dataset_sha.into()),
        ("power_watts".into(), s.power_watts.to_string()),
        ("instance_cap".into(), format!("{:?}", s.instance_cap)),
        ("warmup".into(), s.warmup.to_string()),
        ("parallel".into(), s.parallel.to_string()),
    ]
}

fn create(out: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_sessions(dir: &Path) -> anyhow::Result<Vec<SensorSession>> {
    let raw = load_pamap2(dir)?;
    if raw.is_empty() {
        bail!("no PAMAP2 recordings (*.dat) in {}", dir.display());
    }
    let policy = CleanPolicy::default();
    raw.par_iter()
        .map(|s| clean(s, &policy).map_err(anyhow::Error::from))
        .collect()
}

struct Study {
    evaluator: LosoEvaluator,
    dataset_sha: String,
}

fn open(s: &Settings) -> anyhow::Result<Study> {
    let dir = s.dataset_dir()?;
    let sessions = load_sessions(dir)?;
    let dataset_sha = dataset_hash(dir)?;
    let meter = ConstantPowerMeter::new(s.power_watts).map_err(|e| usage(e.to_string()))?;
    let options = EvaluationOptions {
        instance_cap: s.instance_cap,
        warmup: s.warmup,
        seed: s.seed,
    };
    Ok(Study {
        evaluator: LosoEvaluator::new(sessions, Box::new(meter), options),
        dataset_sha,
    })
}

fn requested_users(s: &Settings, available: &[u8]) -> anyhow::Result<Vec<u8>> {
    match &s.users {
        Some(users) => {
            for u in users {
                if !available.contains(u) {
                    return Err(usage(format!("user {u} is not in the dataset (have {available:?})")));
                }
            }
            Ok(users.clone())
        }
        None => Ok(available.to_vec()),
    }
}

fn print_result(r: &EvaluationResult) {
    println!(
        "user {} | {} | accuracy {:.4} | macro F1 {:.4} | {:.3} ms | {:.3} mJ | train {} test {}",
        r.test_user, r.config, r.accuracy, r.macro_f1, r.mean_response_ms, r.energy_mj, r.n_train, r.n_test
    );
}

fn write_results(s: &Settings, ctx: &Study, command: &str, results: &[EvaluationResult]) -> anyhow::Result<PathBuf> {
    let rows: Vec<ResultRow> = results.iter().map(ResultRow::from).collect();
    let mut w = create(&s.out, "results.csv")?;
    write_results_csv(&mut w, &metadata(s, command, &ctx.dataset_sha), &rows)?;
    w.flush()?;
    Ok(s.out.join("results.csv"))
}

#[derive(Serialize)]
struct UserSummary {
    user: u8,
    samples: usize,
    raw_samples: usize,
    activity_counts: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct IngestSummary {
    dataset_sha256: String,
    users: Vec<UserSummary>,
    total_samples: usize,
    activities_present: usize,
}

pub fn cmd_ingest(s: &Settings) -> anyhow::Result<Outcome> {
    let dir = s.dataset_dir()?;
    let raw = load_pamap2(dir)?;
    if raw.is_empty() {
        bail!("no PAMAP2 recordings (*.dat) in {}", dir.display());
    }
    let policy = CleanPolicy::default();
    let mut users = Vec::new();
    let mut present = [false; Activity::ALL.len()];
    for r in &raw {
        let c = clean(r, &policy)?;
        let counts = c.activity_counts();
        for (p, n) in present.iter_mut().zip(counts) {
            *p |= n > 0;
        }
        let mut w = create(&s.out, &format!("user_{}.rows", c.user_id))?;
        write_session_rows(&c, &mut w)?;
        w.flush()?;
        users.push(UserSummary {
            user: c.user_id,
            samples: c.len(),
            raw_samples: r.len(),
            activity_counts: Activity::ALL
                .iter()
                .zip(counts)
                .map(|(a, n)| (a.code().to_string(), n))
                .collect(),
        });
    }
    let summary = IngestSummary {
        dataset_sha256: dataset_hash(dir)?,
        total_samples: users.iter().map(|u| u.samples).sum(),
        activities_present: present.iter().filter(|p| **p).count(),
        users,
    };
    println!(
        "{} users, {} activities, {} samples",
        summary.users.len(),
        summary.activities_present,
        summary.total_samples
    );
    for u in &summary.users {
        println!("user {}: {} samples ({} before cleaning)", u.user, u.samples, u.raw_samples);
    }
    let mut w = create(&s.out, "summary.json")?;
    write_json(&mut w, &summary)?;
    w.flush()?;
    Ok(Outcome::default())
}

pub fn cmd_synth(opts: &SynthOptions, out: &Path) -> anyhow::Result<Outcome> {
    write_pamap2_dir(opts, out)?;
    println!("wrote {} synthetic recordings to {}", opts.users, out.display());
    Ok(Outcome::default())
}

/// Evaluates every pair, in parallel only when asked, keeping input order.
fn evaluate_pairs(s: &Settings, ctx: &Study, pairs: &[(Configuration, u8)]) -> (Vec<EvaluationResult>, usize) {
    let run = |(c, u): &(Configuration, u8)| {
        let r = ctx.evaluator.evaluate(c, *u);
        if let Err(e) = &r {
            log::error!("user {u} {c}: {e}");
        }
        r
    };
    let outcomes: Vec<_> = if s.parallel {
        pairs.par_iter().map(run).collect()
    } else {
        pairs.iter().map(run).collect()
    };
    let failures = outcomes.iter().filter(|r| r.is_err()).count();
    (outcomes.into_iter().filter_map(Result::ok).collect(), failures)
}

pub fn cmd_evaluate(s: &Settings) -> anyhow::Result<Outcome> {
    let config = s.single_config()?;
    let ctx = open(s)?;
    let users = requested_users(s, &ctx.evaluator.users())?;
    let pairs: Vec<_> = users.iter().map(|&u| (config, u)).collect();
    let (results, failures) = evaluate_pairs(s, &ctx, &pairs);
    results.iter().for_each(print_result);
    let path = write_results(s, &ctx, "evaluate", &results)?;
    println!("wrote {}", path.display());
    Ok(Outcome { failures })
}

pub fn cmd_sweep(s: &Settings) -> anyhow::Result<Outcome> {
    let ctx = open(s)?;
    let users = requested_users(s, &ctx.evaluator.users())?;
    let (train_hz, test_hz) = (s.train_hz[0], s.test_hz[0]);
    let (results, failures) = match s.mode {
        SweepMode::Grid => {
            let mut pairs = Vec::new();
            let mut skipped = 0;
            for c in enumerate_grid(&s.space) {
                let c = c.at_frequencies(train_hz, test_hz);
                if let Err(e) = c.validate() {
                    log::warn!("skipping {c}: {e}");
                    skipped += 1;
                    continue;
                }
                pairs.extend(users.iter().map(|&u| (c, u)));
            }
            log::info!("{} evaluations, {skipped} invalid configurations skipped", pairs.len());
            evaluate_pairs(s, &ctx, &pairs)
        }
        SweepMode::Axis => axis_sweep(s, &ctx, &users)?,
        SweepMode::Nsga2 => nsga2_sweep(s, &ctx, &users)?,
    };
    let path = write_results(s, &ctx, "sweep", &results)?;
    println!("{} results, {failures} failures; wrote {}", results.len(), path.display());
    Ok(Outcome { failures })
}

fn axis_sweep(s: &Settings, ctx: &Study, users: &[u8]) -> anyhow::Result<(Vec<EvaluationResult>, usize)> {
    let axis = s.axis.ok_or_else(|| usage("--axis is required for an axis sweep"))?;
    let (table_values, mut base) = reference_sweep(axis);
    // explicit single values replace the fixed ones of the table
    let lens = s.space.axis_lengths();
    let pick = |i: usize| s.explicit[i] && lens[i] == 1;
    if pick(0) {
        base.window_size = s.space.window_sizes[0];
    }
    if pick(1) {
        base.overlap_pct = s.space.overlaps_pct[0];
    }
    if pick(2) {
        base.k = s.space.ks[0];
    }
    if pick(3) {
        base.distance = s.space.distances[0];
    }
    let base = base.at_frequencies(s.train_hz[0], s.test_hz[0]);
    let values = s.values.clone().unwrap_or(table_values);
    let mut results = Vec::new();
    let mut failures = 0;
    for &u in users {
        match fixed_value_sweep(axis, &values, &base, |c| ctx.evaluator.evaluate(c, u)) {
            Ok(points) => results.extend(points.into_iter().map(|p| p.result)),
            Err(e) => {
                log::error!("user {u}: {e}");
                failures += 1;
            }
        }
    }
    Ok((results, failures))
}

fn nsga2_sweep(s: &Settings, ctx: &Study, users: &[u8]) -> anyhow::Result<(Vec<EvaluationResult>, usize)> {
    let directions = [Direction::Maximize, Direction::Minimize];
    let mut results = Vec::new();
    let mut failures = 0;
    for &u in users {
        let seen: Mutex<BTreeMap<u32, EvaluationResult>> = Mutex::new(BTreeMap::new());
        let evaluate = |c: &Configuration| {
            let r = ctx.evaluator.evaluate(&c.at_frequencies(s.train_hz[0], s.test_hz[0]), u)?;
            let objectives = vec![r.accuracy, r.mean_response_ms];
            seen.lock().expect("result lock").insert(r.config_id, r);
            Ok(objectives)
        };
        match nsga2_search(&s.space, evaluate, &directions, &s.nsga2) {
            Ok(outcome) => {
                log::info!(
                    "user {u}: {} trials, {} distinct configurations, {} invalid",
                    outcome.trials_run,
                    outcome.evaluated.len(),
                    outcome.invalid
                );
                let mut seen = seen.into_inner().expect("result lock");
                for t in &outcome.evaluated {
                    let id = t.config.config_id().expect("on grid");
                    results.extend(seen.remove(&id));
                }
            }
            Err(e) => {
                log::error!("user {u}: {e}");
                failures += 1;
            }
        }
    }
    Ok((results, failures))
}

fn read_results(s: &Settings) -> anyhow::Result<(Metadata, Vec<ResultRow>)> {
    let path = s.results.clone().unwrap_or_else(|| s.out.join("results.csv"));
    let f = File::open(&path).map_err(|e| usage(format!("cannot open results {}: {e}", path.display())))?;
    read_results_csv(f).with_context(|| format!("reading {}", path.display()))
}

pub fn cmd_pareto(s: &Settings) -> anyhow::Result<Outcome> {
    let (_, rows) = read_results(s)?;
    let mut by_user: BTreeMap<u8, Vec<ResultRow>> = BTreeMap::new();
    for r in rows {
        if s.users.as_ref().is_none_or(|u| u.contains(&r.test_user)) {
            by_user.entry(r.test_user).or_default().push(r);
        }
    }
    if by_user.is_empty() {
        bail!("no results to analyse");
    }
    let mut reports = Vec::new();
    let mut all_points = Vec::new();
    for (user, rows) in &by_user {
        let front = front_of_rows(rows, &s.objectives);
        println!("user {user}: {} of {} configurations on the front", front.len(), rows.len());
        all_points.extend(front.iter().cloned());
        reports.push(FrontReport {
            objectives: s.objectives.clone(),
            evaluated: rows.len(),
            points: front,
        });
    }
    let mut w = create(&s.out, "front.csv")?;
    write_front_csv(&mut w, &s.objectives, &all_points)?;
    w.flush()?;
    let mut w = create(&s.out, "front.json")?;
    write_json(&mut w, &reports)?;
    w.flush()?;
    Ok(Outcome::default())
}

fn metric_value(row: &ResultRow, metric: &str) -> f64 {
    match metric {
        "accuracy" => row.objective(Objective::Accuracy),
        "macro_f1" => row.macro_f1,
        "mean_response_ms" => row.objective(Objective::ResponseTime),
        "energy_mJ" => row.objective(Objective::Energy),
        other => unreachable!("metric {other} checked when resolving settings"),
    }
}

pub fn cmd_importance(s: &Settings) -> anyhow::Result<Outcome> {
    let (_, rows) = read_results(s)?;
    let rows: Vec<ResultRow> = rows
        .into_iter()
        .filter(|r| s.users.as_ref().is_none_or(|u| u.contains(&r.test_user)))
        .collect();
    let Some(first) = rows.first() else {
        bail!("no results to analyse");
    };
    if rows.iter().any(|r| r.test_user != first.test_user) {
        return Err(usage("results hold several users; pick one with --user"));
    }
    if rows.iter().any(|r| r.config.train_hz != first.config.train_hz || r.config.test_hz != first.config.test_hz) {
        return Err(usage("results mix sampling frequencies"));
    }
    let mut reports = Vec::new();
    for metric in &s.metrics {
        let data: Vec<(Configuration, f64)> = rows.iter().map(|r| (r.config, metric_value(r, metric))).collect();
        let report = hyperparameter_importance(&data, metric).map_err(|e| match e {
            Error::ConstantMetric => anyhow::anyhow!("{metric}: {e}"),
            other => anyhow::Error::from(other).context(format!("importance of {metric}")),
        })?;
        let ranking: Vec<String> = report
            .ranking()
            .iter()
            .map(|h| format!("{h} {:.3}", report.share(*h)))
            .collect();
        println!("{metric}: {} | residual {:.3}", ranking.join(", "), report.residual);
        reports.push(report);
    }
    let mut w = create(&s.out, "importance.csv")?;
    write_importance_csv(&mut w, &reports)?;
    w.flush()?;
    let mut w = create(&s.out, "importance.json")?;
    write_json(&mut w, &reports)?;
    w.flush()?;
    Ok(Outcome::default())
}

#[derive(Serialize)]
struct MatrixReport<'a> {
    config: Configuration,
    matrix: &'a FrequencyMatrix,
    max: Option<(f64, f64, f64)>,
    min: Option<(f64, f64, f64)>,
}

/// User 9 took part in too few activities and is left out of frequency
/// experiments entirely, training folds included.
pub const FREQUENCY_EXCLUDED_USER: u8 = 9;

pub fn cmd_freq_matrix(s: &Settings, freqs_given: (bool, bool)) -> anyhow::Result<Outcome> {
    let config = s.single_config()?;
    let dir = s.dataset_dir()?;
    let sessions: Vec<SensorSession> = load_sessions(dir)?
        .into_iter()
        .filter(|x| x.user_id != FREQUENCY_EXCLUDED_USER)
        .collect();
    let meter = ConstantPowerMeter::new(s.power_watts).map_err(|e| usage(e.to_string()))?;
    let evaluator = LosoEvaluator::new(
        sessions,
        Box::new(meter),
        EvaluationOptions {
            instance_cap: s.instance_cap,
            warmup: s.warmup,
            seed: s.seed,
        },
    );
    let users = requested_users(s, &evaluator.users())?;
    let train = if freqs_given.0 { s.train_hz.clone() } else { SUPPORTED_HZ.to_vec() };
    let test = if freqs_given.1 { s.test_hz.clone() } else { SUPPORTED_HZ.to_vec() };
    let evaluate = |c: &Configuration, u: u8| evaluator.evaluate(c, u);
    let mut matrices = Vec::new();
    for &u in &users {
        match frequency_matrix(&[u], &train, &test, &config, evaluate) {
            Ok(m) => matrices.extend(m),
            Err(e) => log::error!("user {u}: {e}"),
        }
    }
    let mut reports = Vec::new();
    for m in &matrices {
        let at = |x: Option<(usize, usize, f64)>| x.map(|(i, j, v)| (m.train_hz[i], m.test_hz[j], v));
        let (max, min) = (at(m.max_cell()), at(m.min_cell()));
        if let (Some(hi), Some(lo)) = (max, min) {
            println!(
                "user {}: max {:.4} (train {} Hz, test {} Hz), min {:.4} (train {} Hz, test {} Hz)",
                m.user, hi.2, hi.0, hi.1, lo.2, lo.0, lo.1
            );
        }
        reports.push(MatrixReport { config, matrix: m, max, min });
    }
    let mut w = create(&s.out, "freq_matrix.csv")?;
    write_frequency_csv(&mut w, &matrices)?;
    w.flush()?;
    let mut w = create(&s.out, "freq_matrix.json")?;
    write_json(&mut w, &reports)?;
    w.flush()?;
    Ok(Outcome {
        failures: users.len() - matrices.len(),
    })
}
