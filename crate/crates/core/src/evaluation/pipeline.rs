use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Configuration;
use super::metrics::{f1_scores, ConfusionMatrix};
use super::timing::{measure_response, EnergyMeter, InferencePipeline, ResponseReport, DEFAULT_WARMUP};
use crate::activity::{Activity, N_ACTIVITIES};
use crate::dataset::{downsample, label_distribution, parse_sample_row, format_sample_row, split_loso, SensorSession, N_CHANNELS};
use crate::error::{Error, Result};
use crate::features::{extract_features, extract_from_channels, FeatureVector, Normalizer};
use crate::knn::KnnModel;
use crate::segmentation::{cap_instances, segment, window_count, Window, WindowSpec};

/// Training windows kept per evaluation in the reference study.
pub const REFERENCE_INSTANCE_CAP: usize = 1661;

/// How many training windows every configuration is reduced to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceCap {
    Fixed(usize),
    /// The window count of the whole dataset at 900 samples / 0% overlap
    /// (the smallest over the grid).
    DatasetMinimum,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOptions {
    pub instance_cap: InstanceCap,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        EvaluationOptions {
            instance_cap: InstanceCap::Fixed(REFERENCE_INSTANCE_CAP),
            warmup: DEFAULT_WARMUP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub config_id: u32,
    pub config: Configuration,
    pub test_user: u8,
    pub accuracy: f64,
    pub f1_per_activity: [Option<f64>; N_ACTIVITIES],
    pub macro_f1: f64,
    pub mean_response_ms: f64,
    pub energy_mj: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub response: ResponseReport,
    pub confusion: ConfusionMatrix,
}

/// Reference label mix restricted to activities that produced windows.
fn reference_for(train: &[&SensorSession], windows: &[Window<'_>]) -> [f64; N_ACTIVITIES] {
    let mut has_windows = [false; N_ACTIVITIES];
    for w in windows {
        has_windows[w.activity.index()] = true;
    }
    let mut dist = label_distribution(train.iter().copied());
    for (d, &keep) in dist.iter_mut().zip(&has_windows) {
        if !keep {
            *d = 0.0;
        }
    }
    let sum: f64 = dist.iter().sum();
    if sum > 0.0 {
        dist.iter_mut().for_each(|d| *d /= sum);
    }
    dist
}

/// Number of windows the whole collection yields at 900 samples, no overlap.
pub fn dataset_minimum_instances(sessions: &[SensorSession]) -> usize {
    let spec = WindowSpec { size: 900, overlap_pct: 0 };
    sessions
        .iter()
        .flat_map(|s| s.runs())
        .map(|r| window_count(r.len, &spec))
        .sum()
}

/// Test windows of one user, replayed from the sample text format.
///
/// Each inference reads only the rows not already buffered from the previous
/// window of the same run, then computes the features over the window and
/// classifies it.
pub struct StreamPipeline<'m> {
    text: String,
    line_starts: Vec<usize>,
    windows: Vec<(usize, usize, usize)>,
    buffer: Vec<Vec<f64>>,
    buffer_run: Option<usize>,
    buffer_origin: usize,
    buffer_end: usize,
    row: [f64; N_CHANNELS],
    features: Vec<f64>,
    normalizer: &'m Normalizer,
    model: &'m KnnModel,
    k: usize,
}

impl<'m> StreamPipeline<'m> {
    pub fn new(
        session: &SensorSession,
        spec: &WindowSpec,
        normalizer: &'m Normalizer,
        model: &'m KnnModel,
        k: usize,
    ) -> (Self, Vec<Activity>) {
        let mut text = String::new();
        let mut line_starts = Vec::with_capacity(session.len() + 1);
        for i in 0..session.len() {
            line_starts.push(text.len());
            format_sample_row(session, i, &mut text);
        }
        line_starts.push(text.len());
        let mut windows = Vec::new();
        let mut truth = Vec::new();
        for (run_id, run) in session.runs().into_iter().enumerate() {
            for start in crate::segmentation::window_plan(run.len, spec) {
                windows.push((run_id, run.start + start, spec.size));
                truth.push(run.activity);
            }
        }
        let pipeline = StreamPipeline {
            text,
            line_starts,
            windows,
            buffer: vec![Vec::new(); N_CHANNELS],
            buffer_run: None,
            buffer_origin: 0,
            buffer_end: 0,
            row: [0.0; N_CHANNELS],
            features: Vec::new(),
            normalizer,
            model,
            k,
        };
        (pipeline, truth)
    }

    fn line(&self, i: usize) -> &str {
        &self.text[self.line_starts[i]..self.line_starts[i + 1]]
    }
}

impl InferencePipeline for StreamPipeline<'_> {
    fn inferences(&self) -> usize {
        self.windows.len()
    }

    fn read(&mut self, i: usize) -> Result<()> {
        let (run, start, len) = self.windows[i];
        if i == 0 || self.buffer_run != Some(run) || start < self.buffer_origin {
            self.buffer.iter_mut().for_each(Vec::clear);
            self.buffer_run = Some(run);
            self.buffer_origin = start;
            self.buffer_end = start;
        }
        for s in self.buffer_end..start + len {
            let mut row = self.row;
            parse_sample_row(self.line(s), &mut row).ok_or_else(|| Error::Parse {
                path: "<test stream>".into(),
                line: s + 1,
                message: "malformed sample row".into(),
            })?;
            for (c, v) in row.iter().enumerate() {
                self.buffer[c].push(*v);
            }
        }
        self.buffer_end = self.buffer_end.max(start + len);
        Ok(())
    }

    fn extract(&mut self, i: usize) -> Result<()> {
        let (_, start, len) = self.windows[i];
        let offset = start - self.buffer_origin;
        let channels: Vec<&[f64]> = self.buffer.iter().map(|c| &c[offset..offset + len]).collect();
        self.features = extract_from_channels(&channels)?;
        self.normalizer.apply(&mut self.features);
        Ok(())
    }

    fn infer(&mut self, _i: usize) -> Result<Activity> {
        self.model.predict(&self.features, self.k)
    }
}

/// Fitted state of one LOSO fold.
pub struct TrainedFold {
    pub normalizer: Normalizer,
    pub model: KnnModel,
    pub n_train: usize,
}

/// Segments, caps, featurises and normalises the training sessions, then
/// builds the kNN model.
pub fn train_fold(
    train: &[&SensorSession],
    spec: &WindowSpec,
    config: &Configuration,
    cap: usize,
    seed: u64,
) -> Result<TrainedFold> {
    let windows = segment(train.iter().copied(), spec);
    if windows.is_empty() {
        return Err(Error::NoInstances(format!("no training windows for {config}")));
    }
    let reference = reference_for(train, &windows);
    let capped = cap_instances(&windows, cap, &reference, seed)?;
    let vectors: Vec<FeatureVector> = capped
        .par_iter()
        .map(extract_features)
        .collect::<Result<_>>()?;
    let normalizer = Normalizer::fit(&vectors)?;
    let scaled: Vec<FeatureVector> = vectors.iter().map(|v| normalizer.normalize(v)).collect();
    let model = KnnModel::build(
        scaled.iter().map(|v| (v.values.as_slice(), v.label)),
        scaled.len(),
        config.distance,
    )?;
    if config.k > model.len() {
        return Err(Error::InvalidK {
            k: config.k,
            instances: model.len(),
        });
    }
    Ok(TrainedFold {
        n_train: model.len(),
        normalizer,
        model,
    })
}

/// Untimed predictions for every window of `session`, used to cross-check
/// the streamed path.
pub fn predict_session(
    fold: &TrainedFold,
    session: &SensorSession,
    spec: &WindowSpec,
    k: usize,
) -> Result<Vec<(Activity, Activity)>> {
    segment([session], spec)
        .par_iter()
        .map(|w| {
            let v = fold.normalizer.normalize(&extract_features(w)?);
            Ok((w.activity, fold.model.predict(&v.values, k)?))
        })
        .collect()
}

/// Runs one configuration under leave-one-subject-out with the default
/// options and the given seed.
pub fn evaluate_config(
    config: &Configuration,
    sessions: &[SensorSession],
    test_user: u8,
    meter: &dyn EnergyMeter,
    seed: u64,
) -> Result<EvaluationResult> {
    let options = EvaluationOptions {
        seed,
        ..EvaluationOptions::default()
    };
    evaluate_with(config, sessions, sessions, test_user, meter, &options)
}

/// `train_pool` holds the sessions at the training frequency, `test_pool` at
/// the test frequency; both still contain every user.
fn evaluate_with(
    config: &Configuration,
    train_pool: &[SensorSession],
    test_pool: &[SensorSession],
    test_user: u8,
    meter: &dyn EnergyMeter,
    options: &EvaluationOptions,
) -> Result<EvaluationResult> {
    config.validate()?;
    let config_id = config.config_id().expect("validated");
    let train_spec = config.window_at(config.train_hz)?;
    let test_spec = config.window_at(config.test_hz)?;

    let train_sessions: Vec<SensorSession>;
    let train_pool = if train_pool.first().map(|s| s.frequency_hz) != Some(config.train_hz) {
        train_sessions = train_pool
            .iter()
            .map(|s| downsample(s, config.train_hz))
            .collect::<Result<_>>()?;
        &train_sessions[..]
    } else {
        train_pool
    };
    let test_sessions: Vec<SensorSession>;
    let test_pool = if test_pool.first().map(|s| s.frequency_hz) != Some(config.test_hz) {
        let (_, test) = split_loso(test_pool, test_user)?;
        test_sessions = vec![downsample(test, config.test_hz)?];
        &test_sessions[..]
    } else {
        test_pool
    };
    let (train, _) = split_loso(train_pool, test_user)?;
    let (_, test) = split_loso(test_pool, test_user)?;

    let cap = match options.instance_cap {
        InstanceCap::Fixed(n) => n,
        InstanceCap::DatasetMinimum => dataset_minimum_instances(train_pool),
        InstanceCap::None => usize::MAX,
    };
    let fold = train_fold(&train, &train_spec, config, cap, options.seed)?;

    let (mut stream, truth) = StreamPipeline::new(test, &test_spec, &fold.normalizer, &fold.model, config.k);
    if truth.is_empty() {
        return Err(Error::NoInstances(format!(
            "user {test_user} has no test windows for {config}"
        )));
    }
    let (response, predictions) = measure_response(&mut stream, options.warmup)?;
    let confusion = ConfusionMatrix::from_pairs(truth.iter().copied().zip(predictions));
    let f1 = f1_scores(&confusion);
    let energy_mj = meter.energy_mj(response.mean_ms)?;
    Ok(EvaluationResult {
        config_id,
        config: *config,
        test_user,
        accuracy: confusion.accuracy(),
        f1_per_activity: f1.per_class,
        macro_f1: f1.macro_f1,
        mean_response_ms: response.mean_ms,
        energy_mj,
        n_train: fold.n_train,
        n_test: truth.len(),
        response,
        confusion,
    })
}

/// Holds a cleaned dataset and evaluates configurations against it, keeping
/// one resampled copy per frequency.
pub struct LosoEvaluator {
    sessions: Arc<Vec<SensorSession>>,
    resampled: Mutex<HashMap<u64, Arc<Vec<SensorSession>>>>,
    meter: Box<dyn EnergyMeter>,
    pub options: EvaluationOptions,
}

impl LosoEvaluator {
    pub fn new(sessions: Vec<SensorSession>, meter: Box<dyn EnergyMeter>, options: EvaluationOptions) -> Self {
        LosoEvaluator {
            sessions: Arc::new(sessions),
            resampled: Mutex::new(HashMap::new()),
            meter,
            options,
        }
    }

    pub fn sessions(&self) -> &[SensorSession] {
        &self.sessions
    }

    pub fn users(&self) -> Vec<u8> {
        self.sessions.iter().map(|s| s.user_id).collect()
    }

    pub fn at_frequency(&self, hz: f64) -> Result<Arc<Vec<SensorSession>>> {
        if self.sessions.first().map(|s| s.frequency_hz) == Some(hz) {
            return Ok(Arc::clone(&self.sessions));
        }
        if let Some(hit) = self.resampled.lock().expect("cache lock").get(&hz.to_bits()) {
            return Ok(Arc::clone(hit));
        }
        let resampled: Vec<SensorSession> = self
            .sessions
            .par_iter()
            .map(|s| downsample(s, hz))
            .collect::<Result<_>>()?;
        let resampled = Arc::new(resampled);
        self.resampled
            .lock()
            .expect("cache lock")
            .insert(hz.to_bits(), Arc::clone(&resampled));
        Ok(resampled)
    }

    pub fn evaluate(&self, config: &Configuration, test_user: u8) -> Result<EvaluationResult> {
        config.validate()?;
        let train = self.at_frequency(config.train_hz)?;
        let test = self.at_frequency(config.test_hz)?;
        evaluate_with(config, &train, &test, test_user, self.meter.as_ref(), &self.options)
    }
}
