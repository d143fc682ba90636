//! Per-inference response time and the energy model built on it.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::error::{Error, Result};

/// Inferences run once, untimed, before measuring.
pub const DEFAULT_WARMUP: usize = 10;

/// Average power used when no meter is configured.
pub const DEFAULT_POWER_WATTS: f64 = 1.9;

/// An inference split into the stages that are timed: reading the new
/// samples, computing the features, and classifying.
///
/// Inferences are requested in order `0..inferences()`; a pass may restart at
/// 0 after warm-up.
pub trait InferencePipeline {
    fn inferences(&self) -> usize;
    fn read(&mut self, i: usize) -> Result<()>;
    fn extract(&mut self, i: usize) -> Result<()>;
    fn infer(&mut self, i: usize) -> Result<Activity>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResponseReport {
    pub inferences: usize,
    pub mean_ms: f64,
    pub read_ms: f64,
    pub feature_ms: f64,
    pub inference_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Runs every inference, timing each stage with a monotonic clock. The first
/// `warmup` inferences are run once beforehand and discarded.
pub fn measure_response<P: InferencePipeline + ?Sized>(
    pipeline: &mut P,
    warmup: usize,
) -> Result<(ResponseReport, Vec<Activity>)> {
    let n = pipeline.inferences();
    if n == 0 {
        return Err(Error::NoInstances("no inferences to time".into()));
    }
    for i in 0..warmup.min(n) {
        pipeline.read(i)?;
        pipeline.extract(i)?;
        pipeline.infer(i)?;
    }
    let (mut read, mut feat, mut inf) = (Duration::ZERO, Duration::ZERO, Duration::ZERO);
    let mut predictions = Vec::with_capacity(n);
    for i in 0..n {
        let t0 = Instant::now();
        pipeline.read(i)?;
        let t1 = Instant::now();
        pipeline.extract(i)?;
        let t2 = Instant::now();
        let label = pipeline.infer(i)?;
        let t3 = Instant::now();
        read += t1 - t0;
        feat += t2 - t1;
        inf += t3 - t2;
        predictions.push(label);
    }
    let per = |d: Duration| ms(d) / n as f64;
    let report = ResponseReport {
        inferences: n,
        mean_ms: per(read + feat + inf),
        read_ms: per(read),
        feature_ms: per(feat),
        inference_ms: per(inf),
    };
    Ok((report, predictions))
}

/// Converts a per-inference response time into energy.
pub trait EnergyMeter: Send + Sync {
    fn energy_mj(&self, mean_response_ms: f64) -> Result<f64>;
}

/// Energy as a constant average power draw times the response time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantPowerMeter {
    watts: f64,
}

impl ConstantPowerMeter {
    pub fn new(watts: f64) -> Result<Self> {
        if !(watts > 0.0) || !watts.is_finite() {
            return Err(Error::InvalidConfig(format!("meter power must be positive, got {watts} W")));
        }
        Ok(ConstantPowerMeter { watts })
    }

    pub fn watts(&self) -> f64 {
        self.watts
    }
}

impl Default for ConstantPowerMeter {
    fn default() -> Self {
        ConstantPowerMeter {
            watts: DEFAULT_POWER_WATTS,
        }
    }
}

impl EnergyMeter for ConstantPowerMeter {
    /// W x ms = mJ.
    fn energy_mj(&self, mean_response_ms: f64) -> Result<f64> {
        Ok(self.watts * mean_response_ms)
    }
}

pub fn estimate_energy(mean_response_ms: f64, meter: &dyn EnergyMeter) -> Result<f64> {
    meter.energy_mj(mean_response_ms)
}
