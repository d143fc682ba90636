//! Per-window statistics: ten features for each of the nine 3-axis sensors,
//! and min-max scaling fitted on training vectors.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::dataset::{Placement, SensorKind, N_CHANNELS};
use crate::error::{Error, Result};
use crate::segmentation::Window;

pub const FEATURES_PER_SENSOR: usize = 10;
pub const N_SENSORS: usize = 9;
pub const N_FEATURES: usize = N_SENSORS * FEATURES_PER_SENSOR;

const FEATURE_SUFFIXES: [&str; FEATURES_PER_SENSOR] = [
    "mean_x", "mean_y", "mean_z", "mean_sum", "std_x", "std_y", "std_z", "corr_xy", "corr_xz",
    "corr_yz",
];

/// Column names in feature order: placement-major, then sensor, then the ten
/// statistics.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(N_FEATURES);
    for p in Placement::ALL {
        for s in SensorKind::ALL {
            for suffix in FEATURE_SUFFIXES {
                names.push(format!("{}_{}_{}", p.name(), s.name(), suffix));
            }
        }
    }
    names
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Activity,
    pub user_id: u8,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of squared deviations.
fn sum_sq(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

fn co_moment(xs: &[f64], mx: f64, ys: &[f64], my: f64) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum()
}

/// Pearson correlation from precomputed moments; 0 when either side has no
/// variance.
fn corr(co: f64, ssx: f64, ssy: f64) -> f64 {
    if ssx == 0.0 || ssy == 0.0 {
        return 0.0;
    }
    (co / (ssx * ssy).sqrt()).clamp(-1.0, 1.0)
}

/// Writes the ten statistics of one 3-axis sensor into `out`.
pub fn sensor_features(x: &[f64], y: &[f64], z: &[f64], out: &mut [f64]) {
    let n = x.len();
    let (mx, my, mz) = (mean(x), mean(y), mean(z));
    let sum_mean = (0..n).map(|i| x[i] + y[i] + z[i]).sum::<f64>() / n as f64;
    let (ssx, ssy, ssz) = (sum_sq(x, mx), sum_sq(y, my), sum_sq(z, mz));
    let denom = (n - 1) as f64;
    out[0] = mx;
    out[1] = my;
    out[2] = mz;
    out[3] = sum_mean;
    out[4] = (ssx / denom).sqrt();
    out[5] = (ssy / denom).sqrt();
    out[6] = (ssz / denom).sqrt();
    out[7] = corr(co_moment(x, mx, y, my), ssx, ssy);
    out[8] = corr(co_moment(x, mx, z, mz), ssx, ssz);
    out[9] = corr(co_moment(y, my, z, mz), ssy, ssz);
}

/// Feature values for 27 equally long channel slices in canonical channel
/// order.
pub fn extract_from_channels(channels: &[&[f64]]) -> Result<Vec<f64>> {
    if channels.len() != N_CHANNELS {
        return Err(Error::DimensionMismatch {
            expected: N_CHANNELS,
            got: channels.len(),
        });
    }
    let n = channels[0].len();
    if let Some(bad) = channels.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "feature extraction needs at least 2 samples, window has {n}"
        )));
    }
    let mut values = vec![0.0; N_FEATURES];
    for sensor in 0..N_SENSORS {
        let c = sensor * 3;
        sensor_features(
            channels[c],
            channels[c + 1],
            channels[c + 2],
            &mut values[sensor * FEATURES_PER_SENSOR..(sensor + 1) * FEATURES_PER_SENSOR],
        );
    }
    Ok(values)
}

pub fn extract_features(window: &Window<'_>) -> Result<FeatureVector> {
    let channels: Vec<&[f64]> = (0..N_CHANNELS).map(|c| window.channel(c)).collect();
    Ok(FeatureVector {
        values: extract_from_channels(&channels)?,
        label: window.activity,
        user_id: window.user_id(),
    })
}

/// Per-dimension (min, max) learned from training vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub bounds: Vec<(f64, f64)>,
}

impl Normalizer {
    pub fn fit(train: &[FeatureVector]) -> Result<Self> {
        Self::fit_rows(train.iter().map(|v| v.values.as_slice()))
    }

    pub fn fit_rows<'a>(mut rows: impl Iterator<Item = &'a [f64]>) -> Result<Self> {
        let first = rows.next().ok_or(Error::Empty("normalizer needs training vectors"))?;
        let mut bounds: Vec<(f64, f64)> = first.iter().map(|&v| (v, v)).collect();
        for row in rows {
            if row.len() != bounds.len() {
                return Err(Error::DimensionMismatch {
                    expected: bounds.len(),
                    got: row.len(),
                });
            }
            for (b, &v) in bounds.iter_mut().zip(row) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        Ok(Normalizer { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Scales in place to [0, 1]; values outside the fitted range are
    /// clamped and flat dimensions map to 0.
    pub fn apply(&self, values: &mut [f64]) {
        for (v, &(lo, hi)) in values.iter_mut().zip(&self.bounds) {
            *v = if hi > lo {
                ((*v - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }

    pub fn normalize(&self, vector: &FeatureVector) -> FeatureVector {
        let mut out = vector.clone();
        self.apply(&mut out.values);
        out
    }
}

/// Writes vectors as CSV: one column per feature, then `label` and `user`.
pub fn write_features_csv(vectors: &[FeatureVector], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = feature_names();
    header.push("label".into());
    header.push("user".into());
    w.write_record(&header)?;
    for v in vectors {
        let mut row: Vec<String> = v.values.iter().map(|x| x.to_string()).collect();
        row.push(v.label.code());
        row.push(v.user_id.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<features csv>", e))?;
    Ok(())
}
