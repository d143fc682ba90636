//! Synthetic recordings with PAMAP2 structure, for tests and demos when the
//! real dataset is not available.
//!
//! Every activity has its own per-channel offset, oscillation frequency and
//! amplitude; users add a small bias. Noise is uniform.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::dataset::{SensorSession, BASE_HZ, N_CHANNELS, PAMAP2_COLUMNS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    pub users: u8,
    pub activities: Vec<Activity>,
    pub seconds_per_activity: f64,
    /// Run lengths vary per (user, activity) by up to this fraction.
    pub length_jitter: f64,
    /// Amplitude of the uniform noise added to every sample.
    pub noise: f64,
    /// Seconds of transient (id 0) rows written between activities.
    pub transient_seconds: f64,
    /// Probability per row that one IMU drops out for 1-3 rows (files only).
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            users: 9,
            activities: Activity::ALL.to_vec(),
            seconds_per_activity: 60.0,
            length_jitter: 0.0,
            noise: 0.5,
            transient_seconds: 2.0,
            dropout_rate: 0.0,
            seed: 0,
        }
    }
}

fn run_samples(opts: &SynthOptions, user: u8, activity: Activity) -> usize {
    let jitter = if opts.length_jitter > 0.0 {
        let h = (user as u64 * 7919 + activity.index() as u64 * 104_729) % 1000;
        1.0 + opts.length_jitter * (h as f64 / 500.0 - 1.0)
    } else {
        1.0
    };
    (opts.seconds_per_activity * jitter * BASE_HZ).round() as usize
}

/// Clean channel value for one sample.
fn signal(activity: Activity, user: u8, channel: usize, t: f64) -> f64 {
    let a = activity.index() as f64;
    let c = channel as f64;
    let offset = ((activity.index() * 31 + channel * 17) % 11) as f64 - 5.0;
    let freq = 0.5 + 0.25 * a + 0.05 * (channel % 3) as f64;
    let amp = 0.5 + 0.2 * ((activity.index() + channel) % 5) as f64;
    let bias = 0.15 * user as f64 * ((channel % 4) as f64 - 1.5);
    offset + bias + amp * (TAU * freq * t + c * 0.7).sin()
}

/// Generates cleaned sessions at 100 Hz, users numbered from 1.
pub fn synthetic_sessions(opts: &SynthOptions) -> Vec<SensorSession> {
    (1..=opts.users).map(|u| synthetic_session(opts, u)).collect()
}

fn synthetic_session(opts: &SynthOptions, user: u8) -> SensorSession {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (user as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut channels = vec![Vec::new(); N_CHANNELS];
    let mut labels = Vec::new();
    let mut timestamps = Vec::new();
    let dt = 1.0 / BASE_HZ;
    let mut t = 5.0;
    for &activity in &opts.activities {
        for i in 0..run_samples(opts, user, activity) {
            let local = i as f64 * dt;
            for (c, ch) in channels.iter_mut().enumerate() {
                let noise = opts.noise * (rng.gen::<f64>() * 2.0 - 1.0);
                ch.push(signal(activity, user, c, local) + noise);
            }
            labels.push(activity);
            timestamps.push(round_ts(t));
            t += dt;
        }
        t += opts.transient_seconds.max(0.05);
    }
    SensorSession::new(user, BASE_HZ, channels, labels, timestamps).expect("consistent lengths")
}

fn round_ts(t: f64) -> f64 {
    (t * 100.0).round() / 100.0
}

/// Writes one `subject1NN.dat` file per user in the 54-column PAMAP2
/// layout, with transient rows between activities and optional short IMU
/// dropouts.
pub fn write_pamap2_dir(opts: &SynthOptions, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for session in synthetic_sessions(opts) {
        let path = dir.join(format!("subject{}.dat", 100 + session.user_id as u32));
        fs::write(&path, render_pamap2(&session, opts)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn render_pamap2(session: &SensorSession, opts: &SynthOptions) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(session.user_id as u64) ^ 0xD1B5_4A32_D192_ED03);
    let mut out = String::new();
    let mut cols = vec![String::new(); PAMAP2_COLUMNS];
    let mut dropout: [usize; 3] = [0; 3];
    let mut prev_ts: Option<f64> = None;
    for i in 0..session.len() {
        let ts = session.timestamps[i];
        if let Some(p) = prev_ts {
            // fill the gap with transient rows
            let gap = ((ts - p) * BASE_HZ).round() as usize;
            for g in 1..gap {
                let tt = round_ts(p + g as f64 / BASE_HZ);
                write_row(&mut out, &mut cols, tt, 0, |_| rng.gen::<f64>(), [false; 3]);
            }
        }
        prev_ts = Some(ts);
        let mut missing = [false; 3];
        for (imu, left) in dropout.iter_mut().enumerate() {
            if *left == 0 && opts.dropout_rate > 0.0 && rng.gen::<f64>() < opts.dropout_rate {
                *left = rng.gen_range(1..=3);
            }
            if *left > 0 {
                missing[imu] = true;
                *left -= 1;
            }
        }
        write_row(
            &mut out,
            &mut cols,
            ts,
            session.labels[i].pamap_id(),
            |c| session.channels[c][i],
            missing,
        );
    }
    out
}

fn write_row(
    out: &mut String,
    cols: &mut [String],
    ts: f64,
    activity_id: u32,
    mut value: impl FnMut(usize) -> f64,
    missing: [bool; 3],
) {
    for c in cols.iter_mut() {
        c.clear();
    }
    let _ = write!(cols[0], "{ts}");
    let _ = write!(cols[1], "{activity_id}");
    cols[2].push_str("NaN");
    for imu in 0..3 {
        let block = 3 + imu * 17;
        let ch = |sensor: usize, axis: usize| imu * 9 + sensor * 3 + axis;
        let _ = write!(cols[block], "{}", 32.5);
        for axis in 0..3 {
            let acc = value(ch(0, axis));
            let gyro = value(ch(1, axis));
            let mag = value(ch(2, axis));
            let fmt = |v: f64| if missing[imu] { "NaN".to_string() } else { v.to_string() };
            cols[block + 1 + axis] = fmt(acc);
            cols[block + 4 + axis] = fmt(acc);
            cols[block + 7 + axis] = fmt(gyro);
            cols[block + 10 + axis] = fmt(mag);
        }
        for (o, v) in ["1", "0", "0", "0"].iter().enumerate() {
            cols[block + 13 + o].push_str(v);
        }
    }
    out.push_str(&cols.join(" "));
    out.push('\n');
}
