//! PAMAP2 ingestion, NaN cleaning, decimation and leave-one-subject-out splits.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activity::{Activity, N_ACTIVITIES, TRANSIENT_ID};
use crate::error::{Error, Result};

/// Native PAMAP2 sampling frequency.
pub const BASE_HZ: f64 = 100.0;

/// Frequencies a session may have after resampling.
pub const SUPPORTED_HZ: [f64; 6] = [100.0, 50.0, 25.0, 12.5, 5.0, 1.0];

pub const PAMAP2_COLUMNS: usize = 54;
pub const N_CHANNELS: usize = 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    Wrist,
    Chest,
    Ankle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensorKind {
    Accelerometer,
    Gyroscope,
    Magnetometer,
}

impl Placement {
    pub const ALL: [Placement; 3] = [Placement::Wrist, Placement::Chest, Placement::Ankle];

    pub fn name(self) -> &'static str {
        match self {
            Placement::Wrist => "wrist",
            Placement::Chest => "chest",
            Placement::Ankle => "ankle",
        }
    }

    /// 0-based column where this placement's IMU block starts in a PAMAP2 row.
    fn block_start(self) -> usize {
        match self {
            Placement::Wrist => 3,
            Placement::Chest => 20,
            Placement::Ankle => 37,
        }
    }
}

impl SensorKind {
    pub const ALL: [SensorKind; 3] = [
        SensorKind::Accelerometer,
        SensorKind::Gyroscope,
        SensorKind::Magnetometer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensorKind::Accelerometer => "acc",
            SensorKind::Gyroscope => "gyro",
            SensorKind::Magnetometer => "mag",
        }
    }

    /// Offset of the x axis inside an IMU block. The accelerometer is the
    /// 16g-scale triplet; the 6g one saturates during running.
    fn block_offset(self) -> usize {
        match self {
            SensorKind::Accelerometer => 1,
            SensorKind::Gyroscope => 7,
            SensorKind::Magnetometer => 10,
        }
    }
}

/// Index of the first (x) channel of a sensor. Channels are laid out
/// placement-major, then sensor, then axis.
pub fn sensor_channel(placement: Placement, sensor: SensorKind) -> usize {
    (placement as usize) * 9 + (sensor as usize) * 3
}

pub fn channel_name(channel: usize) -> String {
    let placement = Placement::ALL[channel / 9];
    let sensor = SensorKind::ALL[(channel % 9) / 3];
    let axis = ["x", "y", "z"][channel % 3];
    format!("{}_{}_{}", placement.name(), sensor.name(), axis)
}

/// 0-based PAMAP2 column holding each retained channel.
fn source_columns() -> [usize; N_CHANNELS] {
    let mut cols = [0; N_CHANNELS];
    for p in Placement::ALL {
        for s in SensorKind::ALL {
            let base = sensor_channel(p, s);
            for axis in 0..3 {
                cols[base + axis] = p.block_start() + s.block_offset() + axis;
            }
        }
    }
    cols
}

/// One user's time-aligned recording.
///
/// Channel series, labels and timestamps always have the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSession {
    pub user_id: u8,
    pub frequency_hz: f64,
    pub channels: Vec<Vec<f64>>,
    pub labels: Vec<Activity>,
    pub timestamps: Vec<f64>,
}

/// A maximal stretch of consecutive samples with one activity and no
/// timing gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub activity: Activity,
    pub start: usize,
    pub len: usize,
}

impl SensorSession {
    pub fn new(
        user_id: u8,
        frequency_hz: f64,
        channels: Vec<Vec<f64>>,
        labels: Vec<Activity>,
        timestamps: Vec<f64>,
    ) -> Result<Self> {
        if channels.len() != N_CHANNELS {
            return Err(Error::DimensionMismatch {
                expected: N_CHANNELS,
                got: channels.len(),
            });
        }
        let n = labels.len();
        for series in channels.iter().map(Vec::len).chain([timestamps.len()]) {
            if series != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: series,
                });
            }
        }
        if !(frequency_hz > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sampling frequency must be positive, got {frequency_hz}"
            )));
        }
        Ok(SensorSession {
            user_id,
            frequency_hz,
            channels,
            labels,
            timestamps,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Splits the session into same-activity runs. A new run also starts
    /// whenever the timestamp gap exceeds 1.5 sample periods, so windows never
    /// bridge dropped or transient rows.
    pub fn runs(&self) -> Vec<Run> {
        let mut runs = Vec::new();
        if self.is_empty() {
            return runs;
        }
        let max_gap = 1.5 / self.frequency_hz;
        let mut start = 0;
        for i in 1..=self.len() {
            let boundary = i == self.len()
                || self.labels[i] != self.labels[start]
                || self.timestamps[i] - self.timestamps[i - 1] > max_gap;
            if boundary {
                runs.push(Run {
                    activity: self.labels[start],
                    start,
                    len: i - start,
                });
                start = i;
            }
        }
        runs
    }

    /// Per-activity sample counts, indexed canonically.
    pub fn activity_counts(&self) -> [usize; N_ACTIVITIES] {
        let mut counts = [0; N_ACTIVITIES];
        for a in &self.labels {
            counts[a.index()] += 1;
        }
        counts
    }

    fn select_rows(&self, keep: impl Fn(usize) -> bool) -> SensorSession {
        let rows: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        SensorSession {
            user_id: self.user_id,
            frequency_hz: self.frequency_hz,
            channels: self
                .channels
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            timestamps: rows.iter().map(|&i| self.timestamps[i]).collect(),
        }
    }
}

/// Label share of every activity over a set of sessions.
pub fn label_distribution<'a>(
    sessions: impl IntoIterator<Item = &'a SensorSession>,
) -> [f64; N_ACTIVITIES] {
    let mut counts = [0usize; N_ACTIVITIES];
    for s in sessions {
        for (c, n) in counts.iter_mut().zip(s.activity_counts()) {
            *c += n;
        }
    }
    let total: usize = counts.iter().sum();
    let mut dist = [0.0; N_ACTIVITIES];
    if total > 0 {
        for (d, c) in dist.iter_mut().zip(counts) {
            *d = c as f64 / total as f64;
        }
    }
    dist
}

/// Derives the user id from a PAMAP2 file name (`subject105.dat` is user 5).
fn user_from_path(path: &Path) -> Option<u8> {
    let stem = path.file_stem()?.to_str()?;
    let digits: String = stem
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let n: u32 = digits.parse().ok()?;
    u8::try_from(if n >= 100 { n % 100 } else { n }).ok()
}

/// Parses one PAMAP2 file. Transient rows are dropped, as are every column
/// except the accelerometer, gyroscope and magnetometer triplets.
pub fn parse_pamap2_file(path: &Path) -> Result<SensorSession> {
    let user_id = user_from_path(path).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "file name does not end in a subject number".into(),
    })?;
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_pamap2_reader(BufReader::new(file), user_id, path)
}

pub fn parse_pamap2_reader(
    reader: impl BufRead,
    user_id: u8,
    path: &Path,
) -> Result<SensorSession> {
    let cols = source_columns();
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); N_CHANNELS];
    let mut labels = Vec::new();
    let mut timestamps = Vec::new();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = [""; PAMAP2_COLUMNS];
        let mut width = 0;
        for token in line.split_ascii_whitespace() {
            if width < PAMAP2_COLUMNS {
                fields[width] = token;
            }
            width += 1;
        }
        if width != PAMAP2_COLUMNS {
            return Err(parse_err(
                lineno,
                format!("expected {PAMAP2_COLUMNS} columns, found {width}"),
            ));
        }
        let id: u32 = fields[1]
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && *v >= 0.0)
            .map(|v| v as u32)
            .ok_or_else(|| parse_err(lineno, format!("bad activity id {:?}", fields[1])))?;
        if id == TRANSIENT_ID {
            continue;
        }
        let activity = Activity::from_pamap_id(id)
            .ok_or_else(|| parse_err(lineno, format!("unknown activity id {id}")))?;
        let ts: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad timestamp {:?}", fields[0])))?;
        for (c, &col) in cols.iter().enumerate() {
            let v: f64 = fields[col].parse().map_err(|_| {
                parse_err(lineno, format!("bad value {:?} in column {}", fields[col], col + 1))
            })?;
            channels[c].push(v);
        }
        labels.push(activity);
        timestamps.push(ts);
    }
    SensorSession::new(user_id, BASE_HZ, channels, labels, timestamps)
}

/// Loads every `*.dat` / `*.txt` file in `dir` as one user session at
/// 100 Hz, ordered by user id. Files are parsed in parallel.
pub fn load_pamap2(dir: impl AsRef<Path>) -> Result<Vec<SensorSession>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("dat") | Some("txt")
                )
        })
        .collect();
    paths.sort();
    let mut sessions = paths
        .par_iter()
        .map(|p| parse_pamap2_file(p))
        .collect::<Result<Vec<_>>>()?;
    sessions.sort_by_key(|s| s.user_id);
    for pair in sessions.windows(2) {
        if pair[0].user_id == pair[1].user_id {
            return Err(Error::Parse {
                path: dir.to_path_buf(),
                line: 0,
                message: format!("more than one file for user {}", pair[0].user_id),
            });
        }
    }
    Ok(sessions)
}

/// How missing samples are repaired.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanPolicy {
    /// Rows where a whole sensor triplet is missing for longer than this are
    /// dropped instead of interpolated.
    pub max_gap_seconds: f64,
}

impl Default for CleanPolicy {
    fn default() -> Self {
        CleanPolicy {
            max_gap_seconds: 1.0,
        }
    }
}

/// Fills NaNs: linear interpolation inside a gap, nearest value at the
/// edges. Sensor dropouts longer than the policy's limit are removed first.
pub fn clean(session: &SensorSession, policy: &CleanPolicy) -> Result<SensorSession> {
    for (c, series) in session.channels.iter().enumerate() {
        if !series.is_empty() && !series.iter().any(|v| v.is_finite()) {
            return Err(Error::EmptyChannel {
                user: session.user_id,
                channel: channel_name(c),
            });
        }
    }
    let max_gap = (policy.max_gap_seconds * session.frequency_hz).floor() as usize;
    let mut drop = vec![false; session.len()];
    for sensor in 0..N_CHANNELS / 3 {
        let axes = &session.channels[sensor * 3..sensor * 3 + 3];
        let missing = |i: usize| axes.iter().all(|a| a[i].is_nan());
        let mut i = 0;
        while i < session.len() {
            if missing(i) {
                let start = i;
                while i < session.len() && missing(i) {
                    i += 1;
                }
                if i - start > max_gap {
                    drop[start..i].iter_mut().for_each(|d| *d = true);
                }
            } else {
                i += 1;
            }
        }
    }
    let mut out = if drop.iter().any(|&d| d) {
        session.select_rows(|i| !drop[i])
    } else {
        session.clone()
    };
    for (c, series) in out.channels.iter_mut().enumerate() {
        if !series.is_empty() && !series.iter().any(|v| v.is_finite()) {
            return Err(Error::EmptyChannel {
                user: session.user_id,
                channel: channel_name(c),
            });
        }
        fill_gaps(series);
    }
    Ok(out)
}

/// Linear interpolation of non-finite values by sample index.
pub fn fill_gaps(series: &mut [f64]) {
    let known: Vec<usize> = (0..series.len()).filter(|&i| series[i].is_finite()).collect();
    let (Some(&first), Some(&last)) = (known.first(), known.last()) else {
        return;
    };
    let (head, tail) = (series[first], series[last]);
    series[..first].iter_mut().for_each(|v| *v = head);
    series[last + 1..].iter_mut().for_each(|v| *v = tail);
    for pair in known.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a > 1 {
            let (va, vb) = (series[a], series[b]);
            let span = (b - a) as f64;
            for i in a + 1..b {
                series[i] = va + (vb - va) * (i - a) as f64 / span;
            }
        }
    }
}

/// Integral decimation ratio between two frequencies.
pub fn decimation_ratio(from_hz: f64, to_hz: f64) -> Result<usize> {
    let err = |reason: &str| Error::Resample {
        from: from_hz,
        to: to_hz,
        reason: reason.into(),
    };
    if !SUPPORTED_HZ.contains(&to_hz) {
        return Err(err("target frequency is not supported"));
    }
    let ratio = from_hz / to_hz;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 {
        return Err(err("ratio is not a positive integer"));
    }
    Ok(rounded as usize)
}

/// Keeps every r-th sample starting at index 0, where r = current / target.
pub fn downsample(session: &SensorSession, target_hz: f64) -> Result<SensorSession> {
    let ratio = decimation_ratio(session.frequency_hz, target_hz)?;
    if ratio == 1 {
        return Ok(session.clone());
    }
    let mut out = session.select_rows(|i| i % ratio == 0);
    out.frequency_hz = target_hz;
    Ok(out)
}

/// Leave-one-subject-out split: the held-out user's session and all others.
pub fn split_loso(
    sessions: &[SensorSession],
    test_user: u8,
) -> Result<(Vec<&SensorSession>, &SensorSession)> {
    let test = sessions
        .iter()
        .find(|s| s.user_id == test_user)
        .ok_or(Error::UnknownUser(test_user))?;
    let train = sessions.iter().filter(|s| s.user_id != test_user).collect();
    Ok((train, test))
}

/// Text row format used for the ingest cache and the timed test stream:
/// `timestamp label c1 .. c27`, space-separated, `label` as `A1`..`A12`.
pub fn format_sample_row(session: &SensorSession, i: usize, out: &mut String) {
    use std::fmt::Write;
    let _ = write!(out, "{} {}", session.timestamps[i], session.labels[i].code());
    for c in &session.channels {
        let _ = write!(out, " {}", c[i]);
    }
    out.push('\n');
}

/// Parses one row written by [`format_sample_row`] into `values`; returns the
/// timestamp and label.
pub fn parse_sample_row(line: &str, values: &mut [f64; N_CHANNELS]) -> Option<(f64, Activity)> {
    let mut it = line.split_ascii_whitespace();
    let ts = it.next()?.parse().ok()?;
    let label = it.next()?.parse().ok()?;
    for v in values.iter_mut() {
        *v = it.next()?.parse().ok()?;
    }
    if it.next().is_some() {
        return None;
    }
    Some((ts, label))
}

/// Writes a session in the sample row format with a one-line header.
pub fn write_session_rows(session: &SensorSession, out: &mut impl std::io::Write) -> std::io::Result<()> {
    let mut header = String::from("# timestamp label");
    for c in 0..N_CHANNELS {
        header.push(' ');
        header.push_str(&channel_name(c));
    }
    writeln!(out, "{header}")?;
    let mut buf = String::new();
    for i in 0..session.len() {
        buf.clear();
        format_sample_row(session, i, &mut buf);
        out.write_all(buf.as_bytes())?;
    }
    Ok(())
}
