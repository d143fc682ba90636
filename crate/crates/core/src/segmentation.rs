//! Fixed-size sliding windows over single-activity runs, and stratified
//! capping of the training window count.

use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activity::{Activity, N_ACTIVITIES};
use crate::dataset::SensorSession;
use crate::error::{Error, Result};

/// Window length in samples plus the overlap between consecutive windows,
/// in whole percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowSpec {
    pub size: usize,
    pub overlap_pct: u8,
}

impl WindowSpec {
    pub fn new(size: usize, overlap_pct: u8) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidConfig("window size must be positive".into()));
        }
        if overlap_pct >= 100 {
            return Err(Error::InvalidConfig(format!(
                "overlap must be below 100%, got {overlap_pct}%"
            )));
        }
        Ok(WindowSpec { size, overlap_pct })
    }

    /// `floor(size * (1 - overlap))` before clamping.
    pub fn raw_step(&self) -> usize {
        self.size * (100 - self.overlap_pct as usize) / 100
    }

    /// Distance between consecutive window starts, never below 1.
    pub fn step(&self) -> usize {
        self.raw_step().max(1)
    }

    pub fn overlap(&self) -> f64 {
        self.overlap_pct as f64 / 100.0
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} samples / {}% overlap", self.size, self.overlap_pct)
    }
}

/// Start offsets of every full window inside a run of `run_length` samples.
pub fn window_plan(run_length: usize, spec: &WindowSpec) -> Vec<usize> {
    if run_length < spec.size {
        return Vec::new();
    }
    (0..=run_length - spec.size).step_by(spec.step()).collect()
}

/// Number of windows [`window_plan`] produces, without allocating.
pub fn window_count(run_length: usize, spec: &WindowSpec) -> usize {
    if run_length < spec.size {
        0
    } else {
        (run_length - spec.size) / spec.step() + 1
    }
}

/// A window borrowed from a session. All samples lie inside one run.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub session: &'a SensorSession,
    pub activity: Activity,
    pub start: usize,
    pub len: usize,
}

impl<'a> Window<'a> {
    pub fn user_id(&self) -> u8 {
        self.session.user_id
    }

    pub fn channel(&self, c: usize) -> &'a [f64] {
        &self.session.channels[c][self.start..self.start + self.len]
    }

    fn sort_key(&self) -> (u8, Activity, usize) {
        (self.user_id(), self.activity, self.start)
    }
}

impl PartialEq for Window<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.session, other.session)
            && self.activity == other.activity
            && self.start == other.start
            && self.len == other.len
    }
}

/// Cuts every session into windows, run by run, in session order.
pub fn segment<'a>(
    sessions: impl IntoIterator<Item = &'a SensorSession>,
    spec: &WindowSpec,
) -> Vec<Window<'a>> {
    let mut windows = Vec::new();
    for session in sessions {
        for run in session.runs() {
            windows.extend(window_plan(run.len, spec).into_iter().map(|s| Window {
                session,
                activity: run.activity,
                start: run.start + s,
                len: spec.size,
            }));
        }
    }
    windows
}

/// Largest-remainder apportionment of `total` seats by `weights`.
/// Ties in the remainder go to the lower index.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut seats: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = seats.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        seats[i] += 1;
    }
    seats
}

/// Per-activity window counts for a capped set: largest-remainder shares of
/// `target`, limited by what is available. Seats an activity cannot fill go
/// to the activities furthest below their ideal share.
pub fn apportion(
    target: usize,
    reference: &[f64; N_ACTIVITIES],
    available: &[usize; N_ACTIVITIES],
) -> [usize; N_ACTIVITIES] {
    let mut counts = [0usize; N_ACTIVITIES];
    for (i, n) in largest_remainder(target, reference).into_iter().enumerate() {
        counts[i] = n.min(available[i]);
    }
    let total_available: usize = available.iter().sum();
    let mut missing = target.min(total_available) - counts.iter().sum::<usize>();
    while missing > 0 {
        let ideal = |i: usize| target as f64 * reference[i];
        let next = (0..N_ACTIVITIES)
            .filter(|&i| counts[i] < available[i])
            .max_by(|&a, &b| {
                (ideal(a) - counts[a] as f64)
                    .total_cmp(&(ideal(b) - counts[b] as f64))
                    .then(b.cmp(&a))
            })
            .expect("spare capacity exists while seats are missing");
        counts[next] += 1;
        missing -= 1;
    }
    counts
}

/// Reduces `windows` to `target` instances while keeping the activity mix of
/// `reference`.
///
/// Candidates are first sorted by (user, activity, start), so the result only
/// depends on the window set and the seed. Within an activity, windows are
/// drawn uniformly without replacement. The output keeps canonical order.
pub fn cap_instances<'a>(
    windows: &[Window<'a>],
    target: usize,
    reference: &[f64; N_ACTIVITIES],
    seed: u64,
) -> Result<Vec<Window<'a>>> {
    let sum: f64 = reference.iter().sum();
    if (sum - 1.0).abs() > 1e-6 || reference.iter().any(|p| *p < 0.0) {
        return Err(Error::InvalidConfig(format!(
            "reference distribution must be non-negative and sum to 1, sums to {sum}"
        )));
    }
    if target >= windows.len() {
        return Ok(windows.to_vec());
    }
    let mut sorted = windows.to_vec();
    sorted.sort_by_key(Window::sort_key);

    let mut by_activity: Vec<Vec<Window<'a>>> = vec![Vec::new(); N_ACTIVITIES];
    for w in sorted {
        by_activity[w.activity.index()].push(w);
    }
    let mut available = [0usize; N_ACTIVITIES];
    for (i, group) in by_activity.iter().enumerate() {
        if reference[i] > 0.0 && group.is_empty() {
            return Err(Error::MissingActivity(Activity::ALL[i]));
        }
        available[i] = group.len();
    }
    let present = available.iter().filter(|&&n| n > 0).count();
    if target < present {
        return Err(Error::InvalidConfig(format!(
            "cap of {target} is below the {present} activities present"
        )));
    }
    let counts = apportion(target, reference, &available);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(target);
    for (group, &n) in by_activity.iter().zip(counts.iter()) {
        let mut picked = index::sample(&mut rng, group.len(), n).into_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| group[i]));
    }
    out.sort_by_key(Window::sort_key);
    Ok(out)
}
