use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{Configuration, EvaluationResult};
use crate::knn::Distance;

/// The hyperparameter varied by a one-axis sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    WindowSize,
    Overlap,
    K,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 3] = [SweepAxis::WindowSize, SweepAxis::Overlap, SweepAxis::K];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::WindowSize => "window_size",
            SweepAxis::Overlap => "overlap",
            SweepAxis::K => "k",
        }
    }

    /// `base` with this axis set to `value` (overlap in percent).
    pub fn apply(self, base: &Configuration, value: usize) -> Result<Configuration> {
        let mut c = *base;
        match self {
            SweepAxis::WindowSize => c.window_size = value,
            SweepAxis::Overlap => {
                c.overlap_pct = u8::try_from(value)
                    .map_err(|_| Error::InvalidConfig(format!("overlap {value}% out of range")))?
            }
            SweepAxis::K => c.k = value,
        }
        Ok(c)
    }

    pub fn value_of(self, c: &Configuration) -> usize {
        match self {
            SweepAxis::WindowSize => c.window_size,
            SweepAxis::Overlap => c.overlap_pct as usize,
            SweepAxis::K => c.k,
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "window_size" | "window" | "ws" => Ok(SweepAxis::WindowSize),
            "overlap" | "ov" => Ok(SweepAxis::Overlap),
            "k" => Ok(SweepAxis::K),
            other => Err(format!("unknown sweep axis {other:?}")),
        }
    }
}

/// Sweep values and the fixed base configuration of the reference study's
/// individual-influence experiments. The distance is not stated there;
/// Manhattan is used.
pub fn reference_sweep(axis: SweepAxis) -> (Vec<usize>, Configuration) {
    match axis {
        SweepAxis::WindowSize => (
            vec![100, 150, 250, 300, 350, 500, 550, 600, 650, 750, 800, 850, 900],
            Configuration::new(250, 50, 10, Distance::Manhattan),
        ),
        SweepAxis::Overlap => (
            vec![0, 10, 30, 40, 60, 70, 80, 90],
            Configuration::new(250, 80, 9, Distance::Manhattan),
        ),
        SweepAxis::K => (vec![1, 2, 3, 5, 6, 9, 10], Configuration::new(250, 80, 10, Distance::Manhattan)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub result: EvaluationResult,
}

/// Evaluates `base` once per value of `axis`. Values that give an invalid
/// configuration are skipped with a warning; evaluator errors propagate.
pub fn fixed_value_sweep<F>(axis: SweepAxis, values: &[usize], base: &Configuration, evaluate: F) -> Result<Vec<SweepPoint>>
where
    F: Fn(&Configuration) -> Result<EvaluationResult>,
{
    let mut out = Vec::with_capacity(values.len());
    for &value in values {
        let config = match axis.apply(base, value).and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("skipping {} = {value}: {e}", axis.name());
                continue;
            }
        };
        out.push(SweepPoint {
            value,
            result: evaluate(&config)?,
        });
    }
    Ok(out)
}

/// Accuracy of one user for every (train, test) frequency pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    pub user: u8,
    pub train_hz: Vec<f64>,
    pub test_hz: Vec<f64>,
    /// `cells[train][test]`; `None` where the rescaled window is invalid.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl FrequencyMatrix {
    fn extreme(&self, better: impl Fn(f64, f64) -> bool) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, row) in self.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(v) = *cell {
                    if best.is_none_or(|b| better(v, b.2)) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        best
    }

    /// `(train index, test index, accuracy)` of the best valid cell; the
    /// first in row-major order on ties.
    pub fn max_cell(&self) -> Option<(usize, usize, f64)> {
        self.extreme(|a, b| a > b)
    }

    pub fn min_cell(&self) -> Option<(usize, usize, f64)> {
        self.extreme(|a, b| a < b)
    }
}

/// Builds one matrix per user. A cell whose configuration is invalid at
/// either frequency, or that leaves a class without windows, is `None`.
pub fn frequency_matrix<F>(
    users: &[u8],
    train_freqs: &[f64],
    test_freqs: &[f64],
    config: &Configuration,
    evaluate: F,
) -> Result<Vec<FrequencyMatrix>>
where
    F: Fn(&Configuration, u8) -> Result<EvaluationResult>,
{
    if train_freqs.is_empty() || test_freqs.is_empty() {
        return Err(Error::Empty("frequency list"));
    }
    let mut out = Vec::with_capacity(users.len());
    for &user in users {
        let mut cells = Vec::with_capacity(train_freqs.len());
        for &tr in train_freqs {
            let mut row = Vec::with_capacity(test_freqs.len());
            for &te in test_freqs {
                let c = config.at_frequencies(tr, te);
                let cell = match c.validate().and_then(|_| evaluate(&c, user)) {
                    Ok(r) => Some(r.accuracy),
                    Err(e @ (Error::InvalidConfig(_) | Error::NoInstances(_))) => {
                        log::warn!("user {user} train {tr} Hz test {te} Hz: {e}");
                        None
                    }
                    Err(e) => return Err(e),
                };
                row.push(cell);
            }
            cells.push(row);
        }
        out.push(FrequencyMatrix {
            user,
            train_hz: train_freqs.to_vec(),
            test_hz: test_freqs.to_vec(),
            cells,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{ConfusionMatrix, ResponseReport};

    fn fake(c: &Configuration) -> Result<EvaluationResult> {
        Ok(EvaluationResult {
            config_id: c.config_id().unwrap(),
            config: *c,
            test_user: 1,
            accuracy: c.window_size as f64 / 1000.0 + c.train_hz / 1e4 - c.test_hz / 1e5,
            f1_per_activity: [None; 12],
            macro_f1: 0.0,
            mean_response_ms: c.window_size as f64,
            energy_mj: 0.0,
            n_train: 0,
            n_test: 0,
            response: ResponseReport::default(),
            confusion: ConfusionMatrix::default(),
        })
    }

    #[test]
    fn reference_sweep_rows() {
        let (ks, base) = reference_sweep(SweepAxis::K);
        assert_eq!(ks, vec![1, 2, 3, 5, 6, 9, 10]);
        let pts = fixed_value_sweep(SweepAxis::K, &ks, &base, fake).unwrap();
        assert_eq!(pts.len(), 7);
        assert!(pts.iter().zip(&ks).all(|(p, &k)| p.value == k && p.result.config.k == k));
        for axis in SweepAxis::ALL {
            let (values, base) = reference_sweep(axis);
            assert!(base.validate().is_ok());
            assert_eq!(fixed_value_sweep(axis, &values, &base, fake).unwrap().len(), values.len());
        }
    }

    #[test]
    fn singleton_and_invalid_values() {
        let base = Configuration::new(250, 50, 10, Distance::Manhattan);
        assert_eq!(fixed_value_sweep(SweepAxis::WindowSize, &[300], &base, fake).unwrap().len(), 1);
        // at 1 Hz a 150-sample window is one sample long
        let slow = base.at_frequencies(1.0, 1.0);
        let pts = fixed_value_sweep(SweepAxis::WindowSize, &[150, 300, 900], &slow, fake).unwrap();
        assert_eq!(pts.iter().map(|p| p.value).collect::<Vec<_>>(), vec![300, 900]);
        // off-grid k is skipped too
        assert_eq!(fixed_value_sweep(SweepAxis::K, &[3, 11], &base, fake).unwrap().len(), 1);
    }

    #[test]
    fn evaluator_errors_propagate() {
        let base = Configuration::new(250, 50, 10, Distance::Manhattan);
        let failing = |_: &Configuration| -> Result<EvaluationResult> { Err(Error::Empty("x")) };
        assert!(fixed_value_sweep(SweepAxis::K, &[1], &base, failing).is_err());
    }

    #[test]
    fn matrix_shape_and_extremes() {
        let c = Configuration::new(200, 50, 5, Distance::Euclidean);
        let m = frequency_matrix(&[3, 4], &[100.0, 1.0], &[100.0, 50.0, 1.0], &c, |c, _| fake(c)).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].user, 3);
        assert_eq!(m[0].cells.len(), 2);
        assert!(m[0].cells.iter().all(|r| r.len() == 3));
        // 200 samples at 1 Hz is 2 samples with step 1: valid
        assert!(m[0].cells[1][2].is_some());
        assert_eq!(m[0].max_cell().map(|x| (x.0, x.1)), Some((0, 2)));
        assert_eq!(m[0].min_cell().map(|x| (x.0, x.1)), Some((1, 0)));
        let tiny = Configuration::new(100, 50, 5, Distance::Euclidean);
        let m = frequency_matrix(&[1], &[100.0, 1.0], &[100.0, 1.0], &tiny, |c, _| fake(c)).unwrap();
        assert!(m[0].cells[0][0].is_some());
        assert!(m[0].cells[0][1].is_none() && m[0].cells[1][0].is_none() && m[0].cells[1][1].is_none());
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("window-size".parse::<SweepAxis>().unwrap(), SweepAxis::WindowSize);
        assert_eq!("OV".parse::<SweepAxis>().unwrap(), SweepAxis::Overlap);
        assert!("distance".parse::<SweepAxis>().is_err());
    }
}
