//! Instance-based classifier: stores the training vectors and labels a query
//! by majority vote of its k nearest instances.
//!
//! Ordering is fully deterministic. Equal distances rank the lower instance
//! index first. A vote tie goes to the label whose nearest member is closest,
//! then to the label that comes first canonically.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activity::{Activity, N_ACTIVITIES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Distance {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Distance {
    pub const ALL: [Distance; 3] = [Distance::Euclidean, Distance::Manhattan, Distance::Chebyshev];

    pub fn name(self) -> &'static str {
        match self {
            Distance::Euclidean => "euclidean",
            Distance::Manhattan => "manhattan",
            Distance::Chebyshev => "chebyshev",
        }
    }

    /// Distance between two equally long vectors. Callers check lengths.
    #[inline]
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Distance::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Distance::Chebyshev => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Distance::Euclidean),
            "manhattan" => Ok(Distance::Manhattan),
            "chebyshev" => Ok(Distance::Chebyshev),
            other => Err(format!("unknown distance {other:?}")),
        }
    }
}

pub fn distance(a: &[f64], b: &[f64], metric: Distance) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(metric.eval(a, b))
}

/// Immutable memory of labelled instances, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    dim: usize,
    data: Vec<f64>,
    labels: Vec<Activity>,
    distance: Distance,
}

impl KnnModel {
    /// Stores at most `max_instances` rows, keeping the earliest ones.
    pub fn build<'a, I>(instances: I, max_instances: usize, distance: Distance) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [f64], Activity)>,
    {
        let mut iter = instances.into_iter().take(max_instances).peekable();
        let dim = match iter.peek() {
            Some((v, _)) => v.len(),
            None => return Err(Error::Empty("kNN model needs at least one instance")),
        };
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (v, label) in iter {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            data.extend_from_slice(v);
            labels.push(label);
        }
        Ok(KnnModel {
            dim,
            data,
            labels,
            distance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    pub fn instance(&self, i: usize) -> (&[f64], Activity) {
        (&self.data[i * self.dim..(i + 1) * self.dim], self.labels[i])
    }

    /// The k nearest instances as (distance, index), nearest first.
    pub fn neighbours(&self, query: &[f64], k: usize) -> Result<Vec<(f64, usize)>> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        if k == 0 || k > self.len() {
            return Err(Error::InvalidK {
                k,
                instances: self.len(),
            });
        }
        let mut scored: Vec<(f64, usize)> = self
            .data
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, row)| (self.distance.eval(query, row), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);
        Ok(scored)
    }

    pub fn predict(&self, query: &[f64], k: usize) -> Result<Activity> {
        let neighbours = self.neighbours(query, k)?;
        Ok(vote(neighbours.iter().map(|&(d, i)| (d, self.labels[i]))))
    }

    /// Element-wise [`predict`](Self::predict), computed in parallel.
    pub fn predict_batch(&self, queries: &[Vec<f64>], k: usize) -> Result<Vec<Activity>> {
        queries.par_iter().map(|q| self.predict(q, k)).collect()
    }

    /// One instance per row: the feature values then the activity code.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.len() {
            let (row, label) = self.instance(i);
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.code());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<model csv>", e))?;
        Ok(())
    }

    pub fn read_csv(input: impl BufRead, distance: Distance) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        let mut rows: Vec<(Vec<f64>, Activity)> = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let bad = |message: String| Error::Parse {
                path: "<model csv>".into(),
                line: line + 1,
                message,
            };
            let (label, values) = record
                .iter()
                .collect::<Vec<_>>()
                .split_last()
                .map(|(l, v)| (l.to_string(), v.to_vec()))
                .ok_or_else(|| bad("empty row".into()))?;
            let label: Activity = label.parse().map_err(bad)?;
            let values = values
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| bad(format!("{v:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push((values, label));
        }
        let n = rows.len();
        Self::build(rows.iter().map(|(v, l)| (v.as_slice(), *l)), n, distance)
    }
}

/// Majority vote over (distance, label) pairs given nearest first.
pub fn vote(neighbours: impl IntoIterator<Item = (f64, Activity)>) -> Activity {
    let mut counts = [0usize; N_ACTIVITIES];
    let mut nearest = [f64::INFINITY; N_ACTIVITIES];
    for (d, label) in neighbours {
        let i = label.index();
        counts[i] += 1;
        nearest[i] = nearest[i].min(d);
    }
    let best = (0..N_ACTIVITIES)
        .filter(|&i| counts[i] > 0)
        .min_by(|&a, &b| {
            counts[b]
                .cmp(&counts[a])
                .then(nearest[a].total_cmp(&nearest[b]))
                .then(a.cmp(&b))
        })
        .expect("at least one neighbour");
    Activity::ALL[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(rows: &[(Vec<f64>, Activity)], metric: Distance) -> KnnModel {
        KnnModel::build(rows.iter().map(|(v, l)| (v.as_slice(), *l)), usize::MAX, metric).unwrap()
    }

    #[test]
    fn distance_examples() {
        let (a, b) = ([0.0, 0.0], [3.0, 4.0]);
        assert_eq!(distance(&a, &b, Distance::Euclidean).unwrap(), 5.0);
        assert_eq!(distance(&a, &b, Distance::Manhattan).unwrap(), 7.0);
        assert_eq!(distance(&a, &b, Distance::Chebyshev).unwrap(), 4.0);
        for m in Distance::ALL {
            assert_eq!(distance(&b, &b, m).unwrap(), 0.0);
        }
        assert!(distance(&a, &[1.0], Distance::Euclidean).is_err());
    }

    #[test]
    fn build_truncates_and_validates() {
        let rows: Vec<(Vec<f64>, Activity)> = (0..5).map(|i| (vec![i as f64], Activity::Lying)).collect();
        let m = KnnModel::build(rows.iter().map(|(v, l)| (v.as_slice(), *l)), 3, Distance::Euclidean).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.instance(2).0, &[2.0]);
        let all = KnnModel::build(rows.iter().map(|(v, l)| (v.as_slice(), *l)), 10, Distance::Euclidean).unwrap();
        assert_eq!(all.len(), 5);
        let empty: Vec<(&[f64], Activity)> = Vec::new();
        assert!(KnnModel::build(empty, 3, Distance::Euclidean).is_err());
        let ragged = [(vec![1.0, 2.0], Activity::Lying), (vec![1.0], Activity::Lying)];
        assert!(matches!(
            KnnModel::build(ragged.iter().map(|(v, l)| (v.as_slice(), *l)), 3, Distance::Euclidean),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn predict_examples() {
        let a = Activity::Walking;
        let b = Activity::Running;
        let m = model(&[(vec![0.0], a), (vec![1.0], a), (vec![10.0], b)], Distance::Euclidean);
        assert_eq!(m.predict(&[0.4], 3).unwrap(), a);
        assert_eq!(m.predict(&[10.0], 1).unwrap(), b);
        assert!(matches!(m.predict(&[0.0], 4), Err(Error::InvalidK { .. })));
        assert!(matches!(m.predict(&[0.0], 0), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn vote_ties() {
        // 1-1 tie: closest member wins even though it is canonically later
        let m = model(
            &[(vec![0.0], Activity::Walking), (vec![3.0], Activity::Cycling)],
            Distance::Manhattan,
        );
        assert_eq!(m.predict(&[1.0], 2).unwrap(), Activity::Walking);
        // equal nearest distances: canonical order decides
        let m = model(
            &[(vec![-1.0], Activity::Walking), (vec![1.0], Activity::Cycling)],
            Distance::Manhattan,
        );
        assert_eq!(m.predict(&[0.0], 2).unwrap(), Activity::Cycling);
        // distance tie at the k boundary: lower index is taken
        let m = model(
            &[(vec![1.0], Activity::Walking), (vec![-1.0], Activity::Cycling)],
            Distance::Manhattan,
        );
        assert_eq!(m.predict(&[0.0], 1).unwrap(), Activity::Walking);
    }

    #[test]
    fn batch_edge_cases() {
        let m = model(&[(vec![0.0], Activity::Lying), (vec![1.0], Activity::Sitting)], Distance::Euclidean);
        assert!(m.predict_batch(&[], 1).unwrap().is_empty());
        assert_eq!(m.predict_batch(&[vec![0.9]], 1).unwrap(), vec![m.predict(&[0.9], 1).unwrap()]);
    }

    #[test]
    fn csv_round_trip() {
        let m = model(
            &[(vec![0.1, 1.0 / 3.0], Activity::Lying), (vec![2.5, -7.0], Activity::RopeJumping)],
            Distance::Chebyshev,
        );
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = KnnModel::read_csv(buf.as_slice(), Distance::Chebyshev).unwrap();
        assert_eq!(back, m);
    }

    fn labelled_rows(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<(Vec<f64>, Activity)>> {
        (1..=max_d).prop_flat_map(move |d| {
            proptest::collection::vec(
                (proptest::collection::vec(0i32..8, d), 0usize..4),
                1..=max_n,
            )
            .prop_map(|rows| {
                rows.into_iter()
                    .map(|(v, l)| (v.into_iter().map(|x| x as f64 * 0.5).collect(), Activity::ALL[l * 3]))
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn norm_inequality(a in proptest::collection::vec(-10.0f64..10.0, 1..12), shift in proptest::collection::vec(-10.0f64..10.0, 12)) {
            let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
            let c = distance(&a, &b, Distance::Chebyshev).unwrap();
            let e = distance(&a, &b, Distance::Euclidean).unwrap();
            let m = distance(&a, &b, Distance::Manhattan).unwrap();
            prop_assert!(c <= e + 1e-12 && e <= m + 1e-12);
        }

        #[test]
        fn batch_equals_sequential(rows in labelled_rows(40, 4), k in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = rows[0].0.len();
            let m = model(&rows, Distance::Euclidean);
            let k = k.min(m.len());
            let queries: Vec<Vec<f64>> = (0..50).map(|_| (0..d).map(|_| rng.gen_range(0.0..4.0)).collect()).collect();
            let batch = m.predict_batch(&queries, k).unwrap();
            let seq: Vec<Activity> = queries.iter().map(|q| m.predict(q, k).unwrap()).collect();
            prop_assert_eq!(batch, seq);
        }

        #[test]
        fn positive_scaling_preserves_predictions(rows in labelled_rows(30, 3), k in 1usize..6, exp in -4i32..5) {
            let d = rows[0].0.len();
            let k = k.min(rows.len());
            // powers of two keep the arithmetic exact, so ties survive scaling
            let scale = 2f64.powi(exp);
            let scaled: Vec<(Vec<f64>, Activity)> = rows.iter().map(|(v, l)| (v.iter().map(|x| x * scale).collect(), *l)).collect();
            for metric in Distance::ALL {
                let m = model(&rows, metric);
                let ms = model(&scaled, metric);
                let q = vec![1.25; d];
                let qs = vec![1.25 * scale; d];
                prop_assert_eq!(m.predict(&q, k).unwrap(), ms.predict(&qs, k).unwrap());
            }
        }
    }
}
