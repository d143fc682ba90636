use serde::{Deserialize, Serialize};

use crate::dataset::BASE_HZ;
use crate::error::{Error, Result};
use crate::evaluation::{Configuration, K_VALUES, OVERLAPS_PCT, WINDOW_SIZES};
use crate::knn::Distance;

/// Value indices into the four axes: window size, overlap, k, distance.
pub type Genome = [usize; 4];

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchSpace {
    pub window_sizes: Vec<usize>,
    pub overlaps_pct: Vec<u8>,
    pub ks: Vec<usize>,
    pub distances: Vec<Distance>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self::full_grid()
    }
}

impl SearchSpace {
    /// The full study grid: 18 window sizes x 10 overlaps x 10 k x 3 metrics.
    pub fn full_grid() -> Self {
        SearchSpace {
            window_sizes: WINDOW_SIZES.to_vec(),
            overlaps_pct: OVERLAPS_PCT.to_vec(),
            ks: K_VALUES.to_vec(),
            distances: Distance::ALL.to_vec(),
        }
    }

    pub fn axis_lengths(&self) -> Genome {
        [
            self.window_sizes.len(),
            self.overlaps_pct.len(),
            self.ks.len(),
            self.distances.len(),
        ]
    }

    pub fn cardinality(&self) -> usize {
        self.axis_lengths().iter().product()
    }

    /// Every axis non-empty, free of duplicates and on the study grid.
    pub fn validate(&self) -> Result<()> {
        fn check<T: PartialEq + std::fmt::Debug>(name: &str, values: &[T], allowed: &[T]) -> Result<()> {
            if values.is_empty() {
                return Err(Error::InvalidConfig(format!("search axis {name} is empty")));
            }
            for (i, v) in values.iter().enumerate() {
                if !allowed.contains(v) {
                    return Err(Error::InvalidConfig(format!("{name} value {v:?} is off the grid")));
                }
                if values[..i].contains(v) {
                    return Err(Error::InvalidConfig(format!("{name} value {v:?} repeated")));
                }
            }
            Ok(())
        }
        check("window size", &self.window_sizes, &WINDOW_SIZES)?;
        check("overlap", &self.overlaps_pct, &OVERLAPS_PCT)?;
        check("k", &self.ks, &K_VALUES)?;
        check("distance", &self.distances, &Distance::ALL)?;
        Ok(())
    }

    pub fn decode(&self, genome: &Genome) -> Configuration {
        Configuration::new(
            self.window_sizes[genome[0]],
            self.overlaps_pct[genome[1]],
            self.ks[genome[2]],
            self.distances[genome[3]],
        )
    }

    pub fn encode(&self, config: &Configuration) -> Option<Genome> {
        Some([
            self.window_sizes.iter().position(|&v| v == config.window_size)?,
            self.overlaps_pct.iter().position(|&v| v == config.overlap_pct)?,
            self.ks.iter().position(|&v| v == config.k)?,
            self.distances.iter().position(|&v| v == config.distance)?,
        ])
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        self.encode(config).is_some()
    }
}

/// All configurations of `space` at 100 Hz, ordered by window size, then
/// overlap, k and distance.
pub fn enumerate_grid(space: &SearchSpace) -> Vec<Configuration> {
    let mut out = Vec::with_capacity(space.cardinality());
    for &ws in &space.window_sizes {
        for &ov in &space.overlaps_pct {
            for &k in &space.ks {
                for &d in &space.distances {
                    out.push(Configuration::new(ws, ov, k, d).at_frequencies(BASE_HZ, BASE_HZ));
                }
            }
        }
    }
    out
}
