use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{BASE_HZ, SUPPORTED_HZ};
use crate::error::{Error, Result};
use crate::knn::Distance;
use crate::segmentation::WindowSpec;

pub const WINDOW_SIZES: [usize; 18] = [
    50, 100, 150, 200, 250, 300, 350, 400, 450, 500, 550, 600, 650, 700, 750, 800, 850, 900,
];
pub const OVERLAPS_PCT: [u8; 10] = [0, 10, 20, 30, 40, 50, 60, 70, 80, 90];
pub const K_VALUES: [usize; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// One point of the hyperparameter grid plus the train/test sampling
/// frequencies. `window_size` is counted in samples at 100 Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub window_size: usize,
    pub overlap_pct: u8,
    pub k: usize,
    pub distance: Distance,
    pub train_hz: f64,
    pub test_hz: f64,
}

/// Window geometry of a configuration once the window duration is carried
/// over to another sampling frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RescaledWindow {
    pub size: usize,
    pub step: usize,
}

impl RescaledWindow {
    /// At least two samples per window and a step of at least one sample.
    pub fn is_valid(&self) -> bool {
        self.size >= 2 && self.step >= 1
    }
}

impl Configuration {
    pub fn new(window_size: usize, overlap_pct: u8, k: usize, distance: Distance) -> Self {
        Configuration {
            window_size,
            overlap_pct,
            k,
            distance,
            train_hz: BASE_HZ,
            test_hz: BASE_HZ,
        }
    }

    pub fn at_frequencies(mut self, train_hz: f64, test_hz: f64) -> Self {
        self.train_hz = train_hz;
        self.test_hz = test_hz;
        self
    }

    /// Stable key: position of the four hyperparameters in the full grid,
    /// ordered window size, overlap, k, distance. Frequencies are not part
    /// of the key.
    pub fn config_id(&self) -> Option<u32> {
        let ws = WINDOW_SIZES.iter().position(|&w| w == self.window_size)?;
        let ov = OVERLAPS_PCT.iter().position(|&o| o == self.overlap_pct)?;
        let k = K_VALUES.iter().position(|&k| k == self.k)?;
        let d = Distance::ALL.iter().position(|&d| d == self.distance)?;
        Some((((ws * OVERLAPS_PCT.len() + ov) * K_VALUES.len() + k) * Distance::ALL.len() + d) as u32)
    }

    pub fn from_config_id(id: u32) -> Option<Self> {
        let mut rest = id as usize;
        let d = rest % Distance::ALL.len();
        rest /= Distance::ALL.len();
        let k = rest % K_VALUES.len();
        rest /= K_VALUES.len();
        let ov = rest % OVERLAPS_PCT.len();
        rest /= OVERLAPS_PCT.len();
        let ws = *WINDOW_SIZES.get(rest)?;
        Some(Configuration::new(ws, OVERLAPS_PCT[ov], K_VALUES[k], Distance::ALL[d]))
    }

    /// Window size and step at `hz`, keeping the window duration fixed.
    pub fn rescaled(&self, hz: f64) -> RescaledWindow {
        let size = (self.window_size as f64 * hz / BASE_HZ + 1e-9).floor() as usize;
        let step = size * (100 - self.overlap_pct.min(100) as usize) / 100;
        RescaledWindow { size, step }
    }

    pub fn window_at(&self, hz: f64) -> Result<WindowSpec> {
        let r = self.rescaled(hz);
        if !r.is_valid() {
            return Err(Error::InvalidConfig(format!(
                "{self} gives {} samples with step {} at {hz} Hz",
                r.size, r.step
            )));
        }
        WindowSpec::new(r.size, self.overlap_pct)
    }

    /// Checks grid membership, frequencies and the rescaled windows.
    pub fn validate(&self) -> Result<()> {
        if self.config_id().is_none() {
            return Err(Error::InvalidConfig(format!("{self} is not on the hyperparameter grid")));
        }
        for hz in [self.train_hz, self.test_hz] {
            if !SUPPORTED_HZ.contains(&hz) {
                return Err(Error::InvalidConfig(format!("unsupported frequency {hz} Hz")));
            }
        }
        self.window_at(self.train_hz)?;
        self.window_at(self.test_hz)?;
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ws={} ov={}% k={} {} train={}Hz test={}Hz",
            self.window_size, self.overlap_pct, self.k, self.distance, self.train_hz, self.test_hz
        )
    }
}

/// Number of configurations whose window stays valid at `hz`.
pub fn count_valid_at<'a>(configs: impl IntoIterator<Item = &'a Configuration>, hz: f64) -> usize {
    configs.into_iter().filter(|c| c.rescaled(hz).is_valid()).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_ids_are_a_bijection_over_the_grid() {
        let mut seen = vec![false; 5400];
        for &ws in &WINDOW_SIZES {
            for &ov in &OVERLAPS_PCT {
                for &k in &K_VALUES {
                    for d in Distance::ALL {
                        let c = Configuration::new(ws, ov, k, d);
                        let id = c.config_id().unwrap() as usize;
                        assert!(!seen[id]);
                        seen[id] = true;
                        assert_eq!(Configuration::from_config_id(id as u32), Some(c));
                    }
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(Configuration::from_config_id(5400), None);
        assert_eq!(Configuration::new(55, 0, 1, Distance::Euclidean).config_id(), None);
    }

    #[test]
    fn rescaling_keeps_duration() {
        let c = Configuration::new(900, 50, 10, Distance::Manhattan);
        assert_eq!(c.rescaled(100.0), RescaledWindow { size: 900, step: 450 });
        assert_eq!(c.rescaled(25.0), RescaledWindow { size: 225, step: 112 });
        assert_eq!(c.rescaled(12.5), RescaledWindow { size: 112, step: 56 });
        assert_eq!(c.rescaled(1.0), RescaledWindow { size: 9, step: 4 });
        let small = Configuration::new(150, 0, 1, Distance::Euclidean);
        assert!(!small.rescaled(1.0).is_valid());
        assert!(small.at_frequencies(100.0, 1.0).validate().is_err());
        let tight = Configuration::new(200, 60, 1, Distance::Euclidean);
        assert_eq!(tight.rescaled(1.0), RescaledWindow { size: 2, step: 0 });
        let edge = Configuration::new(500, 80, 1, Distance::Euclidean);
        assert_eq!(edge.rescaled(1.0), RescaledWindow { size: 5, step: 1 });
    }

    #[test]
    fn validate_rejects_off_grid_values() {
        assert!(Configuration::new(900, 0, 9, Distance::Manhattan).validate().is_ok());
        assert!(Configuration::new(900, 0, 0, Distance::Manhattan).validate().is_err());
        assert!(Configuration::new(900, 5, 9, Distance::Manhattan).validate().is_err());
        assert!(Configuration::new(900, 0, 9, Distance::Manhattan)
            .at_frequencies(100.0, 30.0)
            .validate()
            .is_err());
    }
}
