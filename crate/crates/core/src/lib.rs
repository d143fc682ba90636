//! Building blocks for studying how window size, overlap, k, distance and
//! sampling frequency shape a kNN activity recognizer on PAMAP2-style data.
//!
//! The pipeline is `dataset` -> `segmentation` -> `features` -> `knn`,
//! driven per held-out user by `evaluation` and explored by `search`.

pub mod activity;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod knn;
pub mod report;
pub mod search;
pub mod segmentation;
pub mod synth;

pub use activity::Activity;
pub use dataset::SensorSession;
pub use error::{Error, Result};
pub use evaluation::{Configuration, EvaluationResult};
pub use features::{FeatureVector, Normalizer};
pub use knn::{Distance, KnnModel};
pub use segmentation::{Window, WindowSpec};
