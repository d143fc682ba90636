//! End-to-end evaluation of one configuration for one held-out user:
//! accuracy, per-activity F1, per-inference response time and energy.

mod config;
mod metrics;
mod pipeline;
mod timing;

pub use config::{count_valid_at, Configuration, RescaledWindow, K_VALUES, OVERLAPS_PCT, WINDOW_SIZES};
pub use metrics::{f1_scores, ConfusionMatrix, F1Report};
pub use pipeline::{
    dataset_minimum_instances, evaluate_config, predict_session, train_fold, EvaluationOptions,
    EvaluationResult, InstanceCap, LosoEvaluator, StreamPipeline, TrainedFold, REFERENCE_INSTANCE_CAP,
};
pub use timing::{
    estimate_energy, measure_response, ConstantPowerMeter, EnergyMeter, InferencePipeline,
    ResponseReport, DEFAULT_POWER_WATTS, DEFAULT_WARMUP,
};
