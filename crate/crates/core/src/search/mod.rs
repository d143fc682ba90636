//! Exploration of the hyperparameter grid: exhaustive enumeration, NSGA-II,
//! Pareto fronts, variance-based importance, correlations and one-axis
//! sweeps.

mod importance;
mod nsga2;
mod pareto;
mod space;
mod stats;
mod sweep;

pub use importance::{grid_anova, hyperparameter_importance, AnovaShares, ImportanceReport, Hyperparameter};
pub use nsga2::{crowding_distance, non_dominated_sort, nsga2_search, Nsga2Options, SearchOutcome, Trial};
pub use pareto::{dominates, pareto_front, pareto_indices, Direction, Objective, ParetoPoint};
pub use space::{enumerate_grid, Genome, SearchSpace};
pub use stats::pearson_correlation;
pub use sweep::{fixed_value_sweep, frequency_matrix, reference_sweep, FrequencyMatrix, SweepAxis, SweepPoint};
