//! Synthetic cohorts, scenario sweeps and the accuracy metrics used to compare
//! raw and smoothed estimates.

mod cohort;
mod config;
mod metrics;
mod scenario;
mod split;

pub use cohort::{simulate_cohort, true_survival, truncated_normal, SimulatedCohort};
pub use config::{s1_sweep, BootstrapSettings, MixtureComponent, Preset, ScenarioConfig};
pub use metrics::{evaluation_grid, identified_range, mean, median, relative_change, rise, rise_values, rmse_imputation};
pub use scenario::{
    run_replicate, run_scenario, scenario_pipeline, summarize, write_long_csv, ChangeSummary, Coverage,
    CoverageSummary, MethodMetrics, MethodSummary, ReplicateMetrics, ScenarioReport, METHODS,
};
pub use split::{run_split, SplitInput, SplitMetrics, SplitReport};
