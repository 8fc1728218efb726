//! Scenario registry, seeded batch execution, aggregation and CSV output.

pub mod csv_io;
pub mod metrics;
pub mod overrides;
pub mod runner;
pub mod scenario;
pub mod series;

pub use csv_io::{read_aggregate, read_series, write_aggregate, write_series};
pub use overrides::{apply_overrides, ConfigFile};
pub use runner::{reward, run_batch, run_simulation, BatchResult, RewardKind};
pub use scenario::{
    builtin_scenarios, figure_bundles, find_figure, find_scenario, AgentSpec, BundleEntry,
    FigureBundle, Scenario,
};
pub use series::{aggregate, AggregateRecord, AggregateSeries, Stat, StepRecord, TimeSeries};
