//! Configuration, experiment runners and result output for `relaysel`.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{load_config, to_document, ConfigError, ScenarioConfig};
pub use experiment::{run_experiment, ExperimentKind, ExperimentOutput, ResultRow, ResultsTable, RunError, RunOptions};
pub use output::{write_csv, write_plot_data, write_results, OutputError};
