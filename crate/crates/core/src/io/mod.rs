//! File formats: framework JSON, votes and observation CSVs, run
//! configuration files and CSV reports.

mod config;
mod framework;
mod tables;
mod votes;

pub use config::{load_config, parse_config, LambdaSpec, RunConfig};
pub use framework::{framework_to_json, load_framework, parse_framework, save_framework};
pub use tables::{
    histogram_table, load_posterior, parse_posterior, posterior_table, save_posterior, save_table,
    trace_table, Table,
};
pub use votes::{
    load_votes, observations_to_csv, parse_observations, NegativeCells, ObservationConvention,
    ObservationMode, Vote, VoteMatrix,
};
