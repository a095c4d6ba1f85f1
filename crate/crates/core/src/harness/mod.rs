//! Scenario configuration, seeded replication, aggregation and output.
//!
//! A scenario is a JSON document with a `kind` discriminator, `master_seed`,
//! `replicates`, an optional `output_dir` and the parameters of that kind.
//! Unknown keys are rejected. Replicate `i` draws from the stream seeded by
//! [`crate::rng::derive_seed`]`(master_seed, i)`. Data files depend only on
//! the config; timestamps appear only in `manifest.json`.

mod config;
mod output;
mod run;
mod stats;

pub use config::{
    load_config, AbmParams, BasinParams, BifurcationParams, HysteresisParams, NetgrowthParams, ReplicatorParams,
    ScenarioConfig, ScenarioKind, ScenarioParams, TopologySpec,
};
pub use output::{fmt_real, summary_csv, write_outputs, Trace};
pub use run::{run_scenario, RunManifest, RunOptions, ScenarioOutput};
pub use stats::{aggregate, ks_pvalue, ks_uniform_statistic, MetricSummary, SummaryStats};
