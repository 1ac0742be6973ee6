//! Configurable scenarios that tie the numerical modules together, and
//! their tabular output.

pub mod config;
pub mod data;
pub mod report;
pub mod scenarios;

pub use config::{DataKind, OperatorKind, ScenarioConfig, ScenarioKind};
pub use report::{Assertion, ScenarioResult, Table};
pub use scenarios::{run, run_counterexample, run_degiorgi_sweep, run_expint, run_main0, run_main1};
