//! Configuration, artifacts and the verification harness.

pub mod config;
pub mod manifest;
pub mod output;
pub mod suites;

pub use config::{parse_config, ConfigError, RunConfig, Suite};
pub use manifest::{write_atomic, Manifest, SuiteResult};
pub use suites::{flow_study, ladder_study, run_suite, verify_all, Fault};
