//! Verification harness for `orlicz-core`: seeded test-function families,
//! the verification suites, report emission and config handling behind the
//! `orlicz` binary.

pub mod config;
pub mod family;
pub mod oracle;
pub mod report;
pub mod suites;

pub use config::{ConfigFile, Format, Settings};
pub use family::{FunctionFamily, Generator, GridSpec};
pub use report::{RunReport, SuiteReport};
pub use suites::{run_suite, SUITES};
