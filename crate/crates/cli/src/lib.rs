//! Scenario runner, backend comparison and fitting front end for the
//! `phase-qubit` model, shared by the `phase-qubit` binary and its tests.

pub mod analysis;
pub mod compare;
pub mod error;
pub mod fit;
pub mod presets;
pub mod scenario;

pub use compare::{compare_backends, CompareReport};
pub use error::CliError;
pub use fit::{fit_report_json, run_fit, FitRequest};
pub use presets::{preset, presets, Preset};
pub use scenario::{run_scenario, Format, Grid, RunOutput, Scenario, Summary};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHASEQUBIT_OUT_DIR";
