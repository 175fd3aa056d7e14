//! Standard-library companion to `apeps-core`: configuration files, CSV log
//! writers, SVG charts, the experiment sweep runner, and the CLI.

pub mod cli;
pub mod configfile;
pub mod error;
pub mod experiment;
pub mod logs;
pub mod svg;

pub use cli::run_cli;
pub use configfile::{apply_overrides, parse_config_text, ConfigFileError, ConfigOverlay};
pub use error::ToolError;
pub use experiment::{run_experiment, run_single, ExperimentName, ExperimentSpec};
