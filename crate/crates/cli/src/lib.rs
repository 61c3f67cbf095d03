//! Experiment runner for the `arcflow` simulator: JSON configurations,
//! single runs, parameter sweeps, admissibility checks and the blow-up lab.

// `!(x > 0.0)` is how NaN is made to fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod rescale;
pub mod sweep;

pub use config::{parse_config, preset, ExperimentConfig, Precision, PRESETS};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, Summary};
pub use sweep::{sweep, Grid, SweepRow};

use std::path::Path;

/// Loads a configuration file, or a built-in preset when no file of that
/// name exists.
pub fn load_config(arg: &str) -> Result<ExperimentConfig> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(c) = preset(arg) {
            return Ok(c);
        }
        return Err(CliError::Usage(format!(
            "`{arg}` is neither a file nor a preset ({})",
            PRESETS.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, arg)
}
