//! Experiment orchestration: configuration, single runs, η-sweeps against a
//! fine-grid local reference, the stability probe, CSV output and the plot
//! script.

pub mod config;
mod experiment;
mod output;
mod plot;

pub use config::{parse_config, to_toml, ExperimentConfig};
pub use experiment::{
    eta_dir_name, grid_for_eta, perturb_datum, reference_grid, run_single, run_stability_probe,
    run_sweep, sweep_outputs, ProbeRow, RunCounter, RunDiagnostics, SingleRun, SweepOutcome,
    SweepRow,
};
pub use output::{
    DIAGNOSTICS_HEADER, PROBE_HEADER, SNAPSHOTS_HEADER, SWEEP_HEADER, TV_SERIES_HEADER,
};
pub use plot::emit_plot_script;

use std::path::Path;

use crate::error::{Error, Result};

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
