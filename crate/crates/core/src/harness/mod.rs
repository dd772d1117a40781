//! Configuration, experiment plans, ensemble execution and result files.

mod fit;
mod plan;
mod run;

pub use fit::{fit_report, fit_rows, GroupFit, ScalingReport};
pub use plan::{
    canned_plans, cost_estimate, find_plan, mode_label, sphere_plan, stable_dt, CostEstimate, ExperimentPlan, RunMode,
    Variant, PLAN_SEED, SWEEP_DELTAS, VISCOSITIES,
};
pub use run::{
    read_sweep_csv, run_ensemble, run_plan, series_csv, sweep_csv, write_atomic, FileEntry, RunManifest, RunOptions,
    VariantRecord, MANIFEST_SCHEMA, SERIES_HEADER, SERIES_SCHEMA, SWEEP_HEADER, SWEEP_SCHEMA,
};

use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::SimConfig;

/// Reads a simulation configuration from a TOML file.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: SimConfig = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}
