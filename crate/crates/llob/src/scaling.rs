//! Process-wide memoised scaling function.

use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;

use llob_core::integral::{
    log_grid, scaling_function, ScalingTable, DEFAULT_STEPS, DEFAULT_TOL, TABLE_ETA_MAX, TABLE_ETA_MIN, TABLE_POINTS,
};

use crate::error::{CliError, Result};
use crate::io;

/// `F` at each `eta`, points solved in parallel.
pub fn evaluate(etas: &[f64], n_steps: usize, tol: f64) -> llob_core::Result<Vec<f64>> {
    etas.par_iter().map(|&eta| scaling_function(eta, n_steps, tol)).collect()
}

/// Same table as [`ScalingTable::build`], built in parallel.
pub fn build_table(n_steps: usize, tol: f64) -> llob_core::Result<ScalingTable> {
    let etas = log_grid(TABLE_POINTS, TABLE_ETA_MIN, TABLE_ETA_MAX);
    let values = evaluate(&etas, n_steps, tol)?;
    ScalingTable::from_samples(&etas, &values)
}

static TABLE: OnceLock<ScalingTable> = OnceLock::new();

/// The default table, built on first use.
pub fn table() -> &'static ScalingTable {
    TABLE.get_or_init(|| {
        log::info!("tabulating the scaling function ({TABLE_POINTS} points)");
        build_table(DEFAULT_STEPS, DEFAULT_TOL).expect("default solver settings are valid")
    })
}

/// A table read from an `eta,F` file, or the default one.
pub fn table_or_file(path: Option<&Path>) -> Result<ScalingTable> {
    match path {
        None => Ok(table().clone()),
        Some(p) => {
            let (etas, values) = io::read_scaling(p)?;
            ScalingTable::from_samples(&etas, &values).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}
