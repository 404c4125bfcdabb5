//! File formats, configuration, the memoised scaling function and the
//! command line for [`llob_core`].

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod pipeline;
pub mod scaling;

pub use error::{CliError, Result};
