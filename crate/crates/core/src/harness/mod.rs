//! Monte Carlo experiments that reproduce the distance-CDF and SINR
//! figures, with result tables and embedded acceptance tolerances.

mod config;
mod output;
mod run;
mod stats;

pub use config::*;
pub use output::{render_csv, write_outputs};
pub use run::*;
pub use stats::*;
