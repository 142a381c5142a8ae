//! Bayesian optimization in eigenshape coordinates.

mod config;
mod doe;
mod run;

pub use config::{BoSettings, DoeSpace, RunConfig, SurrogateSpec};
pub use doe::latin_hypercube;
pub use run::{bo_step, initial_doe, run, LogRow, Row, RunResult, RunState};
