//! Benchmark scenarios, run configuration, setup and output.

mod config;
mod output;
mod run;
mod setup;
mod spec;

pub use config::{FluidSettings, RunConfig, StructureSettings};
pub use output::{write_critical_vtk, write_particle_csv, write_particle_vtk, PARTICLE_CSV_HEADER};
pub use run::{run, RunOptions, RunStatus, RunSummary, WindowRecord};
pub use setup::{coupling_config, fluid_particles, rigid_particles, wall_particles, Setup};
pub use spec::{build_scenario, Rect, Scenario, StructureSpec, SCENARIOS};

use std::path::PathBuf;

use thiserror::Error;

use crate::adapter::AdapterError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

impl ScenarioError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, ScenarioError::Adapter(e) if e.is_numerical())
    }

    /// Process exit status: 3 for numerical failure, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            3
        } else {
            2
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| ScenarioError::Io { path, source }
    }
}
