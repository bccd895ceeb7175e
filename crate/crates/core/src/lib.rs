//! Particle-mesh coupling for fluid-structure interaction.

pub mod kernels;
pub mod sph;
pub mod structure;
pub mod mapping;
pub mod coupling;
pub mod adapter;
pub mod scenario;

pub use adapter::{CriticalMesh, ForceMode, Theta};
pub use coupling::{CouplingError, CouplingMesh};
pub use kernels::{KernelKind, SmoothingKernel};
pub use mapping::{Constraint, MappingMethod};
pub use scenario::{build_scenario, run, RunConfig, RunOptions, RunSummary, Scenario, ScenarioError};
pub use sph::{FluidParams, FluidState, Particle, SphError, Vector};
pub use structure::{Material, Point, StructureError};
