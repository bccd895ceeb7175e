//! Small-strain plane-strain elastodynamics on quadrilateral meshes.

mod assembly;
mod element;
mod mesh;
mod newmark;
mod participant;

pub use assembly::{apply_traction, assemble, Operators};
pub use element::{bilinear_mass, element_stiffness, plane_strain_matrix, ElementKind};
pub use mesh::{FemMesh, Side, SurfaceFace};
pub use newmark::{Damping, NewmarkSolver, StructureState};
pub use participant::StructureParticipant;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("invalid material parameter {name} = {value}")]
    InvalidMaterial { name: &'static str, value: f64 },
    #[error("element {element} is degenerate (jacobian determinant {det_j})")]
    DegenerateElement { element: usize, det_j: f64 },
    #[error("mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown surface face {0}")]
    UnknownFace(usize),
    #[error("constrained system is singular; check the fixed nodes")]
    Singular,
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Isotropic linear-elastic solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub rho_s: f64,
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    pub nu: f64,
}

impl Material {
    pub fn new(rho_s: f64, youngs_modulus: f64, nu: f64) -> Result<Self, StructureError> {
        let m = Self {
            rho_s,
            youngs_modulus,
            nu,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let bad = |name, value| Err(StructureError::InvalidMaterial { name, value });
        if !(self.rho_s > 0.0 && self.rho_s.is_finite()) {
            return bad("rho_s", self.rho_s);
        }
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return bad("E", self.youngs_modulus);
        }
        if !(0.0..0.5).contains(&self.nu) {
            return bad("nu", self.nu);
        }
        Ok(())
    }
}

pub type Point = Vector2<f64>;
