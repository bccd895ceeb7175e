//! Particle-mesh coupling: the critical mesh between the SPH particles and
//! the coupling interface, contact detection, and the fluid-side driver.

mod contact;
mod critical;
mod driver;

pub use contact::{
    clamp_normal_velocity, interpolate_displacements, interpolate_forces, max_penetration, particle_contact,
    patch_velocities, Contact,
    ContactMap, NonPenetration,
};
pub use critical::{CriticalMesh, PatchGeometry};
pub use driver::{adapter_loop, AdapterEvent, AdapterSettings, AdapterTraceEntry, FluidAdapter, WindowReport};

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupling::CouplingError;
use crate::sph::SphError;

#[derive(Debug, Error, PartialEq)]
pub enum AdapterError {
    #[error("critical mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid adapter parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error("fluid solver failed in window {window}, iteration {iteration}: {source}")]
    Fluid {
        window: usize,
        iteration: usize,
        source: SphError,
    },
}

impl AdapterError {
    /// True for failures of the numerics rather than of the setup.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            AdapterError::Fluid { .. }
                | AdapterError::Coupling(CouplingError::NonFinite(_) | CouplingError::Participant { .. })
        )
    }
}

/// How contact particles load their patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ForceMode {
    /// Sum of `m (a - g)` over the contact particles.
    #[default]
    #[serde(rename = "newton")]
    NewtonSecondLaw,
    /// Mean contact pressure times patch area along the inward normal.
    #[serde(rename = "pressure")]
    PressureIntegral,
}

impl FromStr for ForceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "newton" => Ok(ForceMode::NewtonSecondLaw),
            "pressure" => Ok(ForceMode::PressureIntegral),
            other => Err(format!("unknown force mode {other:?}, expected newton or pressure")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactParams {
    /// Particles closer than this to a patch are in contact (m).
    pub theta: f64,
}

impl ContactParams {
    pub fn new(theta: f64) -> Result<Self, AdapterError> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(AdapterError::InvalidParameter { name: "theta", value: theta });
        }
        Ok(Self { theta })
    }
}

/// Contact threshold as an absolute length or a multiple of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Theta {
    Absolute(f64),
    SmoothingLengths(f64),
}

impl Default for Theta {
    fn default() -> Self {
        Theta::SmoothingLengths(2.0)
    }
}

impl Theta {
    pub fn resolve(self, h: f64) -> Result<ContactParams, AdapterError> {
        ContactParams::new(match self {
            Theta::Absolute(t) => t,
            Theta::SmoothingLengths(k) => k * h,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_forms() {
        assert_eq!(Theta::default().resolve(0.01).unwrap().theta, 0.02);
        assert_eq!(Theta::Absolute(0.01).resolve(5.0).unwrap().theta, 0.01);
        assert!(Theta::Absolute(0.0).resolve(1.0).is_err());
        let json = serde_json::to_string(&Theta::Absolute(0.01)).unwrap();
        assert_eq!(json, r#"{"absolute":0.01}"#);
        let t: Theta = serde_json::from_str(r#"{"smoothing-lengths":1.5}"#).unwrap();
        assert_eq!(t, Theta::SmoothingLengths(1.5));
    }

    #[test]
    fn force_mode_names() {
        assert_eq!("newton".parse::<ForceMode>().unwrap(), ForceMode::NewtonSecondLaw);
        assert_eq!("pressure".parse::<ForceMode>().unwrap(), ForceMode::PressureIntegral);
        assert!("torque".parse::<ForceMode>().is_err());
        assert_eq!(serde_json::to_string(&ForceMode::PressureIntegral).unwrap(), "\"pressure\"");
    }
}
