//! Weakly compressible SPH fluid solver.

mod eos;
mod neighbor;
mod particle;
mod rates;
mod solver;

pub use eos::{eos_density, eos_pressure, sound_speed};
pub use neighbor::{NeighborGrid, NeighborLists};
#[cfg(debug_assertions)]
pub(crate) use neighbor::fingerprint;
pub use particle::{FluidState, Particle, ParticleTag, Vector};
pub use rates::{artificial_viscosity, continuity_rate, momentum_rate, pair_acceleration};
pub use solver::{NoConstraint, SphSolver, TimeStepLimits, VelocityConstraint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::KernelError;

#[derive(Debug, Error, PartialEq)]
pub enum SphError {
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("pressure {0} is below the equation-of-state cutoff")]
    PressureBelowCutoff(f64),
    #[error("invalid fluid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("time step must be non-negative and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("non-finite {field} on particle {particle} at t = {time}")]
    NonFinite {
        particle: usize,
        field: &'static str,
        time: f64,
    },
    #[error("kernel: {0}")]
    Kernel(#[from] KernelError),
    #[error("kernel dimension {kernel} does not match state dimension {state}")]
    DimensionMismatch { kernel: usize, state: usize },
}

/// Physical and numerical parameters of the fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidParams<const D: usize> {
    pub rho0: f64,
    pub c0: f64,
    pub gamma: f64,
    pub alpha_av: f64,
    pub nu0: f64,
    #[serde(with = "vector_serde")]
    pub gravity: Vector<D>,
    pub h: f64,
}

impl<const D: usize> FluidParams<D> {
    /// Water at 1000 kg/m^3 with gamma = 7, alpha = 0.05, nu = 1e-6 and no
    /// gravity; `c0` is set to 10 m/s and should be overridden per scenario.
    pub fn water(h: f64) -> Self {
        Self {
            rho0: 1000.0,
            c0: 10.0,
            gamma: 7.0,
            alpha_av: 0.05,
            nu0: 1e-6,
            gravity: Vector::zeros(),
            h,
        }
    }

    /// `10 sqrt(2 g H)` for a water column of height `H`.
    pub fn sound_speed_for_depth(g: f64, depth: f64) -> f64 {
        10.0 * (2.0 * g.abs() * depth).sqrt()
    }

    /// Regularization `eta^2 = 0.01 h^2` of the viscous terms.
    #[inline]
    pub fn eta2(&self) -> f64 {
        0.01 * self.h * self.h
    }

    pub fn validate(&self) -> Result<(), SphError> {
        let checks: [(&'static str, f64, bool); 6] = [
            ("rho0", self.rho0, self.rho0 > 0.0),
            ("c0", self.c0, self.c0 > 0.0),
            ("gamma", self.gamma, self.gamma >= 1.0),
            ("alpha_av", self.alpha_av, self.alpha_av >= 0.0),
            ("nu0", self.nu0, self.nu0 >= 0.0),
            ("h", self.h, self.h > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(SphError::InvalidParameter { name, value });
            }
        }
        if let Some(g) = self.gravity.iter().find(|g| !g.is_finite()) {
            return Err(SphError::InvalidParameter {
                name: "gravity",
                value: *g,
            });
        }
        Ok(())
    }
}

pub(crate) mod vector_serde {
    use nalgebra::SVector;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(
        v: &SVector<f64, D>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, De: Deserializer<'de>, const D: usize>(
        d: De,
    ) -> Result<SVector<f64, D>, De::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.len() != D {
            return Err(De::Error::invalid_length(v.len(), &"one component per dimension"));
        }
        Ok(SVector::from_column_slice(&v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_values() {
        let mut p = FluidParams::<2>::water(0.01);
        assert!(p.validate().is_ok());
        p.gamma = 0.5;
        assert_eq!(
            p.validate(),
            Err(SphError::InvalidParameter {
                name: "gamma",
                value: 0.5
            })
        );
        let mut p = FluidParams::<2>::water(0.01);
        p.nu0 = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_serde_round_trip() {
        let mut p = FluidParams::<2>::water(0.013);
        p.gravity = Vector::<2>::new(0.0, -9.81);
        let s = serde_json::to_string(&p).unwrap();
        let back: FluidParams<2> = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
        assert!(serde_json::from_str::<FluidParams<3>>(&s).is_err());
    }
}
