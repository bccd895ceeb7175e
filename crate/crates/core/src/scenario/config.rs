use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{Scenario, ScenarioError};
use crate::adapter::{ForceMode, Theta};
use crate::coupling::{CouplingConfig, SchemeConfig};
use crate::kernels::KernelKind;
use crate::sph::{FluidParams, Vector};
use crate::structure::{Damping, ElementKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidSettings {
    pub rho0: f64,
    /// Reference sound speed; derived from the water depth when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    pub gamma: f64,
    pub alpha_av: f64,
    pub nu0: f64,
    /// Smoothing length in units of the particle spacing.
    pub h_factor: f64,
    pub kernel: KernelKind,
}

impl Default for FluidSettings {
    fn default() -> Self {
        let w = FluidParams::<2>::water(1.0);
        Self {
            rho0: w.rho0,
            c0: None,
            gamma: w.gamma,
            alpha_av: w.alpha_av,
            nu0: w.nu0,
            h_factor: 1.3,
            kernel: KernelKind::default(),
        }
    }
}

impl FluidSettings {
    pub fn params(&self, scenario: &Scenario) -> FluidParams<2> {
        let c0 = self
            .c0
            .unwrap_or_else(|| FluidParams::<2>::sound_speed_for_depth(scenario.gravity, scenario.water.height));
        FluidParams {
            rho0: self.rho0,
            c0,
            gamma: self.gamma,
            alpha_av: self.alpha_av,
            nu0: self.nu0,
            gravity: Vector::<2>::new(0.0, -scenario.gravity),
            h: self.h_factor * scenario.spacing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureSettings {
    pub element: ElementKind,
    pub damping: Damping,
    /// Longest Newmark step; one step per window when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub fluid: FluidSettings,
    #[serde(default)]
    pub structure: StructureSettings,
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub contact: Theta,
    pub output_dir: PathBuf,
    /// Time between particle and critical-mesh snapshots (s).
    pub write_interval: f64,
    #[serde(default)]
    pub force_mode: ForceMode,
    /// Seed of the initial lattice jitter; no jitter when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Serial implicit coupling with 1 ms windows over the scenario's end time.
    pub fn for_scenario(scenario: Scenario, output_dir: impl Into<PathBuf>) -> Self {
        let (contact, structure) = match scenario.name.as_str() {
            "dam-break-elastic-plate" => (
                Theta::Absolute(0.01),
                StructureSettings {
                    damping: Damping { mass: 10.0, stiffness: 0.0 },
                    ..StructureSettings::default()
                },
            ),
            _ => (Theta::default(), StructureSettings::default()),
        };
        let coupling = super::coupling_config(SchemeConfig::default_implicit(1e-3, scenario.end_time));
        let write_interval = (scenario.end_time / 20.0).max(1e-3);
        Self {
            scenario,
            fluid: FluidSettings::default(),
            structure,
            coupling,
            contact,
            output_dir: output_dir.into(),
            write_interval,
            force_mode: ForceMode::default(),
            seed: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }

    /// Sets the scenario and coupling end time together.
    pub fn set_end_time(&mut self, t: f64) {
        self.scenario.end_time = t;
        self.coupling.scheme.max_time = t;
    }

    pub fn fluid_params(&self) -> FluidParams<2> {
        self.fluid.params(&self.scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Config(m));
        self.scenario.validate()?;
        self.coupling.validate().map_err(|e| ScenarioError::Config(e.to_string()))?;
        let names: Vec<&str> = self.coupling.participants.iter().map(|p| p.name.as_str()).collect();
        if names != ["Fluid", "Solid"] {
            return bad(format!("participants must be Fluid then Solid, got {names:?}"));
        }
        let data: Vec<&str> = self.coupling.exchanges.iter().map(|e| e.data.as_str()).collect();
        for d in ["Forces", "Displacements"] {
            if !data.contains(&d) {
                return bad(format!("coupling does not exchange {d}"));
            }
        }
        let t = self.coupling.scheme.max_time;
        if t != self.scenario.end_time {
            return bad(format!("coupling max_time {t} differs from scenario end_time {}", self.scenario.end_time));
        }
        if !(self.write_interval > 0.0 && self.write_interval.is_finite()) {
            return bad(format!("write_interval must be positive, got {}", self.write_interval));
        }
        if let Some(s) = self.structure.max_step {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("structure max_step must be positive, got {s}"));
            }
        }
        self.fluid_params().validate().map_err(|e| ScenarioError::Config(e.to_string()))?;
        let h = self.fluid_params().h;
        self.contact.resolve(h)?;
        Ok(())
    }
}
