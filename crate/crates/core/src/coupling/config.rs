use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::CouplingError;
use crate::mapping::{Constraint, MappingMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantConfig {
    pub name: String,
    pub mesh: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeConfig {
    pub data: String,
    pub from: String,
    pub to: String,
    pub mapping: MappingMethod,
    pub constraint: Constraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    SerialExplicit,
    ParallelExplicit,
    SerialImplicit,
    ParallelImplicit,
}

impl SchemeKind {
    pub fn is_implicit(self) -> bool {
        matches!(self, SchemeKind::SerialImplicit | SchemeKind::ParallelImplicit)
    }

    pub fn is_parallel(self) -> bool {
        matches!(self, SchemeKind::ParallelExplicit | SchemeKind::ParallelImplicit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AcceleratorConfig {
    #[default]
    None,
    Constant {
        omega: f64,
    },
    Aitken {
        omega0: f64,
    },
}

fn default_max_iterations() -> usize {
    30
}

fn default_tolerance() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub window_dt: f64,
    pub max_time: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub accelerator: AcceleratorConfig,
    /// Data whose relative change decides convergence. Defaults to the data
    /// sent by the second participant (serial) or all exchanged data (parallel).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_data: Option<Vec<String>>,
}

impl SchemeConfig {
    /// Serial implicit, tolerance 1e-3, 30 iterations, Aitken from 0.5.
    pub fn default_implicit(window_dt: f64, max_time: f64) -> Self {
        Self {
            kind: SchemeKind::SerialImplicit,
            window_dt,
            max_time,
            max_iterations: 30,
            tolerance: 1e-3,
            accelerator: AcceleratorConfig::Aitken { omega0: 0.5 },
            convergence_data: None,
        }
    }
}

/// One coupling configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub participants: Vec<ParticipantConfig>,
    pub exchanges: Vec<ExchangeConfig>,
    pub scheme: SchemeConfig,
}

impl CouplingConfig {
    pub fn from_json(text: &str) -> Result<Self, CouplingError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CouplingError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CouplingError> {
        let bad = |m: String| Err(CouplingError::Config(m));
        if self.participants.len() != 2 {
            return bad(format!("expected 2 participants, found {}", self.participants.len()));
        }
        let (a, b) = (&self.participants[0], &self.participants[1]);
        if a.name == b.name {
            return bad(format!("duplicate participant name {:?}", a.name));
        }
        if a.mesh == b.mesh {
            return bad(format!("duplicate mesh {:?}", a.mesh));
        }
        let names = [a.name.as_str(), b.name.as_str()];
        let mut seen = BTreeSet::new();
        for ex in &self.exchanges {
            for p in [&ex.from, &ex.to] {
                if !names.contains(&p.as_str()) {
                    return bad(format!("exchange of {:?} names unknown participant {:?}", ex.data, p));
                }
            }
            if ex.from == ex.to {
                return bad(format!("exchange of {:?} has the same sender and receiver", ex.data));
            }
            if !seen.insert(ex.data.as_str()) {
                return bad(format!("data {:?} is exchanged twice", ex.data));
            }
        }
        let s = &self.scheme;
        if !(s.window_dt > 0.0 && s.window_dt.is_finite()) {
            return bad(format!("window_dt must be positive, got {}", s.window_dt));
        }
        if !(s.max_time >= 0.0 && s.max_time.is_finite()) {
            return bad(format!("max_time must be non-negative, got {}", s.max_time));
        }
        if s.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(s.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", s.tolerance));
        }
        match s.accelerator {
            AcceleratorConfig::Constant { omega } if !(omega > 0.0 && omega <= 1.0) => {
                return bad(format!("relaxation factor must lie in (0, 1], got {omega}"));
            }
            AcceleratorConfig::Aitken { omega0 } if !(omega0 > 0.0 && omega0 <= 1.0) => {
                return bad(format!("initial relaxation must lie in (0, 1], got {omega0}"));
            }
            _ => {}
        }
        if let Some(list) = &s.convergence_data {
            for d in list {
                if !seen.contains(d.as_str()) {
                    return bad(format!("convergence data {d:?} is not exchanged"));
                }
            }
        }
        Ok(())
    }
}
