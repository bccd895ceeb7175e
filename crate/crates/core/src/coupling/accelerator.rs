//! Fixed-point relaxation of coupling iterates.

use super::{AcceleratorConfig, CouplingError};

/// `||current - previous|| / max(||current||, 1e-30)`.
pub fn residual(current: &[f64], previous: &[f64]) -> Result<f64, CouplingError> {
    if current.len() != previous.len() {
        return Err(CouplingError::LengthMismatch {
            expected: current.len(),
            got: previous.len(),
        });
    }
    let diff: f64 = current.iter().zip(previous).map(|(a, b)| (a - b) * (a - b)).sum();
    let norm: f64 = current.iter().map(|a| a * a).sum();
    Ok(diff.sqrt() / norm.sqrt().max(1e-30))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Accelerator {
    config: AcceleratorConfig,
    omega: f64,
    previous_residual: Option<Vec<f64>>,
}

impl Accelerator {
    pub fn new(config: AcceleratorConfig) -> Self {
        let mut a = Self {
            config,
            omega: 1.0,
            previous_residual: None,
        };
        a.reset_window();
        a
    }

    pub fn config(&self) -> AcceleratorConfig {
        self.config
    }

    /// Relaxation factor used by the most recent update.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Forgets the residual history; the next update uses the initial factor.
    pub fn reset_window(&mut self) {
        self.previous_residual = None;
        self.omega = match self.config {
            AcceleratorConfig::None => 1.0,
            AcceleratorConfig::Constant { omega } => omega,
            AcceleratorConfig::Aitken { omega0 } => omega0,
        };
    }

    /// Relaxed iterate `x_prev + omega (x_new - x_prev)`.
    pub fn accelerate(&mut self, previous: &[f64], new: &[f64]) -> Result<Vec<f64>, CouplingError> {
        if previous.len() != new.len() {
            return Err(CouplingError::LengthMismatch {
                expected: previous.len(),
                got: new.len(),
            });
        }
        let r: Vec<f64> = new.iter().zip(previous).map(|(n, p)| n - p).collect();
        if let AcceleratorConfig::Aitken { .. } = self.config {
            if let Some(prev) = &self.previous_residual {
                let (mut num, mut den) = (0.0, 0.0);
                for (rk, rp) in r.iter().zip(prev) {
                    let d = rk - rp;
                    num += rp * d;
                    den += d * d;
                }
                if den > 0.0 {
                    self.omega = -self.omega * num / den;
                }
            }
            self.previous_residual = Some(r.clone());
        }
        let w = self.omega;
        Ok(previous.iter().zip(&r).map(|(p, d)| p + w * d).collect())
    }
}
