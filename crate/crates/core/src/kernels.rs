//! Smoothing kernels for the particle approximation.
//!
//! A kernel is a compactly supported radial weight `W(r, h)` whose integral
//! over its support is one. Both kernels here use a support radius of `2h`.

use std::f64::consts::PI;

use nalgebra::SVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("smoothing length must be positive, got {0}")]
    NonPositiveSmoothingLength(f64),
    #[error("unsupported spatial dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("kernel evaluated at negative distance {0}")]
    NegativeDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    #[default]
    CubicSpline,
    WendlandC2,
}

impl KernelKind {
    /// Support radius in units of `h`.
    pub fn support_factor(self) -> f64 {
        match self {
            KernelKind::CubicSpline | KernelKind::WendlandC2 => 2.0,
        }
    }

    /// Dimensionless normalization constant; the kernel is `sigma / h^dim * f(q)`.
    pub fn normalization(self, dim: usize) -> Result<f64, KernelError> {
        match (self, dim) {
            (KernelKind::CubicSpline, 2) => Ok(10.0 / (7.0 * PI)),
            (KernelKind::CubicSpline, 3) => Ok(1.0 / PI),
            (KernelKind::WendlandC2, 2) => Ok(7.0 / (4.0 * PI)),
            (KernelKind::WendlandC2, 3) => Ok(21.0 / (16.0 * PI)),
            (_, d) => Err(KernelError::UnsupportedDimension(d)),
        }
    }
}

/// Radial smoothing kernel with a fixed smoothing length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingKernel {
    kind: KernelKind,
    h: f64,
    kappa: f64,
    dim: usize,
    // sigma / h^dim, cached
    scale: f64,
}

impl SmoothingKernel {
    pub fn new(kind: KernelKind, h: f64, dim: usize) -> Result<Self, KernelError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(KernelError::NonPositiveSmoothingLength(h));
        }
        let sigma = kind.normalization(dim)?;
        Ok(Self {
            kind,
            h,
            kappa: kind.support_factor(),
            dim,
            scale: sigma / h.powi(dim as i32),
        })
    }

    pub fn cubic_spline(h: f64, dim: usize) -> Result<Self, KernelError> {
        Self::new(KernelKind::CubicSpline, h, dim)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.kappa * self.h
    }

    /// Checked kernel value `W(r, h)`.
    pub fn eval_w(&self, r: f64) -> Result<f64, KernelError> {
        if r < 0.0 || r.is_nan() {
            return Err(KernelError::NegativeDistance(r));
        }
        Ok(self.w(r))
    }

    /// Kernel value for `r >= 0`; zero outside the support.
    #[inline]
    pub fn w(&self, r: f64) -> f64 {
        let q = r / self.h;
        if q >= self.kappa {
            return 0.0;
        }
        let f = match self.kind {
            KernelKind::CubicSpline => {
                if q < 1.0 {
                    1.0 - 1.5 * q * q + 0.75 * q * q * q
                } else {
                    let t = 2.0 - q;
                    0.25 * t * t * t
                }
            }
            KernelKind::WendlandC2 => {
                let t = 1.0 - 0.5 * q;
                let t2 = t * t;
                t2 * t2 * (2.0 * q + 1.0)
            }
        };
        self.scale * f
    }

    /// Radial derivative `dW/dr` for `r >= 0`.
    #[inline]
    pub fn dw_dr(&self, r: f64) -> f64 {
        let q = r / self.h;
        if q >= self.kappa {
            return 0.0;
        }
        let df_dq = match self.kind {
            KernelKind::CubicSpline => {
                if q < 1.0 {
                    -3.0 * q + 2.25 * q * q
                } else {
                    let t = 2.0 - q;
                    -0.75 * t * t
                }
            }
            KernelKind::WendlandC2 => {
                let t = 1.0 - 0.5 * q;
                -5.0 * q * t * t * t
            }
        };
        self.scale * df_dq / self.h
    }

    /// Gradient with respect to the first point, `r_vec = r_i - r_j`.
    ///
    /// The gradient at coincident points is the zero vector.
    #[inline]
    pub fn grad_w<const D: usize>(&self, r_vec: &SVector<f64, D>) -> SVector<f64, D> {
        let r = r_vec.norm();
        if r <= 0.0 || r >= self.support_radius() {
            return SVector::zeros();
        }
        r_vec * (self.dw_dr(r) / r)
    }

    /// Alias of [`grad_w`](Self::grad_w).
    pub fn eval_grad_w<const D: usize>(&self, r_vec: &SVector<f64, D>) -> SVector<f64, D> {
        self.grad_w(r_vec)
    }
}
