//! Symplectic Euler time integration.

use rayon::prelude::*;

use super::eos::{sound_speed, tait};
use super::rates::{continuity_rate, momentum_with};
use super::{FluidParams, FluidState, NeighborGrid, NeighborLists, Particle, SphError, Vector};
use crate::kernels::{KernelKind, SmoothingKernel};

/// Hook applied after the velocity kick and before the position drift.
pub trait VelocityConstraint<const D: usize> {
    fn constrain(&mut self, particles: &mut [Particle<D>], dt: f64);
}

/// Leaves velocities untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoConstraint;

impl<const D: usize> VelocityConstraint<D> for NoConstraint {
    fn constrain(&mut self, _: &mut [Particle<D>], _: f64) {}
}

/// The three stability limits; the step is a fixed fraction of their minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepLimits {
    pub acoustic: f64,
    pub force: f64,
    pub viscous: f64,
}

impl TimeStepLimits {
    pub const COURANT: f64 = 0.25;

    pub fn of<const D: usize>(particles: &[Particle<D>], params: &FluidParams<D>) -> Self {
        let fluid = || particles.iter().filter(|p| p.is_fluid());
        let vmax = fluid().map(|p| p.vel.norm()).fold(0.0, f64::max);
        let amax = fluid().map(|p| p.acc.norm()).fold(0.0, f64::max);
        let h = params.h;
        Self {
            acoustic: h / (params.c0 + vmax),
            force: if amax > 0.0 { (h / amax).sqrt() } else { f64::INFINITY },
            viscous: if params.nu0 > 0.0 { h * h / params.nu0 } else { f64::INFINITY },
        }
    }

    pub fn dt(&self) -> f64 {
        Self::COURANT * self.acoustic.min(self.force).min(self.viscous)
    }
}

#[derive(Debug, Clone)]
pub struct SphSolver<const D: usize> {
    params: FluidParams<D>,
    kernel: SmoothingKernel,
}

impl<const D: usize> SphSolver<D> {
    pub fn new(params: FluidParams<D>, kind: KernelKind) -> Result<Self, SphError> {
        params.validate()?;
        let kernel = SmoothingKernel::new(kind, params.h, D)?;
        Ok(Self { params, kernel })
    }

    pub fn with_kernel(params: FluidParams<D>, kernel: SmoothingKernel) -> Result<Self, SphError> {
        params.validate()?;
        if kernel.dim() != D {
            return Err(SphError::DimensionMismatch {
                kernel: kernel.dim(),
                state: D,
            });
        }
        if kernel.h() != params.h {
            return Err(SphError::InvalidParameter {
                name: "kernel h",
                value: kernel.h(),
            });
        }
        Ok(Self { params, kernel })
    }

    pub fn params(&self) -> &FluidParams<D> {
        &self.params
    }

    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }

    pub fn build_grid(&self, particles: &[Particle<D>]) -> NeighborGrid<D> {
        NeighborGrid::from_particles(particles, self.kernel.support_radius())
    }

    /// Fills `acc` and `drho_dt` for every particle. Wall accelerations stay zero.
    pub fn compute_rates(&self, particles: &mut [Particle<D>]) {
        let grid = self.build_grid(particles);
        let lists = NeighborLists::build(&grid, particles);
        self.rates_with(particles, &lists);
    }

    fn rates_with(&self, particles: &mut [Particle<D>], lists: &NeighborLists) {
        let params = &self.params;
        let kernel = &self.kernel;
        let view: &[Particle<D>] = particles;
        let c: Vec<f64> = view.par_iter().map(|p| sound_speed(p.rho, params)).collect();
        let rates: Vec<(Vector<D>, f64)> = (0..view.len())
            .into_par_iter()
            .map(|i| {
                let nb = lists.neighbors(i);
                let drho = continuity_rate(i, nb, view, kernel);
                let acc = if view[i].is_fluid() {
                    momentum_with(i, nb, view, params, kernel, c[i], |j| c[j])
                } else {
                    Vector::zeros()
                };
                (acc, drho)
            })
            .collect();
        for (p, (acc, drho)) in particles.iter_mut().zip(rates) {
            p.acc = acc;
            p.drho_dt = drho;
        }
    }

    fn continuity_with(&self, particles: &mut [Particle<D>], lists: &NeighborLists) {
        let view: &[Particle<D>] = particles;
        let drho: Vec<f64> = (0..view.len())
            .into_par_iter()
            .map(|i| continuity_rate(i, lists.neighbors(i), view, &self.kernel))
            .collect();
        for (p, d) in particles.iter_mut().zip(drho) {
            p.drho_dt = d;
        }
    }

    pub fn compute_dt(&self, state: &FluidState<D>) -> f64 {
        TimeStepLimits::of(&state.particles, &self.params).dt()
    }

    pub fn step(&self, state: &mut FluidState<D>, dt: f64) -> Result<(), SphError> {
        self.step_constrained(state, dt, &mut NoConstraint)
    }

    /// Kick, constrain, drift; then density and pressure update. The
    /// density rate uses the kicked velocities at the old positions, which
    /// keeps the acoustic (velocity, density) pair symplectic.
    pub fn step_constrained(
        &self,
        state: &mut FluidState<D>,
        dt: f64,
        constraint: &mut dyn VelocityConstraint<D>,
    ) -> Result<(), SphError> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(SphError::InvalidTimeStep(dt));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let grid = self.build_grid(&state.particles);
        let lists = NeighborLists::build(&grid, &state.particles);
        self.rates_with(&mut state.particles, &lists);
        for p in state.particles.iter_mut().filter(|p| p.is_fluid()) {
            p.vel += p.acc * dt;
        }
        constraint.constrain(&mut state.particles, dt);
        self.continuity_with(&mut state.particles, &lists);
        let params = &self.params;
        state.particles.par_iter_mut().for_each(|p| {
            if p.is_fluid() {
                p.pos += p.vel * dt;
            }
            p.rho += p.drho_dt * dt;
            p.press = tait(p.rho, params);
        });
        state.time += dt;
        check_finite(state)
    }
}

fn check_finite<const D: usize>(state: &FluidState<D>) -> Result<(), SphError> {
    for (i, p) in state.particles.iter().enumerate() {
        let field = if !p.pos.iter().all(|x| x.is_finite()) {
            "position"
        } else if !p.vel.iter().all(|x| x.is_finite()) {
            "velocity"
        } else if !(p.rho > 0.0) || !p.rho.is_finite() {
            "density"
        } else if !p.press.is_finite() {
            "pressure"
        } else {
            continue;
        };
        return Err(SphError::NonFinite {
            particle: i,
            field,
            time: state.time,
        });
    }
    Ok(())
}
