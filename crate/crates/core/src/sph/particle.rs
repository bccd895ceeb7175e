use nalgebra::SVector;
use serde::{Deserialize, Serialize};

pub type Vector<const D: usize> = SVector<f64, D>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParticleTag {
    Fluid,
    /// Fixed boundary particle: evolves density and pressure, never moves.
    Wall,
}

impl ParticleTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ParticleTag::Fluid => "fluid",
            ParticleTag::Wall => "wall",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle<const D: usize> {
    pub id: usize,
    pub pos: Vector<D>,
    pub vel: Vector<D>,
    pub rho: f64,
    pub press: f64,
    pub mass: f64,
    pub acc: Vector<D>,
    pub drho_dt: f64,
    pub tag: ParticleTag,
}

impl<const D: usize> Particle<D> {
    pub fn new(id: usize, pos: Vector<D>, mass: f64, rho: f64, tag: ParticleTag) -> Self {
        Self {
            id,
            pos,
            vel: Vector::zeros(),
            rho,
            press: 0.0,
            mass,
            acc: Vector::zeros(),
            drho_dt: 0.0,
            tag,
        }
    }

    pub fn fluid(id: usize, pos: Vector<D>, mass: f64, rho: f64) -> Self {
        Self::new(id, pos, mass, rho, ParticleTag::Fluid)
    }

    pub fn wall(id: usize, pos: Vector<D>, mass: f64, rho: f64) -> Self {
        Self::new(id, pos, mass, rho, ParticleTag::Wall)
    }

    #[inline]
    pub fn is_fluid(&self) -> bool {
        self.tag == ParticleTag::Fluid
    }
}

/// The fluid participant's full state.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState<const D: usize> {
    pub particles: Vec<Particle<D>>,
    pub time: f64,
}

impl<const D: usize> FluidState<D> {
    /// Builds a state, renumbering ids so that `id == index`.
    pub fn new(mut particles: Vec<Particle<D>>) -> Self {
        for (i, p) in particles.iter_mut().enumerate() {
            p.id = i;
        }
        Self { particles, time: 0.0 }
    }

    pub fn fluid_count(&self) -> usize {
        self.particles.iter().filter(|p| p.is_fluid()).count()
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.mass).sum()
    }

    /// Momentum of the fluid particles.
    pub fn fluid_momentum(&self) -> Vector<D> {
        self.particles
            .iter()
            .filter(|p| p.is_fluid())
            .fold(Vector::zeros(), |acc, p| acc + p.vel * p.mass)
    }

    pub fn max_speed(&self) -> f64 {
        self.particles
            .iter()
            .filter(|p| p.is_fluid())
            .map(|p| p.vel.norm())
            .fold(0.0, f64::max)
    }
}
