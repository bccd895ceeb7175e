//! Continuity and momentum right-hand sides.

use super::{eos::sound_speed, FluidParams, Particle, Vector};
use crate::kernels::SmoothingKernel;

/// `sum_j m_j (v_i - v_j) . grad_i W_ij`.
pub fn continuity_rate<const D: usize>(
    i: usize,
    neighbors: &[usize],
    particles: &[Particle<D>],
    kernel: &SmoothingKernel,
) -> f64 {
    let pi = &particles[i];
    neighbors
        .iter()
        .map(|&j| {
            let pj = &particles[j];
            let grad = kernel.grad_w(&(pi.pos - pj.pos));
            pj.mass * (pi.vel - pj.vel).dot(&grad)
        })
        .sum()
}

/// Monaghan viscosity term for the pair, zero unless the particles approach.
///
/// `Pi_ij = -alpha c_ij mu_ij / rho_ij`, with `mu_ij = h v_ij.r_ij / (r_ij^2 + eta^2)`
/// and the pair sound speed and density taken as arithmetic means.
pub fn artificial_viscosity<const D: usize>(
    pi: &Particle<D>,
    pj: &Particle<D>,
    params: &FluidParams<D>,
) -> f64 {
    let ci = sound_speed(pi.rho, params);
    let cj = sound_speed(pj.rho, params);
    viscosity_term(pi, pj, ci, cj, params)
}

#[inline]
fn viscosity_term<const D: usize>(
    pi: &Particle<D>,
    pj: &Particle<D>,
    ci: f64,
    cj: f64,
    params: &FluidParams<D>,
) -> f64 {
    let r = pi.pos - pj.pos;
    let vr = (pi.vel - pj.vel).dot(&r);
    if vr >= 0.0 {
        return 0.0;
    }
    let mu = params.h * vr / (r.norm_squared() + params.eta2());
    let c_mean = 0.5 * (ci + cj);
    let rho_mean = 0.5 * (pi.rho + pj.rho);
    -params.alpha_av * c_mean * mu / rho_mean
}

/// Acceleration of `pi` due to `pj` (pressure, artificial and laminar
/// viscosity), gravity excluded.
pub fn pair_acceleration<const D: usize>(
    pi: &Particle<D>,
    pj: &Particle<D>,
    params: &FluidParams<D>,
    kernel: &SmoothingKernel,
) -> Vector<D> {
    let ci = sound_speed(pi.rho, params);
    let cj = sound_speed(pj.rho, params);
    pair_term(pi, pj, ci, cj, params, kernel)
}

#[inline]
pub(crate) fn pair_term<const D: usize>(
    pi: &Particle<D>,
    pj: &Particle<D>,
    ci: f64,
    cj: f64,
    params: &FluidParams<D>,
    kernel: &SmoothingKernel,
) -> Vector<D> {
    let r = pi.pos - pj.pos;
    let grad = kernel.grad_w(&r);
    let pressure = pj.press / (pj.rho * pj.rho) + pi.press / (pi.rho * pi.rho);
    let pi_ij = viscosity_term(pi, pj, ci, cj, params);
    let laminar = 4.0 * params.nu0 * r.dot(&grad)
        / ((pi.rho + pj.rho) * (r.norm_squared() + params.eta2()));
    (grad * (-(pressure + pi_ij)) + (pi.vel - pj.vel) * laminar) * pj.mass
}

/// Total acceleration of particle `i`, gravity included.
pub fn momentum_rate<const D: usize>(
    i: usize,
    neighbors: &[usize],
    particles: &[Particle<D>],
    params: &FluidParams<D>,
    kernel: &SmoothingKernel,
) -> Vector<D> {
    let pi = &particles[i];
    let ci = sound_speed(pi.rho, params);
    momentum_with(i, neighbors, particles, params, kernel, ci, |j| {
        sound_speed(particles[j].rho, params)
    })
}

#[inline]
pub(crate) fn momentum_with<const D: usize>(
    i: usize,
    neighbors: &[usize],
    particles: &[Particle<D>],
    params: &FluidParams<D>,
    kernel: &SmoothingKernel,
    ci: f64,
    c_of: impl Fn(usize) -> f64,
) -> Vector<D> {
    let pi = &particles[i];
    neighbors.iter().fold(params.gravity, |acc, &j| {
        acc + pair_term(pi, &particles[j], ci, c_of(j), params, kernel)
    })
}
