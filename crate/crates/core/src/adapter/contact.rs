//! Particle-to-patch contact detection and the two interpolation stages.

use rayon::prelude::*;

use super::critical::{CriticalMesh, PatchGeometry};
use super::{ContactParams, ForceMode};
use crate::sph::{NeighborGrid, Particle, Vector, VelocityConstraint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub patch: usize,
    pub distance: f64,
}

/// Nearest-patch assignment of the particles within the contact threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMap {
    assignment: Vec<Option<Contact>>,
    by_patch: Vec<Vec<usize>>,
    #[cfg(debug_assertions)]
    fingerprint: u64,
}

impl ContactMap {
    pub fn get(&self, particle: usize) -> Option<Contact> {
        self.assignment[particle]
    }

    /// Contact particles of patch `k`, ascending.
    pub fn particles_of(&self, patch: usize) -> &[usize] {
        &self.by_patch[patch]
    }

    pub fn particle_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn patch_count(&self) -> usize {
        self.by_patch.len()
    }

    pub fn contact_count(&self) -> usize {
        self.assignment.iter().flatten().count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Contact)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
    }

    /// True when the per-patch lists are exactly the inverse of the assignment.
    pub fn is_consistent(&self) -> bool {
        let mut rebuilt = vec![Vec::new(); self.by_patch.len()];
        for (i, c) in self.iter() {
            if c.patch >= rebuilt.len() {
                return false;
            }
            rebuilt[c.patch].push(i);
        }
        rebuilt == self.by_patch
    }

    fn debug_check_fresh<const D: usize>(&self, particles: &[Particle<D>]) {
        assert_eq!(particles.len(), self.assignment.len(), "contact map is stale: particle count changed");
        #[cfg(debug_assertions)]
        assert_eq!(
            crate::sph::fingerprint(particles.iter().map(|p| &p.pos)),
            self.fingerprint,
            "contact map is stale: positions changed since detection"
        );
    }
}

/// Assigns every fluid particle closer than `theta` to a patch to its
/// nearest patch, ties going to the lowest patch id. Wall particles never
/// make contact.
pub fn particle_contact<const D: usize>(
    particles: &[Particle<D>],
    geometry: &PatchGeometry<D>,
    params: &ContactParams,
) -> ContactMap {
    let theta = params.theta;
    // Any patch within theta of a particle has its centroid within this radius.
    let reach = theta + geometry.radius;
    let grid = NeighborGrid::build(&geometry.centroids, reach);
    let assignment: Vec<Option<Contact>> = particles
        .par_iter()
        .map(|p| {
            if !p.is_fluid() {
                return None;
            }
            let mut best: Option<Contact> = None;
            for k in grid.candidates(&p.pos) {
                let d = geometry.distance(k, &p.pos);
                if d >= theta {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => d < b.distance || (d == b.distance && k < b.patch),
                };
                if better {
                    best = Some(Contact { patch: k, distance: d });
                }
            }
            best
        })
        .collect();
    let mut by_patch = vec![Vec::new(); geometry.len()];
    for (i, c) in assignment.iter().enumerate() {
        if let Some(c) = c {
            by_patch[c.patch].push(i);
        }
    }
    ContactMap {
        assignment,
        by_patch,
        #[cfg(debug_assertions)]
        fingerprint: crate::sph::fingerprint(particles.iter().map(|p| &p.pos)),
    }
}

/// Force each patch receives from its contact particles.
///
/// `NewtonSecondLaw` sums `m (a - g)`, the interaction force without body
/// forces. `PressureIntegral` uses the mean contact pressure over the patch
/// area, pushing against the normal.
pub fn interpolate_forces<const D: usize>(
    particles: &[Particle<D>],
    contact: &ContactMap,
    geometry: &PatchGeometry<D>,
    mode: ForceMode,
    gravity: &Vector<D>,
) -> Vec<Vector<D>> {
    contact.debug_check_fresh(particles);
    assert_eq!(contact.patch_count(), geometry.len(), "contact map built for another mesh");
    (0..geometry.len())
        .into_par_iter()
        .map(|k| {
            let members = contact.particles_of(k);
            if members.is_empty() {
                return Vector::zeros();
            }
            match mode {
                ForceMode::NewtonSecondLaw => members
                    .iter()
                    .fold(Vector::zeros(), |f, &j| f + (particles[j].acc - gravity) * particles[j].mass),
                ForceMode::PressureIntegral => {
                    let mean = members.iter().map(|&j| particles[j].press).sum::<f64>() / members.len() as f64;
                    -geometry.normals[k] * (mean * geometry.areas[k])
                }
            }
        })
        .collect()
}

/// Removes the part of `v` that moves towards the solid faster than the
/// patch: afterwards `(v - v_patch) . n >= 0`.
pub fn clamp_normal_velocity<const D: usize>(v: &Vector<D>, v_patch: &Vector<D>, n: &Vector<D>) -> Vector<D> {
    let vn = (v - v_patch).dot(n);
    if vn < 0.0 {
        v - n * vn
    } else {
        *v
    }
}

/// Carries the contact particles along with their patches: a particle
/// left on the solid side of its moved patch is put back onto the patch,
/// and no particle keeps approaching faster than the patch moves. `contact`
/// must be detected against the previous geometry. Returns the number of
/// particles put back.
pub fn interpolate_displacements<const D: usize>(
    particles: &mut [Particle<D>],
    contact: &ContactMap,
    mesh: &CriticalMesh<D>,
    window_dt: f64,
) -> usize {
    contact.debug_check_fresh(particles);
    let geometry = mesh.geometry();
    let velocity = patch_velocities(mesh, window_dt);
    particles
        .par_iter_mut()
        .enumerate()
        .filter_map(|(i, p)| contact.get(i).map(|c| (p, c.patch)))
        .map(|(p, k)| {
            let n = &geometry.normals[k];
            let depth = -geometry.signed_distance(k, &p.pos);
            if depth > 0.0 {
                p.pos += n * depth;
            }
            p.vel = clamp_normal_velocity(&p.vel, &velocity[k], n);
            depth > 0.0
        })
        .filter(|&moved| moved)
        .count()
}

/// Mean patch velocity over a window, zero for an empty window.
pub fn patch_velocities<const D: usize>(mesh: &CriticalMesh<D>, window_dt: f64) -> Vec<Vector<D>> {
    let shift = mesh.relative_displacement();
    if window_dt > 0.0 {
        shift.iter().map(|s| s / window_dt).collect()
    } else {
        vec![Vector::zeros(); shift.len()]
    }
}

/// Deepest contact particle on the solid side of its patch, zero if none.
pub fn max_penetration<const D: usize>(
    particles: &[Particle<D>],
    contact: &ContactMap,
    geometry: &PatchGeometry<D>,
) -> f64 {
    contact
        .iter()
        .map(|(i, c)| -geometry.signed_distance(c.patch, &particles[i].pos))
        .fold(0.0, f64::max)
}

/// Non-penetration condition applied inside every fluid substep: contact
/// is judged against the end-of-window geometry and approach is limited by
/// the mean patch velocity.
#[derive(Debug, Clone)]
pub struct NonPenetration<const D: usize> {
    pub geometry: PatchGeometry<D>,
    pub patch_velocity: Vec<Vector<D>>,
    pub params: ContactParams,
    pub corrections: usize,
}

impl<const D: usize> NonPenetration<D> {
    pub fn new(geometry: PatchGeometry<D>, patch_velocity: Vec<Vector<D>>, params: ContactParams) -> Self {
        assert_eq!(geometry.len(), patch_velocity.len());
        Self {
            geometry,
            patch_velocity,
            params,
            corrections: 0,
        }
    }
}

impl<const D: usize> VelocityConstraint<D> for NonPenetration<D> {
    fn constrain(&mut self, particles: &mut [Particle<D>], _dt: f64) {
        let contact = particle_contact(particles, &self.geometry, &self.params);
        let geometry = &self.geometry;
        let vel = &self.patch_velocity;
        self.corrections += particles
            .par_iter_mut()
            .enumerate()
            .filter_map(|(i, p)| contact.get(i).map(|c| (p, c.patch)))
            .map(|(p, k)| {
                let v = clamp_normal_velocity(&p.vel, &vel[k], &geometry.normals[k]);
                let changed = v != p.vel;
                p.vel = v;
                changed
            })
            .filter(|&changed| changed)
            .count();
    }
}
