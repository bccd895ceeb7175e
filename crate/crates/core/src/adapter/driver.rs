//! The fluid side of the coupling: one SPH solver, its critical mesh and
//! the per-window exchange cycle.

use super::contact::{
    interpolate_displacements, interpolate_forces, max_penetration, particle_contact, patch_velocities, NonPenetration,
};
use super::critical::CriticalMesh;
use super::{AdapterError, ContactParams, ForceMode};
use crate::coupling::{AdvanceOutcome, CheckpointStore, CouplingError, CouplingSystem, Participant, TraceEvent};
use crate::sph::{FluidState, SphSolver, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct AdapterSettings {
    pub mesh_name: String,
    pub force_data: String,
    pub displacement_data: String,
    pub contact: ContactParams,
    pub force_mode: ForceMode,
}

impl AdapterSettings {
    pub fn new(mesh_name: impl Into<String>, contact: ContactParams, force_mode: ForceMode) -> Self {
        Self {
            mesh_name: mesh_name.into(),
            force_data: "Forces".into(),
            displacement_data: "Displacements".into(),
            contact,
            force_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdapterEvent {
    SaveCheckpoint,
    ReadDisplacements,
    InterpolateDisplacements { particles: usize },
    Solve { substeps: usize },
    Contact { particles: usize },
    InterpolateForces,
    WriteForces,
    Advance(AdvanceOutcome),
    ReloadCheckpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdapterTraceEntry {
    pub window: usize,
    pub iteration: usize,
    pub event: AdapterEvent,
}

/// Summary of one converged window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport<const D: usize> {
    pub window: usize,
    pub start: f64,
    pub end: f64,
    pub iterations: usize,
    /// Fluid substeps over all iterations of the window.
    pub substeps: usize,
    pub contacts: usize,
    /// Velocity corrections applied during the accepted iteration.
    pub corrections: usize,
    pub max_penetration: f64,
    pub total_force: Vector<D>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
struct Snapshot<const D: usize> {
    state: FluidState<D>,
    current: Vec<Vector<D>>,
    previous: Vec<Vector<D>>,
}

pub struct FluidAdapter<const D: usize> {
    solver: SphSolver<D>,
    state: FluidState<D>,
    mesh: CriticalMesh<D>,
    settings: AdapterSettings,
    store: CheckpointStore<Snapshot<D>>,
    trace: Vec<AdapterTraceEntry>,
    total_substeps: usize,
}

impl<const D: usize> FluidAdapter<D> {
    pub fn new(solver: SphSolver<D>, state: FluidState<D>, mesh: CriticalMesh<D>, settings: AdapterSettings) -> Self {
        Self {
            solver,
            state,
            mesh,
            settings,
            store: CheckpointStore::new(),
            trace: Vec::new(),
            total_substeps: 0,
        }
    }

    pub fn solver(&self) -> &SphSolver<D> {
        &self.solver
    }

    pub fn state(&self) -> &FluidState<D> {
        &self.state
    }

    pub fn mesh(&self) -> &CriticalMesh<D> {
        &self.mesh
    }

    pub fn settings(&self) -> &AdapterSettings {
        &self.settings
    }

    pub fn trace(&self) -> &[AdapterTraceEntry] {
        &self.trace
    }

    pub fn total_substeps(&self) -> usize {
        self.total_substeps
    }

    pub fn checkpoint_store_saves(&self) -> usize {
        self.store.saves()
    }

    /// Registers the critical mesh as this participant's coupling mesh.
    pub fn register<R: Participant>(&self, system: &mut CouplingSystem<R>) -> Result<(), AdapterError> {
        let mesh = self
            .mesh
            .coupling_mesh(&self.settings.mesh_name)
            .map_err(|e| AdapterError::InvalidMesh(e.to_string()))?;
        system.set_mesh_vertices(mesh)?;
        Ok(())
    }

    fn log(&mut self, window: usize, iteration: usize, event: AdapterEvent) {
        self.trace.push(AdapterTraceEntry {
            window,
            iteration,
            event,
        });
    }

    fn snapshot(&self) -> Snapshot<D> {
        Snapshot {
            state: self.state.clone(),
            current: self.mesh.vertex_displacement.clone(),
            previous: self.mesh.previous_vertex_displacement.clone(),
        }
    }

    /// Steps the fluid to `t_end` with the non-penetration constraint.
    fn subcycle(&mut self, t_end: f64, len: f64, constraint: &mut NonPenetration<D>) -> Result<usize, crate::sph::SphError> {
        let mut n = 0;
        while self.state.time < t_end - 1e-12 * len {
            let dt = self.solver.compute_dt(&self.state).min(t_end - self.state.time);
            self.solver.step_constrained(&mut self.state, dt, constraint)?;
            n += 1;
        }
        self.state.time = t_end;
        Ok(n)
    }

    /// Runs every iteration of the current window until it is accepted.
    pub fn run_window<R: Participant>(&mut self, system: &mut CouplingSystem<R>) -> Result<WindowReport<D>, AdapterError> {
        if !system.is_coupling_ongoing() {
            return Err(CouplingError::Protocol("no window left to run".into()).into());
        }
        let window = system.window();
        let start = system.time();
        let len = system.window_length();
        let local = system.local_name().to_string();
        let mut substeps = 0;
        loop {
            let iteration = system.iteration();
            if system.requires_write_checkpoint() {
                let snap = self.snapshot();
                self.store.save(&snap);
                self.log(window, iteration, AdapterEvent::SaveCheckpoint);
            }

            let disp = system.read(&self.settings.mesh_name, &self.settings.displacement_data)?;
            self.mesh.set_displacement(&disp)?;
            self.log(window, iteration, AdapterEvent::ReadDisplacements);

            let before = particle_contact(&self.state.particles, &self.mesh.previous_geometry(), &self.settings.contact);
            let moved = interpolate_displacements(&mut self.state.particles, &before, &self.mesh, len);
            self.log(window, iteration, AdapterEvent::InterpolateDisplacements { particles: moved });

            let geometry = self.mesh.geometry();
            let velocity = patch_velocities(&self.mesh, len);
            let mut constraint = NonPenetration::new(geometry.clone(), velocity, self.settings.contact);
            system.note(TraceEvent::Solve {
                participant: local.clone(),
            });
            let n = self
                .subcycle(start + len, len, &mut constraint)
                .map_err(|source| AdapterError::Fluid {
                    window,
                    iteration,
                    source,
                })?;
            substeps += n;
            self.total_substeps += n;
            self.log(window, iteration, AdapterEvent::Solve { substeps: n });

            if self.settings.force_mode == ForceMode::NewtonSecondLaw {
                self.solver.compute_rates(&mut self.state.particles);
            }
            let contact = particle_contact(&self.state.particles, &geometry, &self.settings.contact);
            let contacts = contact.contact_count();
            self.log(window, iteration, AdapterEvent::Contact { particles: contacts });
            let gravity = self.solver.params().gravity;
            self.mesh.patch_force = interpolate_forces(
                &self.state.particles,
                &contact,
                &geometry,
                self.settings.force_mode,
                &gravity,
            );
            self.log(window, iteration, AdapterEvent::InterpolateForces);

            let flat: Vec<f64> = self.mesh.vertex_forces().iter().flat_map(|f| f.iter().copied()).collect();
            system.write(&self.settings.mesh_name, &self.settings.force_data, &flat)?;
            self.log(window, iteration, AdapterEvent::WriteForces);

            let outcome = system.advance(len)?;
            self.log(window, iteration, AdapterEvent::Advance(outcome));
            match outcome {
                AdvanceOutcome::IterateAgain => {
                    let snap = self.store.reload()?;
                    self.state = snap.state;
                    self.mesh.vertex_displacement = snap.current;
                    self.mesh.previous_vertex_displacement = snap.previous;
                    self.log(window, iteration, AdapterEvent::ReloadCheckpoint);
                }
                AdvanceOutcome::WindowConverged => {
                    self.mesh.commit_displacement();
                    let stats = system.stats().last().copied();
                    return Ok(WindowReport {
                        window,
                        start,
                        end: start + len,
                        iterations: iteration + 1,
                        substeps,
                        contacts,
                        corrections: constraint.corrections,
                        max_penetration: max_penetration(&self.state.particles, &contact, &geometry),
                        total_force: self.mesh.patch_force.iter().sum(),
                        residual: stats.map_or(0.0, |s| s.residual),
                    });
                }
            }
        }
    }
}

/// Runs all windows, calling `on_window` after each accepted one, then
/// finalizes the coupling and returns the remote participant.
pub fn adapter_loop<const D: usize, R, F, E>(
    adapter: &mut FluidAdapter<D>,
    mut system: CouplingSystem<R>,
    mut on_window: F,
) -> Result<R, E>
where
    R: Participant,
    E: From<AdapterError>,
    F: FnMut(&FluidAdapter<D>, &CouplingSystem<R>, &WindowReport<D>) -> Result<(), E>,
{
    while system.is_coupling_ongoing() {
        let report = adapter.run_window(&mut system)?;
        on_window(adapter, &system, &report)?;
    }
    Ok(system.finalize())
}
