//! The structure solver as the second coupling participant.

use nalgebra::DVector;

use super::{NewmarkSolver, Point, StructureError, StructureState};
use crate::coupling::{FieldSet, Participant, ParticipantError};
use crate::mapping::CouplingMesh;

/// Reads per-vertex forces on the wet surface and returns per-vertex
/// displacements, both ordered by surface vertex id.
#[derive(Debug, Clone)]
pub struct StructureParticipant {
    name: String,
    mesh_name: String,
    solver: NewmarkSolver,
    state: StructureState,
    surface: Vec<usize>,
    max_step: Option<f64>,
    pub force_data: String,
    pub displacement_data: String,
}

impl StructureParticipant {
    pub fn new(name: impl Into<String>, mesh_name: impl Into<String>, solver: NewmarkSolver) -> Self {
        let surface = solver.mesh().surface_vertices();
        let state = solver.zero_state();
        Self {
            name: name.into(),
            mesh_name: mesh_name.into(),
            solver,
            state,
            surface,
            max_step: None,
            force_data: "Forces".into(),
            displacement_data: "Displacements".into(),
        }
    }

    /// Splits each window into Newmark steps no longer than `dt`.
    pub fn with_max_step(mut self, dt: f64) -> Self {
        self.max_step = Some(dt);
        self
    }

    pub fn solver(&self) -> &NewmarkSolver {
        &self.solver
    }

    pub fn state(&self) -> &StructureState {
        &self.state
    }

    /// Node ids of the wet-surface vertices, in exchange order.
    pub fn surface_nodes(&self) -> &[usize] {
        &self.surface
    }

    pub fn displacement_at(&self, p: &Point) -> Option<Point> {
        self.solver.displacement_at(&self.state, p)
    }

    /// Nodal load vector from flat per-surface-vertex forces.
    pub fn nodal_loads(&self, forces: &[f64]) -> Result<DVector<f64>, StructureError> {
        if forces.len() != 2 * self.surface.len() {
            return Err(StructureError::LengthMismatch {
                expected: 2 * self.surface.len(),
                got: forces.len(),
            });
        }
        let mut f = DVector::zeros(self.solver.mesh().dof_count());
        for (k, &n) in self.surface.iter().enumerate() {
            f[2 * n] += forces[2 * k];
            f[2 * n + 1] += forces[2 * k + 1];
        }
        Ok(f)
    }

    fn advance(&mut self, dt: f64, loads: &DVector<f64>) -> Result<(), StructureError> {
        let steps = match self.max_step {
            Some(h) if h < dt => (dt / h).ceil() as usize,
            _ => 1,
        };
        let h = dt / steps as f64;
        for _ in 0..steps {
            self.state = self.solver.step(&self.state, loads, h)?;
        }
        Ok(())
    }
}

impl Participant for StructureParticipant {
    type Checkpoint = StructureState;

    fn name(&self) -> &str {
        &self.name
    }

    fn mesh(&self) -> CouplingMesh {
        let mesh = self.solver.mesh();
        let index = mesh.surface_vertex_index();
        let coords = self
            .surface
            .iter()
            .flat_map(|&n| [mesh.nodes[n].x, mesh.nodes[n].y])
            .collect();
        let edges = mesh
            .surface_faces
            .iter()
            .map(|f| [index[&f.nodes[0]], index[&f.nodes[1]]])
            .collect();
        CouplingMesh::new(self.mesh_name.clone(), 2, coords)
            .and_then(|m| m.with_edges(edges))
            .expect("surface vertices form a valid mesh")
    }

    fn solve_window(&mut self, dt: f64, inputs: &FieldSet) -> Result<FieldSet, ParticipantError> {
        let forces = inputs
            .get(&self.force_data)
            .ok_or_else(|| format!("missing input {:?}", self.force_data))?;
        let loads = self.nodal_loads(forces)?;
        self.advance(dt, &loads)?;
        if let Some(x) = self.state.u.iter().find(|x| !x.is_finite()) {
            return Err(format!("non-finite displacement {x} at t = {}", self.state.t).into());
        }
        let disp = self
            .solver
            .surface_displacements(&self.state)
            .into_iter()
            .flat_map(|d| [d.x, d.y])
            .collect();
        Ok(FieldSet::from([(self.displacement_data.clone(), disp)]))
    }

    fn checkpoint(&self) -> StructureState {
        self.state.clone()
    }

    fn reload(&mut self, checkpoint: &StructureState) {
        self.state = checkpoint.clone();
    }
}
