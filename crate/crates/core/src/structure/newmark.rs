//! Average-acceleration Newmark integration on the unconstrained DOFs.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::assembly::{assemble, Operators};
use super::element::ElementKind;
use super::{FemMesh, Material, Point, StructureError};

/// Rayleigh damping `C = mass * M + stiffness * K`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Damping {
    pub mass: f64,
    pub stiffness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureState {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub a: DVector<f64>,
    pub t: f64,
}

impl StructureState {
    pub fn zeros(dofs: usize) -> Self {
        Self {
            u: DVector::zeros(dofs),
            v: DVector::zeros(dofs),
            a: DVector::zeros(dofs),
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewmarkSolver {
    mesh: FemMesh,
    material: Material,
    ops: Operators,
    damping_matrix: DMatrix<f64>,
    free: Vec<usize>,
    factor: Option<(f64, Cholesky<f64, Dyn>)>,
}

impl NewmarkSolver {
    pub fn new(
        mesh: FemMesh,
        material: Material,
        kind: ElementKind,
        damping: Damping,
    ) -> Result<Self, StructureError> {
        let ops = assemble(&mesh, &material, kind)?;
        let damping_matrix = &ops.mass * damping.mass + &ops.stiffness * damping.stiffness;
        let free = (0..mesh.dof_count())
            .filter(|d| !mesh.fixed_nodes.contains(&(d / 2)))
            .collect();
        Ok(Self {
            mesh,
            material,
            ops,
            damping_matrix,
            free,
            factor: None,
        })
    }

    pub fn mesh(&self) -> &FemMesh {
        &self.mesh
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn damping_matrix(&self) -> &DMatrix<f64> {
        &self.damping_matrix
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn zero_state(&self) -> StructureState {
        StructureState::zeros(self.mesh.dof_count())
    }

    fn restrict_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.free.len();
        DMatrix::from_fn(n, n, |i, j| a[(self.free[i], self.free[j])])
    }

    fn restrict(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.free.len(), |i, _| v[self.free[i]])
    }

    fn expand(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.mesh.dof_count());
        for (i, &d) in self.free.iter().enumerate() {
            out[d] = v[i];
        }
        out
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<(), StructureError> {
        let n = self.mesh.dof_count();
        if v.len() != n {
            return Err(StructureError::LengthMismatch { expected: n, got: v.len() });
        }
        Ok(())
    }

    /// Static solution `K u = f` on the free DOFs.
    pub fn solve_static(&self, loads: &DVector<f64>) -> Result<DVector<f64>, StructureError> {
        self.check_len(loads)?;
        let k = self.restrict_matrix(&self.ops.stiffness);
        let chol = Cholesky::new(k).ok_or(StructureError::Singular)?;
        Ok(self.expand(&chol.solve(&self.restrict(loads))))
    }

    /// Acceleration consistent with the equation of motion at the current state.
    pub fn initial_acceleration(
        &self,
        state: &StructureState,
        loads: &DVector<f64>,
    ) -> Result<DVector<f64>, StructureError> {
        self.check_len(loads)?;
        let rhs = loads - &self.ops.stiffness * &state.u - &self.damping_matrix * &state.v;
        let m = self.restrict_matrix(&self.ops.mass);
        let chol = Cholesky::new(m).ok_or(StructureError::Singular)?;
        Ok(self.expand(&chol.solve(&self.restrict(&rhs))))
    }

    fn factor_for(&mut self, dt: f64) -> Result<&Cholesky<f64, Dyn>, StructureError> {
        if self.factor.as_ref().map(|(d, _)| *d) != Some(dt) {
            let c0 = 4.0 / (dt * dt);
            let c1 = 2.0 / dt;
            let keff = &self.ops.stiffness + &self.ops.mass * c0 + &self.damping_matrix * c1;
            let chol = Cholesky::new(self.restrict_matrix(&keff)).ok_or(StructureError::Singular)?;
            self.factor = Some((dt, chol));
        }
        Ok(&self.factor.as_ref().expect("factor just set").1)
    }

    /// One step to `t + dt` under the loads at the end of the step.
    pub fn step(
        &mut self,
        state: &StructureState,
        loads: &DVector<f64>,
        dt: f64,
    ) -> Result<StructureState, StructureError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(StructureError::InvalidTimeStep(dt));
        }
        self.check_len(loads)?;
        let c0 = 4.0 / (dt * dt);
        let c1 = 2.0 / dt;
        let rhs = loads
            + &self.ops.mass * (&state.u * c0 + &state.v * (4.0 / dt) + &state.a)
            + &self.damping_matrix * (&state.u * c1 + &state.v);
        let rhs_free = self.restrict(&rhs);
        let u_free = self.factor_for(dt)?.solve(&rhs_free);
        let u = self.expand(&u_free);
        let a = (&u - &state.u) * c0 - &state.v * (4.0 / dt) - &state.a;
        let v = &state.v + (&state.a + &a) * (0.5 * dt);
        let mut next = StructureState {
            u,
            v,
            a,
            t: state.t + dt,
        };
        for &n in &self.mesh.fixed_nodes {
            for d in [2 * n, 2 * n + 1] {
                next.u[d] = 0.0;
                next.v[d] = 0.0;
                next.a[d] = 0.0;
            }
        }
        Ok(next)
    }

    pub fn kinetic_energy(&self, state: &StructureState) -> f64 {
        0.5 * state.v.dot(&(&self.ops.mass * &state.v))
    }

    pub fn strain_energy(&self, state: &StructureState) -> f64 {
        0.5 * state.u.dot(&(&self.ops.stiffness * &state.u))
    }

    /// Displacements of the wet-surface vertices, ordered by node id.
    pub fn surface_displacements(&self, state: &StructureState) -> Vec<Point> {
        self.mesh
            .surface_vertices()
            .into_iter()
            .map(|n| Point::new(state.u[2 * n], state.u[2 * n + 1]))
            .collect()
    }

    /// Displacement at an arbitrary point inside the mesh.
    pub fn displacement_at(&self, state: &StructureState, p: &Point) -> Option<Point> {
        self.mesh.interpolate(state.u.as_slice(), p)
    }
}
