use nalgebra::{DMatrix, DVector};

use super::element::{bilinear_mass, element_stiffness, ElementKind};
use super::{FemMesh, Material, Point, StructureError};

/// Global stiffness and consistent mass, two DOFs per node interleaved `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operators {
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

pub fn assemble(mesh: &FemMesh, mat: &Material, kind: ElementKind) -> Result<Operators, StructureError> {
    mat.validate()?;
    let n = mesh.dof_count();
    let mut k = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for (e, conn) in mesh.elements.iter().enumerate() {
        let x = mesh.element_coords(e);
        let ke = element_stiffness(&x, mat, kind).map_err(|err| match err {
            StructureError::DegenerateElement { det_j, .. } => StructureError::DegenerateElement { element: e, det_j },
            other => other,
        })?;
        let me = bilinear_mass(&x, mat.rho_s);
        for a in 0..8 {
            let ga = 2 * conn[a / 2] + a % 2;
            for b in 0..8 {
                let gb = 2 * conn[b / 2] + b % 2;
                k[(ga, gb)] += ke[(a, b)];
                m[(ga, gb)] += me[(a, b)];
            }
        }
    }
    Ok(Operators { stiffness: k, mass: m })
}

/// Nodal loads from per-face forces; each face force is split evenly
/// between its two nodes. Repeated face ids accumulate.
pub fn apply_traction(mesh: &FemMesh, face_forces: &[(usize, Point)]) -> Result<DVector<f64>, StructureError> {
    let mut f = DVector::zeros(mesh.dof_count());
    for &(face, force) in face_forces {
        let sf = mesh.surface_faces.get(face).ok_or(StructureError::UnknownFace(face))?;
        for &node in &sf.nodes {
            f[2 * node] += 0.5 * force.x;
            f[2 * node + 1] += 0.5 * force.y;
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Side;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh() -> FemMesh {
        let mut m = FemMesh::rectangle(Point::zeros(), 1.0, 0.2, 5, 2).unwrap();
        m.add_surface_side(Side::Top).unwrap();
        m.add_surface_side(Side::Right).unwrap();
        m
    }

    #[test]
    fn translation_is_in_null_space() {
        let m = mesh();
        let mat = Material::new(1000.0, 1e6, 0.3).unwrap();
        let ops = assemble(&m, &mat, ElementKind::IncompatibleModes).unwrap();
        let u = DVector::from_fn(m.dof_count(), |i, _| if i % 2 == 0 { 0.3 } else { -0.7 });
        assert!((&ops.stiffness * u).norm() < 1e-8);
        assert!((&ops.stiffness - ops.stiffness.transpose()).norm() < 1e-9 * ops.stiffness.norm());
    }

    #[test]
    fn mass_rows_sum_to_total_mass() {
        let m = mesh();
        let mat = Material::new(1161.54, 3.5e6, 0.45).unwrap();
        let ops = assemble(&m, &mat, ElementKind::Bilinear).unwrap();
        let total = mat.rho_s * m.area();
        for dir in 0..2 {
            let s: f64 = (dir..m.dof_count()).step_by(2).map(|r| ops.mass.row(r).sum()).sum();
            assert!((s - total).abs() < 1e-12 * total);
        }
    }

    #[test]
    fn degenerate_element_is_named() {
        let mut m = FemMesh::rectangle(Point::zeros(), 1.0, 1.0, 2, 1).unwrap();
        m.nodes[5] = Point::new(0.2, 1.0);
        let mat = Material::new(1000.0, 1e6, 0.3).unwrap();
        let err = assemble(&m, &mat, ElementKind::Bilinear).unwrap_err();
        assert!(matches!(err, StructureError::DegenerateElement { element: 1, .. }), "{err:?}");
    }

    #[test]
    fn traction_split_and_conservation() {
        let m = mesh();
        assert_eq!(apply_traction(&m, &[]).unwrap().norm(), 0.0);
        let f = apply_traction(&m, &[(0, Point::new(2.0, -4.0))]).unwrap();
        let [a, b] = m.surface_faces[0].nodes;
        assert_eq!((f[2 * a], f[2 * a + 1]), (1.0, -2.0));
        assert_eq!((f[2 * b], f[2 * b + 1]), (1.0, -2.0));
        assert_eq!(apply_traction(&m, &[(99, Point::zeros())]), Err(StructureError::UnknownFace(99)));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let forces: Vec<(usize, Point)> = (0..m.surface_faces.len())
            .map(|i| (i, Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        let f = apply_traction(&m, &forces).unwrap();
        let sum_in = forces.iter().fold(Point::zeros(), |acc, (_, v)| acc + v);
        let sx: f64 = f.iter().step_by(2).sum();
        let sy: f64 = f.iter().skip(1).step_by(2).sum();
        assert!((sx - sum_in.x).abs() < 1e-14 && (sy - sum_in.y).abs() < 1e-14);
    }
}
