use std::collections::BTreeSet;

use nalgebra::{DVector, Vector3};
use pmc_core::structure::{
    apply_traction, assemble, plane_strain_matrix, Damping, ElementKind, FemMesh, Material, NewmarkSolver, Point, Side,
};
use proptest::prelude::*;

const KINDS: [ElementKind; 2] = [ElementKind::Bilinear, ElementKind::IncompatibleModes];

/// 2x2 patch on the unit square with the centre node moved to `c`.
fn patch(c: Point) -> FemMesh {
    let mut nodes = Vec::new();
    for j in 0..3 {
        for i in 0..3 {
            nodes.push(Point::new(0.5 * i as f64, 0.5 * j as f64));
        }
    }
    nodes[4] = c;
    let elements = vec![[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]];
    FemMesh::new(nodes, elements, BTreeSet::new(), Vec::new()).unwrap()
}

/// Linear displacement field with strain (exx, eyy, gxy) plus a rigid shift.
fn linear_field(mesh: &FemMesh, strain: Vector3<f64>, shift: Point) -> DVector<f64> {
    let (exx, eyy, gxy) = (strain[0], strain[1], strain[2]);
    let mut u = DVector::zeros(mesh.dof_count());
    for (n, p) in mesh.nodes.iter().enumerate() {
        u[2 * n] = shift.x + exx * p.x + 0.5 * gxy * p.y;
        u[2 * n + 1] = shift.y + 0.5 * gxy * p.x + eyy * p.y;
    }
    u
}

fn check_patch(c: Point, strain: Vector3<f64>) {
    let mat = Material::new(1000.0, 2.0e6, 0.3).unwrap();
    let mesh = patch(c);
    let u = linear_field(&mesh, strain, Point::new(0.01, -0.02));
    let pure = linear_field(&mesh, strain, Point::zeros());
    let d = plane_strain_matrix(&mat);
    let exact = 0.5 * strain.dot(&(d * strain)) * mesh.area();
    for kind in KINDS {
        let ops = assemble(&mesh, &mat, kind).unwrap();
        let f = &ops.stiffness * &u;
        let scale = f.amax().max(1e-300);
        assert!(f[8].abs() < 1e-10 * scale && f[9].abs() < 1e-10 * scale, "{kind:?}: interior force {} {}", f[8], f[9]);
        let energy = 0.5 * pure.dot(&(&ops.stiffness * &pure));
        assert!((energy - exact).abs() < 1e-10 * exact, "{kind:?}: {energy} vs {exact}");
    }
}

#[test]
fn patch_test_on_distorted_mesh() {
    check_patch(Point::new(0.62, 0.41), Vector3::new(1e-3, -4e-4, 7e-4));
    check_patch(Point::new(0.5, 0.5), Vector3::new(0.0, 2e-3, 0.0));
}

fn cantilever(nx: usize, ny: usize, nu: f64) -> (FemMesh, Material) {
    let mut mesh = FemMesh::rectangle(Point::zeros(), 1.0, 0.1, nx, ny).unwrap();
    mesh.fix_side(Side::Left).unwrap();
    mesh.add_surface_side(Side::Right).unwrap();
    (mesh, Material::new(1000.0, 1.0e7, nu).unwrap())
}

/// Uniform end shear `p` spread over the right-hand faces.
fn end_shear(mesh: &FemMesh, p: f64) -> DVector<f64> {
    let faces: Vec<usize> = (0..mesh.surface_faces.len()).collect();
    let total: f64 = faces.iter().map(|&f| mesh.face_length(f)).sum();
    let forces: Vec<(usize, Point)> = faces
        .iter()
        .map(|&f| (f, Point::new(0.0, p * mesh.face_length(f) / total)))
        .collect();
    apply_traction(mesh, &forces).unwrap()
}

#[test]
fn cantilever_tip_deflection_matches_beam_theory() {
    for nu in [0.0, 0.3] {
        let (mesh, mat) = cantilever(40, 4, nu);
        let p = -5.0;
        let s = NewmarkSolver::new(mesh, mat, ElementKind::IncompatibleModes, Damping::default()).unwrap();
        let u = s.solve_static(&end_shear(s.mesh(), p)).unwrap();
        let right = s.mesh().side_nodes(Side::Right).unwrap();
        let tip = right.iter().map(|&n| u[2 * n + 1]).sum::<f64>() / right.len() as f64;
        // plane strain bending stiffness
        let ei = mat.youngs_modulus / (1.0 - nu * nu) * 0.1f64.powi(3) / 12.0;
        let theory = p / (3.0 * ei);
        assert!((tip - theory).abs() < 0.1 * theory.abs(), "nu {nu}: {tip} vs {theory}");
    }
}

#[test]
fn undamped_free_vibration_conserves_energy() {
    let (mesh, mat) = cantilever(12, 2, 0.3);
    let mut s = NewmarkSolver::new(mesh, mat, ElementKind::IncompatibleModes, Damping::default()).unwrap();
    let mut st = s.zero_state();
    st.u = s.solve_static(&end_shear(s.mesh(), -2.0)).unwrap();
    let zero = DVector::zeros(st.u.len());
    st.a = s.initial_acceleration(&st, &zero).unwrap();
    let e0 = s.strain_energy(&st);
    for _ in 0..1000 {
        st = s.step(&st, &zero, 5e-4).unwrap();
    }
    let e1 = s.strain_energy(&st) + s.kinetic_energy(&st);
    assert!(((e1 - e0) / e0).abs() < 1e-6, "{e0} -> {e1}");
}

#[test]
fn suddenly_applied_load_keeps_total_energy() {
    let (mesh, mat) = cantilever(10, 2, 0.2);
    let mut s = NewmarkSolver::new(mesh, mat, ElementKind::Bilinear, Damping::default()).unwrap();
    let f = end_shear(s.mesh(), 3.0);
    let mut st = s.zero_state();
    st.a = s.initial_acceleration(&st, &f).unwrap();
    let mut peak: f64 = 0.0;
    for _ in 0..500 {
        st = s.step(&st, &f, 1e-3).unwrap();
        let total = s.kinetic_energy(&st) + s.strain_energy(&st) - f.dot(&st.u);
        assert!(total.abs() < 1e-9 * f.dot(&s.solve_static(&f).unwrap()), "{total}");
        peak = peak.max(st.u.amax());
    }
    // a step load overshoots the static answer by up to a factor of two
    let stat = s.solve_static(&f).unwrap().amax();
    assert!(peak > 1.5 * stat && peak < 2.0 * stat * (1.0 + 1e-6), "{peak} vs {stat}");
}

#[test]
fn damped_response_settles_on_static_solution() {
    let (mesh, mat) = cantilever(10, 2, 0.3);
    let damping = Damping {
        mass: 20.0,
        stiffness: 1e-4,
    };
    let mut s = NewmarkSolver::new(mesh, mat, ElementKind::IncompatibleModes, damping).unwrap();
    let f = end_shear(s.mesh(), -1.0);
    let target = s.solve_static(&f).unwrap();
    let mut st = s.zero_state();
    st.a = s.initial_acceleration(&st, &f).unwrap();
    for _ in 0..4000 {
        st = s.step(&st, &f, 1e-3).unwrap();
    }
    let err = (&st.u - &target).amax() / target.amax();
    assert!(err < 1e-6, "relative error {err}");
}

#[test]
fn damped_free_vibration_loses_energy_every_step() {
    let (mesh, mat) = cantilever(8, 2, 0.3);
    let damping = Damping {
        mass: 2.0,
        stiffness: 1e-5,
    };
    let mut s = NewmarkSolver::new(mesh, mat, ElementKind::IncompatibleModes, damping).unwrap();
    let mut st = s.zero_state();
    st.u = s.solve_static(&end_shear(s.mesh(), 1.0)).unwrap();
    let zero = DVector::zeros(st.u.len());
    st.a = s.initial_acceleration(&st, &zero).unwrap();
    let mut e = s.strain_energy(&st);
    let e0 = e;
    for _ in 0..2000 {
        st = s.step(&st, &zero, 1e-3).unwrap();
        let next = s.strain_energy(&st) + s.kinetic_energy(&st);
        assert!(next <= e * (1.0 + 1e-12), "{e} -> {next}");
        e = next;
    }
    assert!(e < 0.1 * e0, "{e0} -> {e}");
}

proptest! {
    #[test]
    fn patch_test_holds_for_any_admissible_centre(
        cx in 0.3f64..0.7,
        cy in 0.3f64..0.7,
        exx in -1e-3f64..1e-3,
        eyy in -1e-3f64..1e-3,
        gxy in -1e-3f64..1e-3,
    ) {
        prop_assume!(exx.abs() + eyy.abs() + gxy.abs() > 1e-5);
        check_patch(Point::new(cx, cy), Vector3::new(exx, eyy, gxy));
    }
}
