//! Four-node quadrilateral element matrices.

use nalgebra::{Matrix2, Matrix3, SMatrix, SVector, Vector2};
use serde::{Deserialize, Serialize};

use super::{Material, Point, StructureError};

pub type ElementMatrix = SMatrix<f64, 8, 8>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    /// Standard bilinear displacement element, 2x2 Gauss.
    Bilinear,
    /// Bilinear element enriched with two condensed incompatible bending
    /// modes; avoids shear locking in thin members.
    #[default]
    IncompatibleModes,
}

const GAUSS: f64 = 0.577_350_269_189_625_8;
const GAUSS_POINTS: [(f64, f64); 4] = [(-GAUSS, -GAUSS), (GAUSS, -GAUSS), (GAUSS, GAUSS), (-GAUSS, GAUSS)];
const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

pub fn plane_strain_matrix(mat: &Material) -> Matrix3<f64> {
    let e = mat.youngs_modulus;
    let nu = mat.nu;
    let f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Matrix3::new(
        f * (1.0 - nu),
        f * nu,
        0.0,
        f * nu,
        f * (1.0 - nu),
        0.0,
        0.0,
        0.0,
        f * (1.0 - 2.0 * nu) / 2.0,
    )
}

pub(crate) fn shape(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (k, (a, b)) in CORNERS.iter().enumerate() {
        n[k] = 0.25 * (1.0 + a * xi) * (1.0 + b * eta);
    }
    n
}

fn shape_derivatives(xi: f64, eta: f64) -> [(f64, f64); 4] {
    let mut d = [(0.0, 0.0); 4];
    for (k, (a, b)) in CORNERS.iter().enumerate() {
        d[k] = (0.25 * a * (1.0 + b * eta), 0.25 * b * (1.0 + a * xi));
    }
    d
}

/// `J = [[dx/dxi, dy/dxi], [dx/deta, dy/deta]]`.
fn jacobian(x: &[Point; 4], xi: f64, eta: f64) -> Matrix2<f64> {
    let d = shape_derivatives(xi, eta);
    let mut j = Matrix2::zeros();
    for k in 0..4 {
        j[(0, 0)] += d[k].0 * x[k].x;
        j[(0, 1)] += d[k].0 * x[k].y;
        j[(1, 0)] += d[k].1 * x[k].x;
        j[(1, 1)] += d[k].1 * x[k].y;
    }
    j
}

/// Physical position of the parametric point `(xi, eta)`.
pub(crate) fn map_point(x: &[Point; 4], xi: f64, eta: f64) -> Point {
    let n = shape(xi, eta);
    (0..4).fold(Point::zeros(), |acc, k| acc + x[k] * n[k])
}

/// Inverts the bilinear map by Newton iteration.
pub(crate) fn inverse_map(x: &[Point; 4], p: &Point) -> Option<(f64, f64)> {
    let (mut xi, mut eta) = (0.0, 0.0);
    for _ in 0..50 {
        let r = map_point(x, xi, eta) - p;
        if r.norm() < 1e-14 * (1.0 + p.norm()) {
            return Some((xi, eta));
        }
        let jt = jacobian(x, xi, eta).transpose();
        let step = jt.try_inverse()? * r;
        xi -= step.x;
        eta -= step.y;
    }
    let r = map_point(x, xi, eta) - p;
    (r.norm() < 1e-10 * (1.0 + p.norm())).then_some((xi, eta))
}

/// Smallest Jacobian determinant over the corners and Gauss points.
pub(crate) fn min_det_j(x: &[Point; 4]) -> f64 {
    CORNERS
        .iter()
        .chain(GAUSS_POINTS.iter())
        .map(|&(a, b)| jacobian(x, a, b).determinant())
        .fold(f64::INFINITY, f64::min)
}

fn strain_matrix(dn: &[Vector2<f64>; 4]) -> SMatrix<f64, 3, 8> {
    let mut b = SMatrix::<f64, 3, 8>::zeros();
    for k in 0..4 {
        b[(0, 2 * k)] = dn[k].x;
        b[(1, 2 * k + 1)] = dn[k].y;
        b[(2, 2 * k)] = dn[k].y;
        b[(2, 2 * k + 1)] = dn[k].x;
    }
    b
}

/// Stiffness of one element with counter-clockwise node order.
pub fn element_stiffness(
    x: &[Point; 4],
    mat: &Material,
    kind: ElementKind,
) -> Result<ElementMatrix, StructureError> {
    let det_min = min_det_j(x);
    if !(det_min > 0.0) {
        return Err(StructureError::DegenerateElement {
            element: usize::MAX,
            det_j: det_min,
        });
    }
    let d = plane_strain_matrix(mat);
    let j0 = jacobian(x, 0.0, 0.0);
    let det0 = j0.determinant();
    let j0_inv = j0.try_inverse().expect("positive determinant");

    let mut kcc = ElementMatrix::zeros();
    let mut kic = SMatrix::<f64, 4, 8>::zeros();
    let mut kii = SMatrix::<f64, 4, 4>::zeros();
    for &(xi, eta) in &GAUSS_POINTS {
        let j = jacobian(x, xi, eta);
        let det = j.determinant();
        let j_inv = j.try_inverse().expect("positive determinant");
        let local = shape_derivatives(xi, eta);
        let dn: [Vector2<f64>; 4] = std::array::from_fn(|k| j_inv * Vector2::new(local[k].0, local[k].1));
        let b = strain_matrix(&dn);
        kcc += b.transpose() * d * b * det;

        if kind == ElementKind::IncompatibleModes {
            // Mode derivatives use the centre Jacobian, scaled so that the
            // enriched strain integrates to zero over the element.
            let scale = det0 / det;
            let p1 = j0_inv * Vector2::new(-2.0 * xi, 0.0) * scale;
            let p2 = j0_inv * Vector2::new(0.0, -2.0 * eta) * scale;
            let mut bi = SMatrix::<f64, 3, 4>::zeros();
            for (m, g) in [p1, p2].iter().enumerate() {
                bi[(0, 2 * m)] = g.x;
                bi[(1, 2 * m + 1)] = g.y;
                bi[(2, 2 * m)] = g.y;
                bi[(2, 2 * m + 1)] = g.x;
            }
            kic += bi.transpose() * d * b * det;
            kii += bi.transpose() * d * bi * det;
        }
    }
    if kind == ElementKind::IncompatibleModes {
        let kii_inv = kii.try_inverse().ok_or(StructureError::DegenerateElement {
            element: usize::MAX,
            det_j: det_min,
        })?;
        kcc -= kic.transpose() * kii_inv * kic;
        kcc = (kcc + kcc.transpose()) * 0.5;
    }
    Ok(kcc)
}

/// Consistent mass of one element (unit thickness).
pub fn bilinear_mass(x: &[Point; 4], rho: f64) -> ElementMatrix {
    let mut m = ElementMatrix::zeros();
    for &(xi, eta) in &GAUSS_POINTS {
        let det = jacobian(x, xi, eta).determinant();
        let n = SVector::<f64, 4>::from(shape(xi, eta));
        let nn = n * n.transpose() * (rho * det);
        for a in 0..4 {
            for b in 0..4 {
                m[(2 * a, 2 * b)] += nn[(a, b)];
                m[(2 * a + 1, 2 * b + 1)] += nn[(a, b)];
            }
        }
    }
    m
}
