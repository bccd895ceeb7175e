//! The one-layer interface mesh between particles and the coupling mesh.

use std::collections::HashMap;

use super::AdapterError;
use crate::mapping::{CouplingMesh, MappingError};
use crate::sph::Vector;
use crate::structure::FemMesh;

/// Positions, normals and derived quantities of the patches in one
/// configuration of the critical mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGeometry<const D: usize> {
    pub vertices: Vec<Vector<D>>,
    pub patches: Vec<[usize; D]>,
    pub normals: Vec<Vector<D>>,
    pub centroids: Vec<Vector<D>>,
    pub areas: Vec<f64>,
    /// Largest centroid-to-vertex distance over all patches.
    pub radius: f64,
}

impl<const D: usize> PatchGeometry<D> {
    fn new(vertices: Vec<Vector<D>>, patches: &[[usize; D]], flip: bool) -> Result<Self, AdapterError> {
        let sign = if flip { -1.0 } else { 1.0 };
        let mut normals = Vec::with_capacity(patches.len());
        let mut centroids = Vec::with_capacity(patches.len());
        let mut areas = Vec::with_capacity(patches.len());
        let mut radius = 0.0f64;
        for (k, p) in patches.iter().enumerate() {
            let pts: Vec<Vector<D>> = p.iter().map(|&v| vertices[v]).collect();
            let (n, area) = raw_normal(&pts);
            if !(area > 0.0) {
                return Err(AdapterError::InvalidMesh(format!("patch {k} is degenerate")));
            }
            let c = pts.iter().fold(Vector::zeros(), |a, x| a + x) / D as f64;
            radius = pts.iter().map(|x| (x - c).norm()).fold(radius, f64::max);
            normals.push(n * (sign / n.norm()));
            centroids.push(c);
            areas.push(area);
        }
        Ok(Self {
            vertices,
            patches: patches.to_vec(),
            normals,
            centroids,
            areas,
            radius,
        })
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Closest point of patch `k` to `p`.
    pub fn closest_point(&self, k: usize, p: &Vector<D>) -> Vector<D> {
        let v = &self.patches[k];
        if D == 2 {
            closest_on_segment(p, &self.vertices[v[0]], &self.vertices[v[1]])
        } else {
            closest_on_triangle(p, &self.vertices[v[0]], &self.vertices[v[1]], &self.vertices[v[2]])
        }
    }

    pub fn distance(&self, k: usize, p: &Vector<D>) -> f64 {
        (self.closest_point(k, p) - p).norm()
    }

    /// Distance to patch `k`, negative on the solid side of its normal.
    pub fn signed_distance(&self, k: usize, p: &Vector<D>) -> f64 {
        let q = self.closest_point(k, p);
        let d = (p - q).norm();
        if (p - q).dot(&self.normals[k]) < 0.0 {
            -d
        } else {
            d
        }
    }
}

/// Unnormalized right-hand normal and the patch measure.
fn raw_normal<const D: usize>(pts: &[Vector<D>]) -> (Vector<D>, f64) {
    let mut n = Vector::<D>::zeros();
    match D {
        2 => {
            let t = pts[1] - pts[0];
            n[0] = t[1];
            n[1] = -t[0];
            let len = n.norm();
            (n, len)
        }
        3 => {
            let a = pts[1] - pts[0];
            let b = pts[2] - pts[0];
            n[0] = a[1] * b[2] - a[2] * b[1];
            n[1] = a[2] * b[0] - a[0] * b[2];
            n[2] = a[0] * b[1] - a[1] * b[0];
            let len = n.norm();
            (n, 0.5 * len)
        }
        _ => unreachable!("critical meshes are 2D or 3D"),
    }
}

pub(crate) fn closest_on_segment<const D: usize>(p: &Vector<D>, a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    a + ab * s
}

/// Closest point on a triangle by Voronoi-region classification.
pub(crate) fn closest_on_triangle<const D: usize>(
    p: &Vector<D>,
    a: &Vector<D>,
    b: &Vector<D>,
    c: &Vector<D>,
) -> Vector<D> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Surface patches on the wet interface with per-vertex displacement state.
///
/// Patches are segments in 2D and triangles in 3D. Normals follow the
/// right-hand rule on the vertex order (in 2D: to the right of the
/// direction of travel), negated when `flip` is set, and must point into
/// the fluid.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalMesh<const D: usize> {
    reference: Vec<Vector<D>>,
    patches: Vec<[usize; D]>,
    flip: bool,
    pub vertex_displacement: Vec<Vector<D>>,
    pub previous_vertex_displacement: Vec<Vector<D>>,
    pub patch_force: Vec<Vector<D>>,
}

impl<const D: usize> CriticalMesh<D> {
    pub fn new(vertices: Vec<Vector<D>>, patches: Vec<[usize; D]>, flip: bool) -> Result<Self, AdapterError> {
        if D != 2 && D != 3 {
            return Err(AdapterError::InvalidMesh(format!("unsupported dimension {D}")));
        }
        if patches.is_empty() {
            return Err(AdapterError::InvalidMesh("no patches".into()));
        }
        if let Some(x) = vertices.iter().flat_map(|v| v.iter()).find(|x| !x.is_finite()) {
            return Err(AdapterError::InvalidMesh(format!("non-finite vertex coordinate {x}")));
        }
        let n = vertices.len();
        for (k, p) in patches.iter().enumerate() {
            if p.iter().any(|&v| v >= n) {
                return Err(AdapterError::InvalidMesh(format!("patch {k} references a missing vertex")));
            }
        }
        // Validates non-degeneracy.
        let geometry = PatchGeometry::new(vertices.clone(), &patches, flip)?;
        check_orientable(&patches)?;
        if D == 2 {
            check_no_self_intersection(&geometry)?;
        }
        let zero = vec![Vector::zeros(); n];
        Ok(Self {
            reference: vertices,
            patch_force: vec![Vector::zeros(); patches.len()],
            patches,
            flip,
            vertex_displacement: zero.clone(),
            previous_vertex_displacement: zero,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.reference.len()
    }

    pub fn patch_count(&self) -> usize {
        self.patches.len()
    }

    pub fn patches(&self) -> &[[usize; D]] {
        &self.patches
    }

    pub fn reference_vertices(&self) -> &[Vector<D>] {
        &self.reference
    }

    pub fn is_flipped(&self) -> bool {
        self.flip
    }

    fn geometry_with(&self, disp: &[Vector<D>]) -> PatchGeometry<D> {
        let v = self.reference.iter().zip(disp).map(|(x, u)| x + u).collect();
        PatchGeometry::new(v, &self.patches, self.flip).expect("deformed patch collapsed")
    }

    /// Geometry displaced by `vertex_displacement`.
    pub fn geometry(&self) -> PatchGeometry<D> {
        self.geometry_with(&self.vertex_displacement)
    }

    /// Geometry displaced by `previous_vertex_displacement`.
    pub fn previous_geometry(&self) -> PatchGeometry<D> {
        self.geometry_with(&self.previous_vertex_displacement)
    }

    /// Mean displacement of each patch's vertices.
    pub fn patch_displacement(&self, disp: &[Vector<D>]) -> Vec<Vector<D>> {
        self.patches
            .iter()
            .map(|p| p.iter().fold(Vector::zeros(), |a, &v| a + disp[v]) / D as f64)
            .collect()
    }

    /// Patch motion since the previous window: current minus last.
    pub fn relative_displacement(&self) -> Vec<Vector<D>> {
        let now = self.patch_displacement(&self.vertex_displacement);
        let last = self.patch_displacement(&self.previous_vertex_displacement);
        now.iter().zip(&last).map(|(a, b)| a - b).collect()
    }

    /// Sets the current displacement from a flat `D`-per-vertex slice.
    pub fn set_displacement(&mut self, flat: &[f64]) -> Result<(), AdapterError> {
        let n = self.reference.len() * D;
        if flat.len() != n {
            return Err(AdapterError::InvalidMesh(format!(
                "displacement has {} values, expected {n}",
                flat.len()
            )));
        }
        for (u, c) in self.vertex_displacement.iter_mut().zip(flat.chunks_exact(D)) {
            *u = Vector::from_column_slice(c);
        }
        Ok(())
    }

    /// Accepts the current displacement as the start of the next window.
    pub fn commit_displacement(&mut self) {
        self.previous_vertex_displacement.clone_from(&self.vertex_displacement);
    }

    /// Spreads each patch force equally over the patch vertices.
    pub fn vertex_forces(&self) -> Vec<Vector<D>> {
        let mut out = vec![Vector::zeros(); self.reference.len()];
        for (p, f) in self.patches.iter().zip(&self.patch_force) {
            for &v in p {
                out[v] += f / D as f64;
            }
        }
        out
    }

    /// Coupling mesh at the reference vertices with the patch topology.
    pub fn coupling_mesh(&self, name: &str) -> Result<CouplingMesh, MappingError> {
        let coords = self.reference.iter().flat_map(|v| v.iter().copied()).collect();
        let mesh = CouplingMesh::new(name, D, coords)?;
        if D == 2 {
            mesh.with_edges(self.patches.iter().map(|p| [p[0], p[1]]).collect())
        } else {
            mesh.with_triangles(self.patches.iter().map(|p| [p[0], p[1], p[2]]).collect())
        }
    }
}

impl CriticalMesh<2> {
    /// Critical mesh on the wet faces of a structure mesh.
    ///
    /// Vertices are the surface vertices in ascending node id, so the
    /// structure's exchange ordering matches. Faces are oriented so that
    /// the unflipped normal is the outward normal of the solid.
    pub fn from_structure(mesh: &FemMesh, flip: bool) -> Result<Self, AdapterError> {
        let ids = mesh.surface_vertices();
        if ids.is_empty() {
            return Err(AdapterError::InvalidMesh("structure has no wet faces".into()));
        }
        let index = mesh.surface_vertex_index();
        let vertices = ids.iter().map(|&n| mesh.nodes[n]).collect();
        let patches = mesh
            .surface_faces
            .iter()
            .map(|f| {
                let [a, b] = f.nodes;
                let t = mesh.nodes[b] - mesh.nodes[a];
                // right-hand normal (t.y, -t.x) must agree with the outward one
                if t.y * f.normal.x - t.x * f.normal.y >= 0.0 {
                    [index[&a], index[&b]]
                } else {
                    [index[&b], index[&a]]
                }
            })
            .collect();
        Self::new(vertices, patches, flip)
    }
}

/// Each directed edge of a patch may be traversed once, and neighbouring
/// patches must traverse shared edges in opposite directions. In 2D the
/// edges are the vertices themselves: each vertex starts and ends at most
/// one segment.
fn check_orientable<const D: usize>(patches: &[[usize; D]]) -> Result<(), AdapterError> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, p) in patches.iter().enumerate() {
        let keys: Vec<(usize, usize)> = if D == 2 {
            vec![(p[0], usize::MAX), (usize::MAX, p[1])]
        } else {
            (0..3).map(|i| (p[i], p[(i + 1) % 3])).collect()
        };
        for key in keys {
            if let Some(other) = seen.insert(key, k) {
                return Err(AdapterError::InvalidMesh(format!(
                    "patches {other} and {k} have inconsistent orientation"
                )));
            }
        }
    }
    Ok(())
}

fn check_no_self_intersection<const D: usize>(g: &PatchGeometry<D>) -> Result<(), AdapterError> {
    let cross = |o: &Vector<D>, a: &Vector<D>, b: &Vector<D>| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let on_segment = |p: &Vector<D>, a: &Vector<D>, b: &Vector<D>| {
        p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
    };
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let (pi, pj) = (g.patches[i], g.patches[j]);
            let shared = pi.iter().filter(|v| pj.contains(v)).count();
            let (a, b) = (&g.vertices[pi[0]], &g.vertices[pi[1]]);
            let (c, d) = (&g.vertices[pj[0]], &g.vertices[pj[1]]);
            let hit = if shared > 0 {
                // Adjacent segments may only meet at the shared vertex;
                // they overlap if collinear and folded back.
                let (s, o1, o2) = if pi[1] == pj[0] {
                    (b, a, d)
                } else if pi[0] == pj[1] {
                    (a, b, c)
                } else {
                    return Err(AdapterError::InvalidMesh(format!(
                        "patches {i} and {j} have inconsistent orientation"
                    )));
                };
                let u = o1 - s;
                let w = o2 - s;
                cross(s, o1, o2).abs() <= 1e-12 * u.norm() * w.norm() && u.dot(&w) > 0.0
            } else {
                let d1 = cross(c, d, a);
                let d2 = cross(c, d, b);
                let d3 = cross(a, b, c);
                let d4 = cross(a, b, d);
                ((d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0)
                    || (d1 == 0.0 && on_segment(a, c, d))
                    || (d2 == 0.0 && on_segment(b, c, d))
                    || (d3 == 0.0 && on_segment(c, a, b))
                    || (d4 == 0.0 && on_segment(d, a, b))
            };
            if hit {
                return Err(AdapterError::InvalidMesh(format!("patches {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}
