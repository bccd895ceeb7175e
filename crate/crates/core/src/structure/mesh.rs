//! Quadrilateral meshes and the plain-text mesh format.
//!
//! ```text
//! # comment
//! <nodes> <elements> <fixed> <faces>
//! x y                 one line per node, ids from 0
//! n0 n1 n2 n3         one line per element, counter-clockwise
//! id id ...           fixed node ids, whitespace separated, any line breaks
//! a b                 one line per wet surface face
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::element::{inverse_map, map_point, min_det_j, shape};
use super::{Point, StructureError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFace {
    pub nodes: [usize; 2],
    /// Unit normal pointing out of the solid.
    #[serde(with = "crate::sph::vector_serde")]
    pub normal: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FemMesh {
    pub nodes: Vec<Point>,
    pub elements: Vec<[usize; 4]>,
    pub fixed_nodes: BTreeSet<usize>,
    pub surface_faces: Vec<SurfaceFace>,
    grid: Option<(usize, usize)>,
}

impl FemMesh {
    /// Validates and builds a mesh; face normals are derived from the owning element.
    pub fn new(
        nodes: Vec<Point>,
        elements: Vec<[usize; 4]>,
        fixed_nodes: BTreeSet<usize>,
        faces: Vec<[usize; 2]>,
    ) -> Result<Self, StructureError> {
        let mut mesh = Self {
            nodes,
            elements,
            fixed_nodes,
            surface_faces: Vec::new(),
            grid: None,
        };
        mesh.validate_elements()?;
        for f in faces {
            mesh.add_face(f)?;
        }
        Ok(mesh)
    }

    /// Structured `nx` by `ny` mesh of the rectangle with lower-left corner `origin`.
    pub fn rectangle(
        origin: Point,
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self, StructureError> {
        if nx == 0 || ny == 0 || !(width > 0.0) || !(height > 0.0) {
            return Err(StructureError::InvalidMesh(format!(
                "rectangle {width} x {height} with {nx} x {ny} elements"
            )));
        }
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push(origin + Point::new(width * i as f64 / nx as f64, height * j as f64 / ny as f64));
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut elements = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut mesh = Self::new(nodes, elements, BTreeSet::new(), Vec::new())?;
        mesh.grid = Some((nx, ny));
        Ok(mesh)
    }

    /// Node ids along one side of a structured mesh, counter-clockwise.
    pub fn side_nodes(&self, side: Side) -> Result<Vec<usize>, StructureError> {
        let (nx, ny) = self
            .grid
            .ok_or_else(|| StructureError::InvalidMesh("mesh has no structured sides".into()))?;
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        Ok(match side {
            Side::Bottom => (0..=nx).map(|i| id(i, 0)).collect(),
            Side::Right => (0..=ny).map(|j| id(nx, j)).collect(),
            Side::Top => (0..=nx).rev().map(|i| id(i, ny)).collect(),
            Side::Left => (0..=ny).rev().map(|j| id(0, j)).collect(),
        })
    }

    pub fn fix_side(&mut self, side: Side) -> Result<(), StructureError> {
        let ids = self.side_nodes(side)?;
        self.fixed_nodes.extend(ids);
        Ok(())
    }

    pub fn add_surface_side(&mut self, side: Side) -> Result<(), StructureError> {
        let ids = self.side_nodes(side)?;
        for w in ids.windows(2) {
            self.add_face([w[0], w[1]])?;
        }
        Ok(())
    }

    /// Adds a wet face; it must be a boundary edge of exactly one element.
    pub fn add_face(&mut self, face: [usize; 2]) -> Result<usize, StructureError> {
        let [a, b] = face;
        if a >= self.nodes.len() || b >= self.nodes.len() || a == b {
            return Err(StructureError::InvalidMesh(format!("face {a}-{b} has invalid nodes")));
        }
        let key = (a.min(b), a.max(b));
        if self
            .surface_faces
            .iter()
            .any(|f| (f.nodes[0].min(f.nodes[1]), f.nodes[0].max(f.nodes[1])) == key)
        {
            return Err(StructureError::InvalidMesh(format!("face {a}-{b} listed twice")));
        }
        let owners: Vec<usize> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| (0..4).any(|k| {
                let (p, q) = (e[k], e[(k + 1) % 4]);
                (p.min(q), p.max(q)) == key
            }))
            .map(|(i, _)| i)
            .collect();
        if owners.len() != 1 {
            return Err(StructureError::InvalidMesh(format!(
                "face {a}-{b} is shared by {} elements, expected a boundary edge",
                owners.len()
            )));
        }
        let e = self.elements[owners[0]];
        let centroid = e.iter().fold(Point::zeros(), |acc, &n| acc + self.nodes[n]) / 4.0;
        let t = self.nodes[b] - self.nodes[a];
        let mut normal = Point::new(t.y, -t.x).normalize();
        let mid = (self.nodes[a] + self.nodes[b]) * 0.5;
        if normal.dot(&(mid - centroid)) < 0.0 {
            normal = -normal;
        }
        self.surface_faces.push(SurfaceFace { nodes: face, normal });
        Ok(self.surface_faces.len() - 1)
    }

    fn validate_elements(&self) -> Result<(), StructureError> {
        for (i, e) in self.elements.iter().enumerate() {
            if e.iter().any(|&n| n >= self.nodes.len()) {
                return Err(StructureError::InvalidMesh(format!("element {i} references a missing node")));
            }
            let det_j = min_det_j(&self.element_coords(i));
            if !(det_j > 0.0) {
                return Err(StructureError::DegenerateElement { element: i, det_j });
            }
        }
        if let Some(&n) = self.fixed_nodes.iter().find(|&&n| n >= self.nodes.len()) {
            return Err(StructureError::InvalidMesh(format!("fixed node {n} does not exist")));
        }
        Ok(())
    }

    pub fn element_coords(&self, e: usize) -> [Point; 4] {
        std::array::from_fn(|k| self.nodes[self.elements[e][k]])
    }

    pub fn dof_count(&self) -> usize {
        2 * self.nodes.len()
    }

    /// Sorted unique node ids touched by the wet faces.
    pub fn surface_vertices(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.surface_faces.iter().flat_map(|f| f.nodes).collect();
        set.into_iter().collect()
    }

    pub fn face_length(&self, face: usize) -> f64 {
        let [a, b] = self.surface_faces[face].nodes;
        (self.nodes[b] - self.nodes[a]).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.elements.len())
            .map(|e| {
                let x = self.element_coords(e);
                0.5 * (0..4)
                    .map(|k| {
                        let (p, q) = (x[k], x[(k + 1) % 4]);
                        p.x * q.y - q.x * p.y
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Element containing `p` and its parametric coordinates.
    pub fn locate(&self, p: &Point) -> Option<(usize, f64, f64)> {
        let tol = 1e-9;
        (0..self.elements.len()).find_map(|e| {
            let x = self.element_coords(e);
            let (xi, eta) = inverse_map(&x, p)?;
            (xi.abs() <= 1.0 + tol && eta.abs() <= 1.0 + tol).then_some((e, xi, eta))
        })
    }

    /// Bilinear interpolation of a nodal vector field (interleaved x, y) at `p`.
    pub fn interpolate(&self, field: &[f64], p: &Point) -> Option<Point> {
        let (e, xi, eta) = self.locate(p)?;
        let n = shape(xi, eta);
        Some(
            self.elements[e]
                .iter()
                .zip(n)
                .fold(Point::zeros(), |acc, (&node, w)| acc + Point::new(field[2 * node], field[2 * node + 1]) * w),
        )
    }

    /// Physical point of element `e` at parametric coordinates.
    pub fn point_in(&self, e: usize, xi: f64, eta: f64) -> Point {
        map_point(&self.element_coords(e), xi, eta)
    }

    pub fn parse(text: &str) -> Result<Self, StructureError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, message: String| StructureError::Parse { line, message };
        let numbers = |line: usize, l: &str| -> Result<Vec<f64>, StructureError> {
            l.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| err(line, format!("not a number: {t:?}"))))
                .collect()
        };
        let ids = |line: usize, l: &str, n: usize| -> Result<Vec<usize>, StructureError> {
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| err(line, format!("not a node id: {t:?}"))))
                .collect::<Result<_, _>>()?;
            if v.len() != n {
                return Err(err(line, format!("expected {n} ids, found {}", v.len())));
            }
            Ok(v)
        };

        let (hl, header) = lines.next().ok_or_else(|| err(0, "empty mesh file".into()))?;
        let counts = ids(hl, header, 4)?;
        let (nn, ne, nf, ns) = (counts[0], counts[1], counts[2], counts[3]);

        let mut nodes = Vec::with_capacity(nn);
        let mut last = hl;
        for _ in 0..nn {
            let (ln, l) = lines.next().ok_or_else(|| err(last, "missing node lines".into()))?;
            let v = numbers(ln, l)?;
            if v.len() != 2 {
                return Err(err(ln, format!("expected x y, found {} values", v.len())));
            }
            nodes.push(Point::new(v[0], v[1]));
            last = ln;
        }
        let mut elements = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, l) = lines.next().ok_or_else(|| err(last, "missing element lines".into()))?;
            let v = ids(ln, l, 4)?;
            elements.push([v[0], v[1], v[2], v[3]]);
            last = ln;
        }
        let mut fixed = BTreeSet::new();
        while fixed.len() < nf {
            let (ln, l) = lines.next().ok_or_else(|| err(last, "missing fixed node ids".into()))?;
            let n = l.split_whitespace().count();
            let v = ids(ln, l, n)?;
            if fixed.len() + v.len() > nf {
                return Err(err(ln, format!("more than {nf} fixed node ids")));
            }
            for id in v {
                if !fixed.insert(id) {
                    return Err(err(ln, format!("fixed node {id} listed twice")));
                }
            }
            last = ln;
        }
        let mut faces = Vec::with_capacity(ns);
        for _ in 0..ns {
            let (ln, l) = lines.next().ok_or_else(|| err(last, "missing face lines".into()))?;
            let v = ids(ln, l, 2)?;
            faces.push([v[0], v[1]]);
            last = ln;
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "trailing content after the face list".into()));
        }
        Self::new(nodes, elements, fixed, faces)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.nodes.len(),
            self.elements.len(),
            self.fixed_nodes.len(),
            self.surface_faces.len()
        );
        for p in &self.nodes {
            let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
        }
        for e in &self.elements {
            let _ = writeln!(s, "{} {} {} {}", e[0], e[1], e[2], e[3]);
        }
        let fixed: Vec<String> = self.fixed_nodes.iter().map(|n| n.to_string()).collect();
        if !fixed.is_empty() {
            let _ = writeln!(s, "{}", fixed.join(" "));
        }
        for f in &self.surface_faces {
            let _ = writeln!(s, "{} {}", f.nodes[0], f.nodes[1]);
        }
        s
    }

    /// Map from node id to its position in [`surface_vertices`](Self::surface_vertices).
    pub fn surface_vertex_index(&self) -> HashMap<usize, usize> {
        self.surface_vertices().into_iter().enumerate().map(|(i, n)| (n, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_sides_and_normals() {
        let mut m = FemMesh::rectangle(Point::new(1.0, 2.0), 2.0, 1.0, 4, 2).unwrap();
        assert_eq!(m.nodes.len(), 15);
        assert_eq!(m.elements.len(), 8);
        assert!((m.area() - 2.0).abs() < 1e-14);
        for side in [Side::Bottom, Side::Right, Side::Top, Side::Left] {
            m.add_surface_side(side).unwrap();
        }
        assert_eq!(m.surface_faces.len(), 12);
        let expect = |f: &SurfaceFace| {
            let mid = (m.nodes[f.nodes[0]] + m.nodes[f.nodes[1]]) * 0.5;
            if mid.y == 2.0 {
                Point::new(0.0, -1.0)
            } else if mid.y == 3.0 {
                Point::new(0.0, 1.0)
            } else if mid.x == 1.0 {
                Point::new(-1.0, 0.0)
            } else {
                Point::new(1.0, 0.0)
            }
        };
        for f in &m.surface_faces {
            assert!((f.normal - expect(f)).norm() < 1e-15);
        }
        assert_eq!(m.surface_vertices().len(), 12);
    }

    #[test]
    fn interior_edge_is_not_a_face() {
        let mut m = FemMesh::rectangle(Point::zeros(), 2.0, 1.0, 2, 1).unwrap();
        assert!(m.add_face([1, 4]).is_err());
        m.add_face([0, 1]).unwrap();
        assert!(m.add_face([1, 0]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut m = FemMesh::rectangle(Point::new(0.5, 0.0), 0.004, 0.1, 2, 5).unwrap();
        m.fix_side(Side::Bottom).unwrap();
        m.add_surface_side(Side::Left).unwrap();
        m.add_surface_side(Side::Top).unwrap();
        let back = FemMesh::parse(&m.to_text()).unwrap();
        assert_eq!(back.nodes, m.nodes);
        assert_eq!(back.elements, m.elements);
        assert_eq!(back.fixed_nodes, m.fixed_nodes);
        assert_eq!(back.surface_faces, m.surface_faces);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "# unit square\n4 1 2 1\n0 0\n1 0\n1 1\n0 x\n0 1 2 3\n0 1\n3 0\n";
        assert_eq!(
            FemMesh::parse(text),
            Err(StructureError::Parse {
                line: 6,
                message: "not a number: \"x\"".into()
            })
        );
        let ok = "4 1 2 1\n0 0\n1 0\n1 1\n0 1  # top left\n0 1 2 3\n0\n1\n3 0\n";
        let m = FemMesh::parse(ok).unwrap();
        assert_eq!(m.surface_faces[0].normal, Point::new(-1.0, 0.0));
        assert!(FemMesh::parse("4 1 0 0\n0 0\n0 1\n1 1\n1 0\n0 1 2 3\n").is_err());
    }

    #[test]
    fn interpolation_is_exact_for_bilinear_fields() {
        let m = FemMesh::rectangle(Point::zeros(), 1.0, 1.0, 3, 3).unwrap();
        let f = |p: &Point| Point::new(1.0 + 2.0 * p.x - p.y, 0.5 * p.x * p.y);
        let field: Vec<f64> = m.nodes.iter().flat_map(|p| {
            let v = f(p);
            [v.x, v.y]
        }).collect();
        let q = Point::new(0.41, 0.77);
        let got = m.interpolate(&field, &q).unwrap();
        assert!((got - f(&q)).norm() < 1e-12);
        assert!(m.interpolate(&field, &Point::new(1.5, 0.5)).is_none());
    }
}
