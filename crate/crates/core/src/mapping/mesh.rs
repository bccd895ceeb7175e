use serde::{Deserialize, Serialize};

use super::MappingError;

/// Vertex set of a coupling interface with optional connectivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMesh {
    pub name: String,
    pub dim: usize,
    /// Flat coordinates, `dim` per vertex.
    pub coords: Vec<f64>,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub triangles: Vec<[usize; 3]>,
}

impl CouplingMesh {
    pub fn new(name: impl Into<String>, dim: usize, coords: Vec<f64>) -> Result<Self, MappingError> {
        if !(1..=3).contains(&dim) {
            return Err(MappingError::UnsupportedDimension(dim));
        }
        if coords.len() % dim != 0 {
            return Err(MappingError::SizeMismatch {
                expected: coords.len() / dim * dim + dim,
                got: coords.len(),
            });
        }
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(MappingError::NonFiniteCoordinate(*x));
        }
        Ok(Self {
            name: name.into(),
            dim,
            coords,
            edges: Vec::new(),
            triangles: Vec::new(),
        })
    }

    pub fn with_edges(mut self, edges: Vec<[usize; 2]>) -> Result<Self, MappingError> {
        let n = self.len();
        if let Some(e) = edges.iter().find(|e| e.iter().any(|&v| v >= n) || e[0] == e[1]) {
            return Err(MappingError::InvalidTopology(format!("edge {e:?} on {} vertices", n)));
        }
        self.edges = edges;
        Ok(self)
    }

    pub fn with_triangles(mut self, triangles: Vec<[usize; 3]>) -> Result<Self, MappingError> {
        let n = self.len();
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&v| v >= n)) {
            return Err(MappingError::InvalidTopology(format!("triangle {t:?} on {} vertices", n)));
        }
        self.triangles = triangles;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Mean distance from each vertex to its nearest neighbour.
    pub fn mean_spacing(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 1.0;
        }
        let total: f64 = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| dist(self.vertex(i), self.vertex(j)))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        total / n as f64
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}
