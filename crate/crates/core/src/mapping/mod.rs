//! Data mapping between non-matching coupling meshes.

mod mesh;
mod nearest;
mod rbf;

pub use mesh::CouplingMesh;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MappingError {
    #[error("expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("unsupported mesh dimension {0}")]
    UnsupportedDimension(usize),
    #[error("meshes have different dimensions ({source_dim} vs {target_dim})")]
    DimensionMismatch { source_dim: usize, target_dim: usize },
    #[error("non-finite vertex coordinate {0}")]
    NonFiniteCoordinate(f64),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("nearest-projection mapping needs edges or triangles on mesh {0:?}")]
    MissingTopology(String),
    #[error("mesh {0:?} has no vertices")]
    EmptyMesh(String),
    #[error("interpolation system is singular: {0}")]
    Singular(String),
    #[error("plan is {plan:?} but {requested:?} mapping was requested")]
    WrongConstraint { plan: Constraint, requested: Constraint },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    Consistent,
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RbfBasis {
    Gaussian,
    ThinPlateSpline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MappingMethod {
    NearestNeighbor,
    NearestProjection,
    Rbf {
        basis: RbfBasis,
        /// Gaussian `epsilon` in `exp(-(epsilon r)^2)`; by default the
        /// inverse mean source spacing.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<f64>,
    },
}

/// Precomputed linear operator from source to target vertex values.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingPlan {
    method: MappingMethod,
    constraint: Constraint,
    source: String,
    target: String,
    n_source: usize,
    /// Sparse rows, one per target vertex: `(source vertex, weight)`.
    rows: Vec<Vec<(usize, f64)>>,
}

impl MappingPlan {
    pub fn build(
        method: MappingMethod,
        constraint: Constraint,
        source: &CouplingMesh,
        target: &CouplingMesh,
    ) -> Result<Self, MappingError> {
        if source.dim != target.dim {
            return Err(MappingError::DimensionMismatch {
                source_dim: source.dim,
                target_dim: target.dim,
            });
        }
        for m in [source, target] {
            if m.is_empty() {
                return Err(MappingError::EmptyMesh(m.name.clone()));
            }
        }
        let rows = match constraint {
            Constraint::Consistent => consistent_rows(method, source, target)?,
            Constraint::Conservative => {
                let back = consistent_rows(method, target, source)?;
                let mut rows = vec![Vec::new(); target.len()];
                for (s, row) in back.into_iter().enumerate() {
                    for (t, w) in row {
                        rows[t].push((s, w));
                    }
                }
                rows
            }
        };
        Ok(Self {
            method,
            constraint,
            source: source.name.clone(),
            target: target.name.clone(),
            n_source: source.len(),
            rows,
        })
    }

    pub fn method(&self) -> MappingMethod {
        self.method
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn source_mesh(&self) -> &str {
        &self.source
    }

    pub fn target_mesh(&self) -> &str {
        &self.target
    }

    pub fn source_len(&self) -> usize {
        self.n_source
    }

    pub fn target_len(&self) -> usize {
        self.rows.len()
    }

    /// Dense operator, target vertices by source vertices.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.n_source);
        for (t, row) in self.rows.iter().enumerate() {
            for &(s, w) in row {
                m[(t, s)] += w;
            }
        }
        m
    }

    /// Maps a field with `components` values per vertex.
    pub fn map(&self, values: &[f64], components: usize) -> Result<Vec<f64>, MappingError> {
        if values.len() != self.n_source * components {
            return Err(MappingError::SizeMismatch {
                expected: self.n_source * components,
                got: values.len(),
            });
        }
        let mut out = vec![0.0; self.rows.len() * components];
        for (t, row) in self.rows.iter().enumerate() {
            for &(s, w) in row {
                for c in 0..components {
                    out[t * components + c] += w * values[s * components + c];
                }
            }
        }
        Ok(out)
    }

    pub fn map_consistent(&self, values: &[f64], components: usize) -> Result<Vec<f64>, MappingError> {
        self.expect(Constraint::Consistent)?;
        self.map(values, components)
    }

    pub fn map_conservative(&self, values: &[f64], components: usize) -> Result<Vec<f64>, MappingError> {
        self.expect(Constraint::Conservative)?;
        self.map(values, components)
    }

    fn expect(&self, requested: Constraint) -> Result<(), MappingError> {
        if self.constraint != requested {
            return Err(MappingError::WrongConstraint {
                plan: self.constraint,
                requested,
            });
        }
        Ok(())
    }
}

fn consistent_rows(
    method: MappingMethod,
    source: &CouplingMesh,
    target: &CouplingMesh,
) -> Result<Vec<Vec<(usize, f64)>>, MappingError> {
    match method {
        MappingMethod::NearestNeighbor => Ok(nearest::nearest_neighbor(source, target)),
        MappingMethod::NearestProjection => nearest::nearest_projection(source, target),
        MappingMethod::Rbf { basis, shape } => rbf::rbf_rows(basis, shape, source, target),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(name: &str, xs: &[f64]) -> CouplingMesh {
        let edges = (1..xs.len()).map(|i| [i - 1, i]).collect();
        CouplingMesh::new(name, 1, xs.to_vec()).unwrap().with_edges(edges).unwrap()
    }

    #[test]
    fn nearest_neighbor_tie_goes_to_lower_id() {
        let s = line("s", &[0.0, 1.0]);
        let t = line("t", &[0.5]);
        let p = MappingPlan::build(MappingMethod::NearestNeighbor, Constraint::Consistent, &s, &t).unwrap();
        assert_eq!(p.map(&[3.0, 9.0], 1).unwrap(), vec![3.0]);
    }

    #[test]
    fn projection_weights_are_linear() {
        let s = line("s", &[0.0, 1.0]);
        let t = line("t", &[0.25]);
        let p = MappingPlan::build(MappingMethod::NearestProjection, Constraint::Consistent, &s, &t).unwrap();
        let m = p.matrix();
        assert!((m[(0, 0)] - 0.75).abs() < 1e-15 && (m[(0, 1)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn conservative_split_of_point_force() {
        // Force on one vertex between two equidistant supports.
        let s = line("s", &[0.5]);
        let t = line("t", &[0.0, 1.0]);
        let p = MappingPlan::build(MappingMethod::NearestProjection, Constraint::Conservative, &s, &t).unwrap();
        assert_eq!(p.map_conservative(&[4.0], 1).unwrap(), vec![2.0, 2.0]);
        assert!(p.map_consistent(&[4.0], 1).is_err());
    }

    #[test]
    fn matching_meshes_give_identity() {
        let s = line("s", &[0.0, 0.3, 0.7, 1.0]);
        let t = line("t", &[0.0, 0.3, 0.7, 1.0]);
        let methods = [
            MappingMethod::NearestNeighbor,
            MappingMethod::NearestProjection,
            MappingMethod::Rbf { basis: RbfBasis::ThinPlateSpline, shape: None },
            MappingMethod::Rbf { basis: RbfBasis::Gaussian, shape: None },
        ];
        for m in methods {
            for c in [Constraint::Consistent, Constraint::Conservative] {
                let p = MappingPlan::build(m, c, &s, &t).unwrap();
                let id = DMatrix::<f64>::identity(4, 4);
                assert!((p.matrix() - id).abs().max() < 1e-8, "{m:?} {c:?}");
            }
        }
    }

    #[test]
    fn projection_requires_topology() {
        let s = CouplingMesh::new("s", 2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let t = CouplingMesh::new("t", 2, vec![0.5, 0.1]).unwrap();
        assert_eq!(
            MappingPlan::build(MappingMethod::NearestProjection, Constraint::Consistent, &s, &t),
            Err(MappingError::MissingTopology("s".into()))
        );
    }

    #[test]
    fn method_json_names() {
        let m: MappingMethod = serde_json::from_str("\"nearest-neighbor\"").unwrap();
        assert_eq!(m, MappingMethod::NearestNeighbor);
        let r: MappingMethod =
            serde_json::from_str(r#"{"rbf":{"basis":"gaussian","shape":2.0}}"#).unwrap();
        assert_eq!(r, MappingMethod::Rbf { basis: RbfBasis::Gaussian, shape: Some(2.0) });
        assert!(serde_json::from_str::<MappingMethod>("\"nearest-cell\"").is_err());
    }
}
