//! Benchmark geometries.

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::structure::{Material, Side};

/// Axis-aligned rectangle `[x0, x0 + width] x [y0, y0 + height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, width: f64, height: f64) -> Self {
        Self { x0, y0, width, height }
    }

    pub fn x1(&self) -> f64 {
        self.x0 + self.width
    }

    pub fn y1(&self) -> f64 {
        self.y0 + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1() && y >= self.y0 && y <= self.y1()
    }

    /// True when `other` lies inside `self`, allowing round-off.
    pub fn encloses(&self, other: &Rect) -> bool {
        let eps = 1e-12 * (self.width + self.height);
        other.x0 >= self.x0 - eps && other.x1() <= self.x1() + eps && other.y0 >= self.y0 - eps && other.y1() <= self.y1() + eps
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        let eps = 1e-12 * (self.width + self.height);
        other.x0 < self.x1() - eps && self.x0 < other.x1() - eps && other.y0 < self.y1() - eps && self.y0 < other.y1() - eps
    }

    fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.width, self.height].iter().all(|v| v.is_finite()) && self.width > 0.0 && self.height > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub region: Rect,
    /// Elements across the width and along the height.
    pub nx: usize,
    pub ny: usize,
    pub fixed: Side,
    pub wet: Vec<Side>,
    pub material: Material,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Spatial dimension; the driver runs 2D elevations.
    #[serde(default = "two")]
    pub dim: usize,
    /// Tank interior; walls surround the bottom and both sides.
    pub tank: Rect,
    pub water: Rect,
    pub structure: StructureSpec,
    /// Extra blocks of fixed boundary particles.
    #[serde(default)]
    pub rigid: Vec<Rect>,
    /// Initial particle spacing (m).
    pub spacing: f64,
    /// Gravitational acceleration, acting along -y (m/s^2).
    pub gravity: f64,
    pub end_time: f64,
    /// Point inside the structure whose displacement is recorded.
    pub marker: [f64; 2],
    #[serde(default = "three")]
    pub wall_layers: usize,
}

fn two() -> usize {
    2
}

fn three() -> usize {
    3
}

pub const SCENARIOS: [&str; 3] = ["dam-break-elastic-plate", "elastic-sluice-gate", "dam-break-baffle"];

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.dim != 2 {
            return bad(format!("the benchmark driver runs 2D scenarios, got dim = {}", self.dim));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return bad(format!("spacing must be positive, got {}", self.spacing));
        }
        if !(self.gravity >= 0.0 && self.gravity.is_finite()) {
            return bad(format!("gravity must be non-negative, got {}", self.gravity));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return bad(format!("end_time must be non-negative, got {}", self.end_time));
        }
        if self.wall_layers == 0 {
            return bad("wall_layers must be at least 1".into());
        }
        for (name, r) in [("tank", &self.tank), ("water", &self.water), ("structure", &self.structure.region)] {
            if !r.is_valid() {
                return bad(format!("{name} rectangle {r:?} is degenerate"));
            }
        }
        if !self.tank.encloses(&self.water) {
            return bad("water block must lie inside the tank".into());
        }
        if !self.tank.encloses(&self.structure.region) {
            return bad("structure must lie inside the tank".into());
        }
        if self.water.overlaps(&self.structure.region) {
            return bad("water block overlaps the structure".into());
        }
        for r in &self.rigid {
            if !r.is_valid() || !self.tank.encloses(r) {
                return bad(format!("rigid block {r:?} must be non-degenerate and inside the tank"));
            }
        }
        let s = &self.structure;
        if s.nx == 0 || s.ny == 0 {
            return bad("structure needs at least one element in each direction".into());
        }
        if s.wet.is_empty() {
            return bad("structure has no wet sides".into());
        }
        if s.wet.contains(&s.fixed) {
            return bad(format!("side {:?} is both fixed and wet", s.fixed));
        }
        s.material.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if !s.region.contains(self.marker[0], self.marker[1]) {
            return bad(format!("marker {:?} is outside the structure", self.marker));
        }
        Ok(())
    }

    /// Number of fluid particles the initial lattice produces.
    pub fn expected_fluid_particles(&self) -> usize {
        let nx = (self.water.width / self.spacing).round() as usize;
        let ny = (self.water.height / self.spacing).round() as usize;
        nx * ny
    }
}

/// Benchmark by name, at its default spacing.
pub fn build_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    let sc = match name {
        "dam-break-elastic-plate" => Scenario {
            name: name.into(),
            dim: 2,
            tank: Rect::new(0.0, 0.0, 0.8, 0.6),
            water: Rect::new(0.0, 0.0, 0.2, 0.4),
            structure: StructureSpec {
                // 0.2 m from the right wall, clamped to the floor
                region: Rect::new(0.596, 0.0, 0.004, 0.1),
                nx: 2,
                ny: 25,
                fixed: Side::Bottom,
                wet: vec![Side::Right, Side::Top, Side::Left],
                material: Material {
                    rho_s: 1161.54,
                    youngs_modulus: 3.5e6,
                    nu: 0.45,
                },
            },
            rigid: Vec::new(),
            spacing: 0.005,
            gravity: 9.81,
            end_time: 1.0,
            marker: [0.598, 0.087],
            wall_layers: 3,
        },
        "elastic-sluice-gate" => {
            let clearance = 0.2;
            let top = clearance + 3.0;
            Scenario {
                name: name.into(),
                dim: 2,
                tank: Rect::new(0.0, 0.0, 12.0, 8.0),
                water: Rect::new(8.0, 0.0, 4.0, 6.0),
                structure: StructureSpec {
                    region: Rect::new(7.9, clearance, 0.1, 3.0),
                    nx: 2,
                    ny: 30,
                    fixed: Side::Top,
                    wet: vec![Side::Right, Side::Bottom, Side::Left],
                    material: Material {
                        rho_s: 1100.0,
                        youngs_modulus: 1.2e7,
                        nu: 0.45,
                    },
                },
                // fixed plate holding the water above the gate
                rigid: vec![Rect::new(7.7, top, 0.3, 8.0 - top)],
                spacing: 0.05,
                gravity: 9.8,
                end_time: 2.0,
                marker: [7.95, clearance],
                wall_layers: 3,
            }
        }
        "dam-break-baffle" => Scenario {
            name: name.into(),
            dim: 2,
            tank: Rect::new(0.0, 0.0, 1.6, 0.8),
            water: Rect::new(0.0, 0.0, 0.4, 0.6),
            structure: StructureSpec {
                region: Rect::new(0.8, 0.08, 0.2, 0.2),
                nx: 8,
                ny: 8,
                fixed: Side::Top,
                wet: vec![Side::Right, Side::Bottom, Side::Left],
                material: Material {
                    rho_s: 1161.54,
                    youngs_modulus: 3.5e6,
                    nu: 0.45,
                },
            },
            rigid: Vec::new(),
            spacing: 0.01,
            gravity: 9.81,
            end_time: 1.0,
            marker: [0.9, 0.08],
            wall_layers: 3,
        },
        other => {
            return Err(ScenarioError::UnknownScenario(format!(
                "{other:?}; known scenarios: {}",
                SCENARIOS.join(", ")
            )))
        }
    };
    sc.validate()?;
    Ok(sc)
}
