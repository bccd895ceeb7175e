use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Rect, RunConfig, Scenario, ScenarioError};
use crate::adapter::{AdapterSettings, CriticalMesh, FluidAdapter};
use crate::coupling::{CouplingConfig, CouplingSystem, ExchangeConfig, ParticipantConfig, SchemeConfig};
use crate::mapping::{Constraint, MappingMethod};
use crate::sph::{FluidState, Particle, SphSolver, Vector};
use crate::structure::{FemMesh, NewmarkSolver, Point, StructureParticipant};

pub const FLUID: &str = "Fluid";
pub const SOLID: &str = "Solid";
pub const FLUID_MESH: &str = "Fluid-Mesh";
pub const SOLID_MESH: &str = "Solid-Mesh";

/// Fluid and structure exchanging forces and displacements by nearest
/// neighbour; the critical mesh shares the structure's surface vertices.
pub fn coupling_config(scheme: SchemeConfig) -> CouplingConfig {
    let nn = MappingMethod::NearestNeighbor;
    CouplingConfig {
        participants: vec![
            ParticipantConfig {
                name: FLUID.into(),
                mesh: FLUID_MESH.into(),
            },
            ParticipantConfig {
                name: SOLID.into(),
                mesh: SOLID_MESH.into(),
            },
        ],
        exchanges: vec![
            ExchangeConfig {
                data: "Forces".into(),
                from: FLUID.into(),
                to: SOLID.into(),
                mapping: nn,
                constraint: Constraint::Conservative,
            },
            ExchangeConfig {
                data: "Displacements".into(),
                from: SOLID.into(),
                to: FLUID.into(),
                mapping: nn,
                constraint: Constraint::Consistent,
            },
        ],
        scheme,
    }
}

fn cells(len: f64, dx: f64) -> usize {
    (len / dx).round() as usize
}

fn lattice(r: &Rect, dx: f64) -> impl Iterator<Item = Vector<2>> + '_ {
    let (nx, ny) = (cells(r.width, dx), cells(r.height, dx));
    (0..nx).flat_map(move |i| {
        (0..ny).map(move |j| Vector::<2>::new(r.x0 + (i as f64 + 0.5) * dx, r.y0 + (j as f64 + 0.5) * dx))
    })
}

/// Water block on a cell-centred lattice, optionally jittered by up to
/// 5% of the spacing.
pub fn fluid_particles(sc: &Scenario, rho0: f64, seed: Option<u64>) -> Vec<Particle<2>> {
    let dx = sc.spacing;
    let mass = rho0 * dx * dx;
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    lattice(&sc.water, dx)
        .map(|mut x| {
            if let Some(rng) = rng.as_mut() {
                let a = 0.05 * dx;
                x += Vector::<2>::new(rng.gen_range(-a..=a), rng.gen_range(-a..=a));
            }
            Particle::fluid(0, x, mass, rho0)
        })
        .collect()
}

/// Boundary layers below the floor and outside both side walls.
pub fn wall_particles(sc: &Scenario, rho0: f64) -> Vec<Particle<2>> {
    let dx = sc.spacing;
    let mass = rho0 * dx * dx;
    let t = &sc.tank;
    let layers = sc.wall_layers as i64;
    let (nx, ny) = (cells(t.width, dx) as i64, cells(t.height, dx) as i64);
    let mut out = Vec::new();
    for k in 0..layers {
        let off = (k as f64 + 0.5) * dx;
        for i in -layers..nx + layers {
            out.push(Vector::<2>::new(t.x0 + (i as f64 + 0.5) * dx, t.y0 - off));
        }
        for j in 0..ny {
            let y = t.y0 + (j as f64 + 0.5) * dx;
            out.push(Vector::<2>::new(t.x0 - off, y));
            out.push(Vector::<2>::new(t.x1() + off, y));
        }
    }
    out.into_iter().map(|x| Particle::wall(0, x, mass, rho0)).collect()
}

/// Fixed boundary particles filling the scenario's rigid blocks.
pub fn rigid_particles(sc: &Scenario, rho0: f64) -> Vec<Particle<2>> {
    let dx = sc.spacing;
    let mass = rho0 * dx * dx;
    sc.rigid
        .iter()
        .flat_map(|r| lattice(r, dx))
        .map(|x| Particle::wall(0, x, mass, rho0))
        .collect()
}

pub(crate) fn structure_mesh(sc: &Scenario) -> Result<FemMesh, ScenarioError> {
    let s = &sc.structure;
    let r = &s.region;
    let invalid = |e: crate::structure::StructureError| ScenarioError::Invalid(e.to_string());
    let mut mesh = FemMesh::rectangle(Point::new(r.x0, r.y0), r.width, r.height, s.nx, s.ny).map_err(invalid)?;
    mesh.fix_side(s.fixed).map_err(invalid)?;
    for &side in &s.wet {
        mesh.add_surface_side(side).map_err(invalid)?;
    }
    Ok(mesh)
}

/// A ready-to-run coupled problem.
pub struct Setup {
    pub adapter: FluidAdapter<2>,
    pub system: CouplingSystem<StructureParticipant>,
    /// Stable fluid step of the initial state.
    pub initial_dt: f64,
}

impl Setup {
    pub fn build(cfg: &RunConfig) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        let sc = &cfg.scenario;
        let config_err = |e: &dyn std::fmt::Display| ScenarioError::Config(e.to_string());
        let params = cfg.fluid_params();
        let solver = SphSolver::new(params, cfg.fluid.kernel).map_err(|e| config_err(&e))?;

        let mut particles = fluid_particles(sc, params.rho0, cfg.seed);
        particles.extend(wall_particles(sc, params.rho0));
        particles.extend(rigid_particles(sc, params.rho0));
        let state = FluidState::new(particles);
        let initial_dt = solver.compute_dt(&state);
        if cfg.write_interval < initial_dt {
            return Err(ScenarioError::Config(format!(
                "write_interval {} is shorter than the fluid step {initial_dt}",
                cfg.write_interval
            )));
        }

        let mesh = structure_mesh(sc)?;
        let critical = CriticalMesh::<2>::from_structure(&mesh, false)?;
        let st = &cfg.structure;
        let newmark =
            NewmarkSolver::new(mesh, sc.structure.material, st.element, st.damping).map_err(|e| config_err(&e))?;
        let mut participant = StructureParticipant::new(SOLID, SOLID_MESH, newmark);
        if let Some(dt) = st.max_step {
            participant = participant.with_max_step(dt);
        }

        let contact = cfg.contact.resolve(params.h)?;
        let settings = AdapterSettings::new(FLUID_MESH, contact, cfg.force_mode);
        let adapter = FluidAdapter::new(solver, state, critical, settings);
        let mut system = CouplingSystem::new(cfg.coupling.clone(), participant).map_err(|e| config_err(&e))?;
        adapter.register(&mut system)?;
        system.initialize().map_err(|e| config_err(&e))?;
        Ok(Self {
            adapter,
            system,
            initial_dt,
        })
    }
}
