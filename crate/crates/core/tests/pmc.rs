use nalgebra::Vector2;
use pmc_core::adapter::{
    adapter_loop, interpolate_forces, particle_contact, AdapterError, AdapterEvent, AdapterSettings, ContactParams,
    CriticalMesh, FluidAdapter, ForceMode, Theta,
};
use pmc_core::coupling::{AdvanceOutcome, CouplingSystem};
use pmc_core::mapping::{Constraint, CouplingMesh, MappingMethod, MappingPlan};
use pmc_core::scenario::{build_scenario, fluid_particles, wall_particles, Rect, RunConfig, Scenario};
use pmc_core::sph::{FluidState, Particle, SphSolver};
use pmc_core::structure::{FemMesh, NewmarkSolver, StructureParticipant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type V = Vector2<f64>;

/// Open polyline over increasing x, so it never intersects itself.
fn random_mesh(rng: &mut ChaCha8Rng) -> CriticalMesh<2> {
    let n = rng.gen_range(3..15);
    let mut x = 0.0;
    let vertices: Vec<V> = (0..n)
        .map(|_| {
            x += rng.gen_range(0.05..0.3);
            V::new(x, rng.gen_range(-0.3..0.3))
        })
        .collect();
    let patches = (1..n).map(|i| [i - 1, i]).collect();
    CriticalMesh::new(vertices, patches, rng.gen_bool(0.5)).unwrap()
}

fn random_particles(rng: &mut ChaCha8Rng, n: usize) -> Vec<Particle<2>> {
    (0..n)
        .map(|i| {
            let pos = V::new(rng.gen_range(-0.2..3.0), rng.gen_range(-0.6..0.6));
            let mut p = if rng.gen_bool(0.9) {
                Particle::fluid(i, pos, rng.gen_range(0.5..2.0), 1000.0)
            } else {
                Particle::wall(i, pos, 1.0, 1000.0)
            };
            p.acc = V::new(rng.gen_range(-5.0..5.0), rng.gen_range(-20.0..5.0));
            p.press = rng.gen_range(0.0..5000.0);
            p
        })
        .collect()
}

fn segment_distance(p: V, a: V, b: V) -> f64 {
    let t = ((p - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
    (p - (a + (b - a) * t)).norm()
}

/// Nearest patch within `theta` by exhaustive search, lowest id on ties.
fn oracle(p: &Particle<2>, mesh: &CriticalMesh<2>, theta: f64) -> Option<(usize, f64)> {
    if !p.is_fluid() {
        return None;
    }
    let v = mesh.reference_vertices();
    let mut best: Option<(usize, f64)> = None;
    for (k, [a, b]) in mesh.patches().iter().enumerate() {
        let d = segment_distance(p.pos, v[*a], v[*b]);
        if d < theta && best.map_or(true, |(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    best
}

#[test]
fn contact_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut contacts = 0;
    for trial in 0..100 {
        let mesh = random_mesh(&mut rng);
        let particles = random_particles(&mut rng, 300);
        let theta = rng.gen_range(0.01..0.2);
        let map = particle_contact(&particles, &mesh.geometry(), &ContactParams::new(theta).unwrap());
        for (i, p) in particles.iter().enumerate() {
            let got = map.get(i);
            match (got, oracle(p, &mesh, theta)) {
                (None, None) => {}
                (Some(c), Some((k, d))) => {
                    assert!((c.distance - d).abs() < 1e-12, "trial {trial} particle {i}");
                    if c.patch != k {
                        // only an exact geometric tie may pick another patch
                        let v = mesh.reference_vertices();
                        let [a, b] = mesh.patches()[c.patch];
                        assert!((segment_distance(p.pos, v[a], v[b]) - d).abs() < 1e-12);
                    }
                    contacts += 1;
                }
                (g, o) => panic!("trial {trial} particle {i}: {g:?} vs {o:?}"),
            }
        }
    }
    assert!(contacts > 1000, "too few contacts exercised: {contacts}");
}

#[test]
fn each_particle_belongs_to_at_most_one_patch() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let mesh = random_mesh(&mut rng);
        let particles = random_particles(&mut rng, 400);
        let map = particle_contact(&particles, &mesh.geometry(), &ContactParams::new(0.15).unwrap());
        assert!(map.is_consistent());
        let listed: usize = (0..map.patch_count()).map(|k| map.particles_of(k).len()).sum();
        assert_eq!(listed, map.contact_count());
        let mut seen = vec![0; particles.len()];
        for k in 0..map.patch_count() {
            for &i in map.particles_of(k) {
                seen[i] += 1;
                assert!(particles[i].is_fluid());
            }
        }
        assert!(seen.iter().all(|&n| n <= 1));
    }
}

#[test]
fn force_totals_survive_every_stage() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let g = V::new(0.0, -9.81);
    for _ in 0..20 {
        let mut mesh = random_mesh(&mut rng);
        let particles = random_particles(&mut rng, 500);
        let geometry = mesh.geometry();
        let map = particle_contact(&particles, &geometry, &ContactParams::new(0.1).unwrap());

        let forces = interpolate_forces(&particles, &map, &geometry, ForceMode::NewtonSecondLaw, &g);
        let expected: V = map.iter().map(|(i, _)| (particles[i].acc - g) * particles[i].mass).sum();
        let patch_total: V = forces.iter().sum();
        let scale: f64 = map.iter().map(|(i, _)| ((particles[i].acc - g) * particles[i].mass).norm()).sum();
        assert!((patch_total - expected).norm() <= 1e-12 * scale.max(1.0));

        mesh.patch_force = forces;
        let vertex = mesh.vertex_forces();
        let vertex_total: V = vertex.iter().sum();
        assert!((vertex_total - patch_total).norm() <= 1e-12 * scale.max(1.0));

        // conservative transfer onto an unrelated point cloud
        let cm = mesh.coupling_mesh("c").unwrap();
        let coords = (0..17).flat_map(|_| [rng.gen_range(0.0..3.0), rng.gen_range(-0.3..0.3)]).collect();
        let target = CouplingMesh::new("t", 2, coords).unwrap();
        let plan = MappingPlan::build(MappingMethod::NearestNeighbor, Constraint::Conservative, &cm, &target).unwrap();
        let flat: Vec<f64> = vertex.iter().flat_map(|f| [f.x, f.y]).collect();
        let mapped = plan.map_conservative(&flat, 2).unwrap();
        let mapped_total = mapped.chunks(2).fold(V::zeros(), |a, c| a + V::new(c[0], c[1]));
        assert!((mapped_total - patch_total).norm() <= 1e-12 * scale.max(1.0));

        let pressure = interpolate_forces(&particles, &map, &geometry, ForceMode::PressureIntegral, &g);
        for (k, f) in pressure.iter().enumerate() {
            let members = map.particles_of(k);
            if members.is_empty() {
                assert_eq!(*f, V::zeros());
            } else {
                let mean = members.iter().map(|&i| particles[i].press).sum::<f64>() / members.len() as f64;
                let want = -geometry.normals[k] * mean * geometry.areas[k];
                assert!((f - want).norm() <= 1e-12 * want.norm());
            }
        }
    }
}

/// Plate scenario coarsened for quick coupled runs.
fn coarse_plate() -> (Scenario, RunConfig) {
    let mut sc = build_scenario("dam-break-elastic-plate").unwrap();
    sc.spacing = 0.02;
    let mut cfg = RunConfig::for_scenario(sc.clone(), std::env::temp_dir().join("unused"));
    cfg.fluid.c0 = Some(20.0);
    (sc, cfg)
}

/// Coupled problem from the scenario's structure and the given particles.
fn coupled(cfg: &RunConfig, particles: Vec<Particle<2>>) -> (FluidAdapter<2>, CouplingSystem<StructureParticipant>) {
    let sc = &cfg.scenario;
    let params = cfg.fluid_params();
    let solver = SphSolver::new(params, cfg.fluid.kernel).unwrap();
    let r = &sc.structure.region;
    let mut mesh = FemMesh::rectangle(V::new(r.x0, r.y0), r.width, r.height, sc.structure.nx, sc.structure.ny).unwrap();
    mesh.fix_side(sc.structure.fixed).unwrap();
    for &side in &sc.structure.wet {
        mesh.add_surface_side(side).unwrap();
    }
    let critical = CriticalMesh::from_structure(&mesh, false).unwrap();
    let newmark = NewmarkSolver::new(mesh, sc.structure.material, cfg.structure.element, cfg.structure.damping).unwrap();
    let participant = StructureParticipant::new("Solid", "Solid-Mesh", newmark);
    let settings = AdapterSettings::new("Fluid-Mesh", cfg.contact.resolve(params.h).unwrap(), cfg.force_mode);
    let adapter = FluidAdapter::new(solver, FluidState::new(particles), critical, settings);
    let mut system = CouplingSystem::new(cfg.coupling.clone(), participant).unwrap();
    adapter.register(&mut system).unwrap();
    system.initialize().unwrap();
    (adapter, system)
}

#[test]
fn structure_in_vacuum_stays_at_rest() {
    let (sc, mut cfg) = coarse_plate();
    cfg.set_end_time(0.02);
    let walls = wall_particles(&sc, cfg.fluid.rho0);
    let (mut adapter, system) = coupled(&cfg, walls.clone());
    let mut windows = 0;
    let solid = adapter_loop(&mut adapter, system, |a, _, r| {
        windows += 1;
        assert_eq!(r.contacts, 0);
        assert_eq!(r.total_force, V::zeros());
        assert!(a.mesh().vertex_displacement.iter().all(|u| *u == V::zeros()));
        Ok::<_, AdapterError>(())
    })
    .unwrap();
    assert_eq!(windows, 20);
    assert!(solid.state().u.iter().all(|&u| u == 0.0));
    for (p, q) in adapter.state().particles.iter().zip(&walls) {
        assert_eq!(p.pos, q.pos);
    }
}

fn event_name(e: &AdapterEvent) -> &'static str {
    match e {
        AdapterEvent::SaveCheckpoint => "save",
        AdapterEvent::ReadDisplacements => "read",
        AdapterEvent::InterpolateDisplacements { .. } => "displace",
        AdapterEvent::Solve { .. } => "solve",
        AdapterEvent::Contact { .. } => "contact",
        AdapterEvent::InterpolateForces => "forces",
        AdapterEvent::WriteForces => "write",
        AdapterEvent::Advance(_) => "advance",
        AdapterEvent::ReloadCheckpoint => "reload",
    }
}

#[test]
fn forced_iterations_keep_time_and_event_order() {
    let (_, mut cfg) = coarse_plate();
    cfg.set_end_time(0.005);
    cfg.coupling.scheme.tolerance = 1e-300;
    cfg.coupling.scheme.max_iterations = 3;
    cfg.contact = Theta::default();
    // water resting against the plate so every window exchanges load
    let mut sc = cfg.scenario.clone();
    sc.water = Rect::new(0.476, 0.0, 0.12, 0.16);
    let mut particles = fluid_particles(&sc, cfg.fluid.rho0, None);
    particles.extend(wall_particles(&sc, cfg.fluid.rho0));
    let (mut adapter, mut system) = coupled(&cfg, particles);
    let len = system.window_length();
    let mut window = 0;
    while system.is_coupling_ongoing() {
        let report = adapter.run_window(&mut system).unwrap();
        window += 1;
        assert_eq!(report.iterations, 3);
        assert!((adapter.state().time - window as f64 * len).abs() < 1e-12);
        assert!((system.remote().state().t - window as f64 * len).abs() < 1e-12);
        assert!((system.time() - window as f64 * len).abs() < 1e-12);
    }
    assert_eq!(window, 5);
    assert_eq!(adapter.checkpoint_store_saves(), 5);

    let one_pass = ["read", "displace", "solve", "contact", "forces", "write", "advance"];
    for w in 0..5 {
        let entries: Vec<_> = adapter.trace().iter().filter(|e| e.window == w).collect();
        let mut expected = vec!["save"];
        for it in 0..3 {
            expected.extend(one_pass);
            if it < 2 {
                expected.push("reload");
            }
        }
        let names: Vec<_> = entries.iter().map(|e| event_name(&e.event)).collect();
        assert_eq!(names, expected, "window {w}");
        let outcomes: Vec<_> = entries
            .iter()
            .filter_map(|e| match e.event {
                AdapterEvent::Advance(o) => Some(o),
                _ => None,
            })
            .collect();
        assert_eq!(
            outcomes,
            [AdvanceOutcome::IterateAgain, AdvanceOutcome::IterateAgain, AdvanceOutcome::WindowConverged]
        );
        // each iteration redoes the same substeps from the checkpoint
        let substeps: Vec<usize> = entries
            .iter()
            .filter_map(|e| match e.event {
                AdapterEvent::Solve { substeps } => Some(substeps),
                _ => None,
            })
            .collect();
        assert!(substeps.iter().all(|&n| n == substeps[0] && n > 0));
    }
}
