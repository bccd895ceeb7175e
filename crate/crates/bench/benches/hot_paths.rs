use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use nalgebra::Vector2;
use pmc_core::adapter::{particle_contact, ContactParams, CriticalMesh};
use pmc_core::mapping::{Constraint, CouplingMesh, MappingMethod, MappingPlan, RbfBasis};
use pmc_core::scenario::{build_scenario, fluid_particles, wall_particles};
use pmc_core::sph::{FluidParams, FluidState, NeighborGrid, Particle, SphSolver};
use pmc_core::KernelKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tank(dx: f64) -> (Vec<Particle<2>>, FluidParams<2>) {
    let mut sc = build_scenario("dam-break-elastic-plate").unwrap();
    sc.spacing = dx;
    let params = FluidParams {
        c0: FluidParams::<2>::sound_speed_for_depth(9.81, sc.water.height),
        gravity: Vector2::new(0.0, -9.81),
        ..FluidParams::water(1.3 * dx)
    };
    let mut ps = fluid_particles(&sc, params.rho0, Some(3));
    ps.extend(wall_particles(&sc, params.rho0));
    (ps, params)
}

fn sph(c: &mut Criterion) {
    let (ps, params) = tank(0.005);
    let solver = SphSolver::new(params, KernelKind::CubicSpline).unwrap();
    c.bench_function("neighbor grid build", |b| {
        b.iter(|| NeighborGrid::from_particles(black_box(&ps), 2.0 * params.h))
    });
    c.bench_function("sph rates", |b| {
        b.iter_batched_ref(|| ps.clone(), |p| solver.compute_rates(p), BatchSize::LargeInput)
    });
    c.bench_function("sph step", |b| {
        b.iter_batched_ref(
            || FluidState::new(ps.clone()),
            |s| {
                let dt = solver.compute_dt(s);
                solver.step(s, dt).unwrap()
            },
            BatchSize::LargeInput,
        )
    });
}

fn contact(c: &mut Criterion) {
    let (ps, _) = tank(0.005);
    let vertices = (0..=25).map(|i| Vector2::new(0.596, 0.004 * i as f64)).collect();
    let mesh = CriticalMesh::new(vertices, (0..25).map(|i| [i, i + 1]).collect(), false).unwrap();
    let geometry = mesh.geometry();
    let params = ContactParams::new(0.01).unwrap();
    c.bench_function("particle contact", |b| b.iter(|| particle_contact(black_box(&ps), &geometry, &params)));
}

fn mapping(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let line = |n: usize, rng: &mut ChaCha8Rng| {
        let coords = (0..n).flat_map(|i| [rng.gen_range(-1e-4..1e-4), i as f64 / n as f64]).collect();
        CouplingMesh::new("m", 2, coords).unwrap()
    };
    let (a, b) = (line(200, &mut rng), line(150, &mut rng));
    let tps = MappingMethod::Rbf {
        basis: RbfBasis::ThinPlateSpline,
        shape: None,
    };
    c.bench_function("rbf plan 200x150", |bn| {
        bn.iter(|| MappingPlan::build(tps, Constraint::Consistent, black_box(&a), &b).unwrap())
    });
    let plan = MappingPlan::build(tps, Constraint::Conservative, &a, &b).unwrap();
    let f: Vec<f64> = (0..2 * a.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    c.bench_function("rbf conservative map", |bn| bn.iter(|| plan.map_conservative(black_box(&f), 2).unwrap()));
}

criterion_group!(benches, sph, contact, mapping);
criterion_main!(benches);
