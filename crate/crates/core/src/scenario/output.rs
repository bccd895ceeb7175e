//! CSV and legacy-VTK writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! states give byte-identical files.

use std::io::{self, Write};

use crate::adapter::CriticalMesh;
use crate::sph::{Particle, ParticleTag};

pub const PARTICLE_CSV_HEADER: &str = "id,x,y,vx,vy,rho,press,tag";

pub fn write_particle_csv<W: Write>(out: &mut W, particles: &[Particle<2>]) -> io::Result<()> {
    writeln!(out, "{PARTICLE_CSV_HEADER}")?;
    for p in particles {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.id,
            p.pos.x,
            p.pos.y,
            p.vel.x,
            p.vel.y,
            p.rho,
            p.press,
            p.tag.as_str()
        )?;
    }
    Ok(())
}

fn tag_code(tag: ParticleTag) -> i32 {
    match tag {
        ParticleTag::Fluid => 0,
        ParticleTag::Wall => 1,
    }
}

/// Particles as a POLYDATA point cloud with density, pressure, tag and
/// velocity point data.
pub fn write_particle_vtk<W: Write>(out: &mut W, particles: &[Particle<2>], time: f64) -> io::Result<()> {
    let n = particles.len();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "particles t={time}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET POLYDATA")?;
    writeln!(out, "POINTS {n} double")?;
    for p in particles {
        writeln!(out, "{} {} 0", p.pos.x, p.pos.y)?;
    }
    writeln!(out, "VERTICES {n} {}", 2 * n)?;
    for i in 0..n {
        writeln!(out, "1 {i}")?;
    }
    writeln!(out, "POINT_DATA {n}")?;
    for (name, get) in [("rho", (|p: &Particle<2>| p.rho) as fn(&Particle<2>) -> f64), ("press", |p| p.press)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for p in particles {
            writeln!(out, "{}", get(p))?;
        }
    }
    writeln!(out, "SCALARS tag int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for p in particles {
        writeln!(out, "{}", tag_code(p.tag))?;
    }
    writeln!(out, "VECTORS velocity double")?;
    for p in particles {
        writeln!(out, "{} {} 0", p.vel.x, p.vel.y)?;
    }
    Ok(())
}

/// Deformed critical mesh as POLYDATA lines, with vertex displacement and
/// per-patch force and normal.
pub fn write_critical_vtk<W: Write>(out: &mut W, mesh: &CriticalMesh<2>, time: f64) -> io::Result<()> {
    let g = mesh.geometry();
    let (n, m) = (g.vertices.len(), g.patches.len());
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "critical mesh t={time}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET POLYDATA")?;
    writeln!(out, "POINTS {n} double")?;
    for v in &g.vertices {
        writeln!(out, "{} {} 0", v.x, v.y)?;
    }
    writeln!(out, "LINES {m} {}", 3 * m)?;
    for [a, b] in &g.patches {
        writeln!(out, "2 {a} {b}")?;
    }
    writeln!(out, "POINT_DATA {n}")?;
    writeln!(out, "VECTORS displacement double")?;
    for u in &mesh.vertex_displacement {
        writeln!(out, "{} {} 0", u.x, u.y)?;
    }
    writeln!(out, "CELL_DATA {m}")?;
    writeln!(out, "VECTORS force double")?;
    for f in &mesh.patch_force {
        writeln!(out, "{} {} 0", f.x, f.y)?;
    }
    writeln!(out, "NORMALS normal double")?;
    for nrm in &g.normals {
        writeln!(out, "{} {} 0", nrm.x, nrm.y)?;
    }
    Ok(())
}
