use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::output::{write_critical_vtk, write_particle_csv, write_particle_vtk};
use super::{RunConfig, Scenario, ScenarioError, Setup};
use crate::adapter::{adapter_loop, CriticalMesh, FluidAdapter, WindowReport};
use crate::coupling::CouplingSystem;
use crate::sph::{FluidState, Particle};
use crate::structure::{Point, StructureParticipant};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; the global rayon pool when absent.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    NumericalFailure,
    Failed,
}

/// One accepted coupling window, as written to `diagnostics.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRecord {
    pub window: usize,
    pub t: f64,
    pub iterations: usize,
    pub substeps: usize,
    pub contacts: usize,
    pub corrections: usize,
    pub max_penetration: f64,
    pub force: [f64; 2],
    pub residual: f64,
    pub max_speed: f64,
    /// Fluid particles past the far side of the structure.
    pub crossed: usize,
    /// Water depth over the initial water block's footprint.
    pub upstream_level: f64,
    pub marker: [f64; 2],
}

impl WindowRecord {
    pub const HEADER: &'static str = "window,t,iterations,substeps,contacts,corrections,max_penetration,force_x,force_y,residual,max_speed,crossed,upstream_level";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.window,
            self.t,
            self.iterations,
            self.substeps,
            self.contacts,
            self.corrections,
            self.max_penetration,
            self.force[0],
            self.force[1],
            self.residual,
            self.max_speed,
            self.crossed,
            self.upstream_level
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub status: RunStatus,
    pub output_dir: PathBuf,
    pub windows: usize,
    pub final_time: f64,
    pub wall_time: f64,
    pub initial_dt: f64,
    pub fluid_particles: usize,
    pub records: Vec<WindowRecord>,
}

impl RunSummary {
    /// Marker displacement samples `(t, ux, uy)`, starting at rest.
    pub fn marker_series(&self) -> Vec<(f64, f64, f64)> {
        std::iter::once((0.0, 0.0, 0.0))
            .chain(self.records.iter().map(|r| (r.t, r.marker[0], r.marker[1])))
            .collect()
    }
}

fn crossed_and_level(sc: &Scenario, particles: &[Particle<2>]) -> (usize, f64) {
    let s = &sc.structure.region;
    let from_left = sc.water.x1() <= s.x0 + 1e-12;
    let fluid = particles.iter().filter(|p| p.is_fluid());
    let crossed = fluid
        .clone()
        .filter(|p| if from_left { p.pos.x > s.x1() } else { p.pos.x < s.x0 })
        .count();
    let over = fluid.filter(|p| p.pos.x >= sc.water.x0 && p.pos.x <= sc.water.x1()).count();
    (crossed, over as f64 * sc.spacing * sc.spacing / sc.water.width)
}

struct Writer {
    dir: PathBuf,
    marker: BufWriter<File>,
    diagnostics: BufWriter<File>,
    index: BufWriter<File>,
    snapshots: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>, ScenarioError> {
    File::create(path).map(BufWriter::new).map_err(ScenarioError::io(path))
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, ScenarioError> {
        fs::create_dir_all(dir).map_err(ScenarioError::io(dir))?;
        let mut w = Self {
            dir: dir.to_path_buf(),
            marker: create(&dir.join("marker.csv"))?,
            diagnostics: create(&dir.join("diagnostics.csv"))?,
            index: create(&dir.join("snapshots.csv"))?,
            snapshots: 0,
        };
        w.line(Which::Marker, "t,ux,uy")?;
        w.line(Which::Diagnostics, WindowRecord::HEADER)?;
        w.line(Which::Index, "snapshot,t")?;
        Ok(w)
    }

    fn line(&mut self, which: Which, text: &str) -> Result<(), ScenarioError> {
        let (file, name) = match which {
            Which::Marker => (&mut self.marker, "marker.csv"),
            Which::Diagnostics => (&mut self.diagnostics, "diagnostics.csv"),
            Which::Index => (&mut self.index, "snapshots.csv"),
        };
        writeln!(file, "{text}").map_err(ScenarioError::io(self.dir.join(name)))
    }

    fn file(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), ScenarioError> {
        let path = self.dir.join(name);
        let mut f = create(&path)?;
        body(&mut f).and_then(|_| f.flush()).map_err(ScenarioError::io(path))
    }

    fn snapshot(&mut self, state: &FluidState<2>, mesh: &CriticalMesh<2>) -> Result<(), ScenarioError> {
        let k = self.snapshots;
        let t = state.time;
        self.file(&format!("particles_{k:05}.csv"), |f| write_particle_csv(f, &state.particles))?;
        self.file(&format!("particles_{k:05}.vtk"), |f| write_particle_vtk(f, &state.particles, t))?;
        self.file(&format!("critical_{k:05}.vtk"), |f| write_critical_vtk(f, mesh, t))?;
        self.line(Which::Index, &format!("{k},{t}"))?;
        self.snapshots += 1;
        Ok(())
    }

    fn flush(&mut self) -> Result<(), ScenarioError> {
        for (f, name) in [
            (&mut self.marker, "marker.csv"),
            (&mut self.diagnostics, "diagnostics.csv"),
            (&mut self.index, "snapshots.csv"),
        ] {
            f.flush().map_err(ScenarioError::io(self.dir.join(name)))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Which {
    Marker,
    Diagnostics,
    Index,
}

struct Progress {
    writer: Writer,
    records: Vec<WindowRecord>,
    last_good: FluidState<2>,
    next_write: f64,
}

impl Progress {
    fn window(
        &mut self,
        cfg: &RunConfig,
        adapter: &FluidAdapter<2>,
        system: &CouplingSystem<StructureParticipant>,
        report: &WindowReport<2>,
    ) -> Result<(), ScenarioError> {
        let sc = &cfg.scenario;
        let state = adapter.state();
        let marker = Point::new(sc.marker[0], sc.marker[1]);
        let u = system.remote().displacement_at(&marker).unwrap_or_else(Point::zeros);
        let (crossed, upstream_level) = crossed_and_level(sc, &state.particles);
        let rec = WindowRecord {
            window: report.window,
            t: report.end,
            iterations: report.iterations,
            substeps: report.substeps,
            contacts: report.contacts,
            corrections: report.corrections,
            max_penetration: report.max_penetration,
            force: [report.total_force.x, report.total_force.y],
            residual: report.residual,
            max_speed: state.max_speed(),
            crossed,
            upstream_level,
            marker: [u.x, u.y],
        };
        self.writer.line(Which::Marker, &format!("{},{},{}", rec.t, u.x, u.y))?;
        self.writer.line(Which::Diagnostics, &rec.csv())?;
        self.records.push(rec);
        let tol = 1e-9 * system.window_length();
        if report.end >= self.next_write - tol {
            self.writer.snapshot(state, adapter.mesh())?;
            while self.next_write <= report.end + tol {
                self.next_write += cfg.write_interval;
            }
        }
        self.last_good.clone_from(state);
        Ok(())
    }
}

fn manifest(cfg: &RunConfig, status: RunStatus, windows: usize, final_time: f64, wall: f64, message: Option<String>) -> serde_json::Value {
    serde_json::json!({
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "status": status,
        "windows": windows,
        "final_time": final_time,
        "wall_time_s": wall,
        "message": message,
    })
}

/// Runs the coupled simulation and writes its artifacts to the configured
/// output directory.
pub fn run(cfg: &RunConfig, options: &RunOptions) -> Result<RunSummary, ScenarioError> {
    match options.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ScenarioError::Config(format!("worker pool: {e}")))?;
            pool.install(|| run_in_pool(cfg))
        }
        None => run_in_pool(cfg),
    }
}

fn run_in_pool(cfg: &RunConfig) -> Result<RunSummary, ScenarioError> {
    let clock = Instant::now();
    let dir = cfg.output_dir.clone();
    let write_manifest = |status, windows, t, message| -> Result<(), ScenarioError> {
        let path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest(cfg, status, windows, t, clock.elapsed().as_secs_f64(), message))
            .expect("manifest serializes");
        fs::write(&path, body + "\n").map_err(ScenarioError::io(path))
    };

    let Setup {
        mut adapter,
        system,
        initial_dt,
    } = match Setup::build(cfg) {
        Ok(s) => s,
        Err(e) => {
            if fs::create_dir_all(&dir).is_ok() {
                let _ = write_manifest(RunStatus::Failed, 0, 0.0, Some(e.to_string()));
            }
            return Err(e);
        }
    };
    let mut writer = Writer::new(&dir)?;
    writer.line(Which::Marker, "0,0,0")?;
    writer.snapshot(adapter.state(), adapter.mesh())?;
    let mut progress = Progress {
        writer,
        records: Vec::new(),
        last_good: adapter.state().clone(),
        next_write: cfg.write_interval,
    };

    let result = adapter_loop(&mut adapter, system, |a, s, r| progress.window(cfg, a, s, r));
    progress.writer.flush()?;
    let windows = progress.records.len();
    let final_time = progress.records.last().map_or(0.0, |r| r.t);
    match result {
        Ok(_) => {
            write_manifest(RunStatus::Completed, windows, final_time, None)?;
            Ok(RunSummary {
                status: RunStatus::Completed,
                output_dir: dir.clone(),
                windows,
                final_time,
                wall_time: clock.elapsed().as_secs_f64(),
                initial_dt,
                fluid_particles: adapter.state().fluid_count(),
                records: progress.records,
            })
        }
        Err(e) => {
            let status = if e.is_numerical() {
                let good = &progress.last_good;
                progress.writer.file("last_good.csv", |f| write_particle_csv(f, &good.particles))?;
                progress.writer.file("last_good.vtk", |f| write_particle_vtk(f, &good.particles, good.time))?;
                RunStatus::NumericalFailure
            } else {
                RunStatus::Failed
            };
            write_manifest(status, windows, final_time, Some(e.to_string()))?;
            Err(e)
        }
    }
}
