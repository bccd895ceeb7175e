//! Helpers shared by the integration test crates.
#![allow(dead_code)]

use pmc_core::coupling::{
    AcceleratorConfig, AdvanceOutcome, CheckpointStore, CouplingConfig, CouplingMesh, CouplingSystem, ExchangeConfig,
    FieldSet, Participant, ParticipantConfig, ParticipantError, SchemeConfig, SchemeKind, TraceEvent,
};
use pmc_core::mapping::{Constraint, MappingMethod};

/// Remote toy solver: `out = a * in + b` per entry, recording what it saw.
#[derive(Clone)]
pub struct Affine {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub time: f64,
    pub solves: usize,
    pub seen: Vec<f64>,
    pub tag_window: bool,
}

impl Affine {
    pub fn scalar(a: f64, b: f64) -> Self {
        Self::matrix(vec![vec![a]], vec![b])
    }

    pub fn matrix(a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        Self {
            a,
            b,
            time: 0.0,
            solves: 0,
            seen: Vec::new(),
            tag_window: false,
        }
    }
}

impl Participant for Affine {
    type Checkpoint = (f64, Vec<f64>);

    fn name(&self) -> &str {
        "Solid"
    }

    fn mesh(&self) -> CouplingMesh {
        line_mesh("Solid-Mesh", self.b.len())
    }

    fn solve_window(&mut self, dt: f64, inputs: &FieldSet) -> Result<FieldSet, ParticipantError> {
        let x = &inputs["F"];
        self.seen.push(x[0]);
        self.solves += 1;
        self.time += dt;
        let out = if self.tag_window {
            vec![100.0 * (self.time / dt).round(); self.b.len()]
        } else {
            self.a
                .iter()
                .zip(&self.b)
                .map(|(row, b)| row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + b)
                .collect()
        };
        Ok(FieldSet::from([("D".to_string(), out)]))
    }

    fn checkpoint(&self) -> Self::Checkpoint {
        (self.time, self.seen.clone())
    }

    fn reload(&mut self, cp: &Self::Checkpoint) {
        self.time = cp.0;
    }
}

pub fn line_mesh(name: &str, n: usize) -> CouplingMesh {
    CouplingMesh::new(name, 1, (0..n).map(|i| i as f64).collect()).unwrap()
}

pub fn config(kind: SchemeKind, accelerator: AcceleratorConfig, tolerance: f64, max_iterations: usize) -> CouplingConfig {
    let nn = MappingMethod::NearestNeighbor;
    CouplingConfig {
        participants: vec![
            ParticipantConfig {
                name: "Fluid".into(),
                mesh: "Fluid-Mesh".into(),
            },
            ParticipantConfig {
                name: "Solid".into(),
                mesh: "Solid-Mesh".into(),
            },
        ],
        exchanges: vec![
            ExchangeConfig {
                data: "F".into(),
                from: "Fluid".into(),
                to: "Solid".into(),
                mapping: nn,
                constraint: Constraint::Conservative,
            },
            ExchangeConfig {
                data: "D".into(),
                from: "Solid".into(),
                to: "Fluid".into(),
                mapping: nn,
                constraint: Constraint::Consistent,
            },
        ],
        scheme: SchemeConfig {
            kind,
            window_dt: 0.1,
            max_time: 0.3,
            max_iterations,
            tolerance,
            accelerator,
            convergence_data: None,
        },
    }
}

pub fn system(cfg: CouplingConfig, remote: Affine) -> CouplingSystem<Affine> {
    let n = remote.b.len();
    let mut sys = CouplingSystem::new(cfg, remote).unwrap();
    sys.set_mesh_vertices(line_mesh("Fluid-Mesh", n)).unwrap();
    sys.initialize().unwrap();
    sys
}

/// Local solver state: window count plus last output.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Local {
    pub time: f64,
    pub solves: usize,
}

/// Drives the local side through every window with `f = local(d)`.
pub fn drive(sys: &mut CouplingSystem<Affine>, local: impl Fn(&[f64]) -> Vec<f64>) -> (Local, Vec<f64>) {
    let mut state = Local::default();
    let mut store = CheckpointStore::new();
    let mut last = Vec::new();
    while sys.is_coupling_ongoing() {
        if sys.requires_write_checkpoint() {
            store.save(&state);
        }
        let dt = sys.window_length();
        let d = sys.read("Fluid-Mesh", "D").unwrap();
        sys.note(TraceEvent::Solve {
            participant: "Fluid".into(),
        });
        state.time += dt;
        state.solves += 1;
        let f = local(&d);
        sys.write("Fluid-Mesh", "F", &f).unwrap();
        last = f;
        if sys.advance(dt).unwrap() == AdvanceOutcome::IterateAgain {
            state = Local {
                solves: state.solves,
                ..store.reload().unwrap()
            };
        }
    }
    (state, last)
}

pub fn monolithic_2x2(l: [[f64; 2]; 2], lb: [f64; 2], r: [[f64; 2]; 2], rb: [f64; 2]) -> [f64; 2] {
    // f = L (R f + rb) + lb  =>  (I - L R) f = L rb + lb
    let lr = [
        [
            l[0][0] * r[0][0] + l[0][1] * r[1][0],
            l[0][0] * r[0][1] + l[0][1] * r[1][1],
        ],
        [
            l[1][0] * r[0][0] + l[1][1] * r[1][0],
            l[1][0] * r[0][1] + l[1][1] * r[1][1],
        ],
    ];
    let m = [[1.0 - lr[0][0], -lr[0][1]], [-lr[1][0], 1.0 - lr[1][1]]];
    let rhs = [
        l[0][0] * rb[0] + l[0][1] * rb[1] + lb[0],
        l[1][0] * rb[0] + l[1][1] * rb[1] + lb[1],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ]
}

pub fn labels(sys: &CouplingSystem<Affine>, window: usize) -> Vec<String> {
    sys.trace()
        .iter()
        .filter(|e| e.window == window)
        .map(|e| match &e.event {
            TraceEvent::Read { participant, data } => format!("read {participant} {data}"),
            TraceEvent::Write { participant, data } => format!("write {participant} {data}"),
            TraceEvent::Solve { participant } => format!("solve {participant}"),
            TraceEvent::Map { data, .. } => format!("map {data}"),
            TraceEvent::Checkpoint { participant } => format!("checkpoint {participant}"),
            TraceEvent::Reload { participant } => format!("reload {participant}"),
            TraceEvent::Residual { .. } => "residual".into(),
            TraceEvent::Advance { outcome } => format!("advance {outcome:?}"),
        })
        .collect()
}

