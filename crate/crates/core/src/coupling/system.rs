//! Two-participant coupling state machine.
//!
//! The first configured participant drives the system through
//! `read`/`write`/`advance`; the second is owned by the system and solved
//! inside `advance`.

use std::collections::BTreeMap;

use super::accelerator::{residual, Accelerator};
use super::transport::{InProcessTransport, Message, Transport};
use super::{CouplingConfig, CouplingError, ExchangeConfig, SchemeKind};
use crate::mapping::{CouplingMesh, MappingPlan};

pub type FieldSet = BTreeMap<String, Vec<f64>>;

pub type ParticipantError = Box<dyn std::error::Error + Send + Sync>;

/// A solver driven by the coupling system.
pub trait Participant {
    type Checkpoint;

    fn name(&self) -> &str;
    /// Interface mesh, registered once.
    fn mesh(&self) -> CouplingMesh;
    /// Advances one window of length `dt` with the given inputs and returns
    /// every output field on the participant's mesh.
    fn solve_window(&mut self, dt: f64, inputs: &FieldSet) -> Result<FieldSet, ParticipantError>;
    fn checkpoint(&self) -> Self::Checkpoint;
    fn reload(&mut self, checkpoint: &Self::Checkpoint);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvanceOutcome {
    WindowConverged,
    IterateAgain,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Read { participant: String, data: String },
    Write { participant: String, data: String },
    Solve { participant: String },
    Map { data: String, from: String, to: String },
    Checkpoint { participant: String },
    Reload { participant: String },
    Residual { value: f64 },
    Advance { outcome: AdvanceOutcome },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub window: usize,
    pub iteration: usize,
    pub event: TraceEvent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub window: usize,
    pub iterations: usize,
    pub residual: f64,
    pub reload_requests: usize,
    pub converged: bool,
}

struct Exchange {
    config: ExchangeConfig,
    plan: MappingPlan,
}

pub struct CouplingSystem<R: Participant> {
    config: CouplingConfig,
    remote: R,
    remote_mesh: CouplingMesh,
    local_mesh: Option<CouplingMesh>,
    transport: Box<dyn Transport>,
    to_remote: Vec<Exchange>,
    to_local: Vec<Exchange>,
    components: usize,
    initialized: bool,
    window: usize,
    iteration: usize,
    /// Inputs the local participant reads this iteration (local mesh).
    local_in: FieldSet,
    /// Outputs written by the local participant this iteration.
    local_out: BTreeMap<String, Option<Vec<f64>>>,
    /// Local outputs the remote consumes (parallel schemes lag by one iterate).
    local_out_iterate: FieldSet,
    remote_checkpoint: Option<R::Checkpoint>,
    accelerator: Accelerator,
    convergence: Vec<String>,
    trace: Vec<TraceEntry>,
    stats: Vec<WindowStats>,
    last_residual: f64,
}

impl<R: Participant> CouplingSystem<R> {
    pub fn new(config: CouplingConfig, remote: R) -> Result<Self, CouplingError> {
        config.validate()?;
        let remote_cfg = &config.participants[1];
        if remote.name() != remote_cfg.name {
            return Err(CouplingError::Config(format!(
                "second participant is {:?} but the solver is named {:?}",
                remote_cfg.name,
                remote.name()
            )));
        }
        let remote_mesh = remote.mesh();
        if remote_mesh.name != remote_cfg.mesh {
            return Err(CouplingError::Config(format!(
                "participant {:?} uses mesh {:?}, configured {:?}",
                remote_cfg.name, remote_mesh.name, remote_cfg.mesh
            )));
        }
        let convergence = match &config.scheme.convergence_data {
            Some(list) => list.clone(),
            None => config
                .exchanges
                .iter()
                .filter(|e| config.scheme.kind.is_parallel() || e.from == remote_cfg.name)
                .map(|e| e.data.clone())
                .collect(),
        };
        let accelerator = Accelerator::new(config.scheme.accelerator);
        Ok(Self {
            components: remote_mesh.dim,
            config,
            remote,
            remote_mesh,
            local_mesh: None,
            transport: Box::new(InProcessTransport::new()),
            to_remote: Vec::new(),
            to_local: Vec::new(),
            initialized: false,
            window: 0,
            iteration: 0,
            local_in: FieldSet::new(),
            local_out: BTreeMap::new(),
            local_out_iterate: FieldSet::new(),
            remote_checkpoint: None,
            accelerator,
            convergence,
            trace: Vec::new(),
            stats: Vec::new(),
            last_residual: 0.0,
        })
    }

    pub fn with_transport(mut self, transport: Box<dyn Transport>) -> Self {
        self.transport = transport;
        self
    }

    pub fn local_name(&self) -> &str {
        &self.config.participants[0].name
    }

    pub fn remote_name(&self) -> &str {
        &self.config.participants[1].name
    }

    /// Registers the driving participant's interface mesh.
    pub fn set_mesh_vertices(&mut self, mesh: CouplingMesh) -> Result<(), CouplingError> {
        if self.initialized {
            return Err(CouplingError::Protocol("mesh registration after initialize".into()));
        }
        if mesh.name == self.remote_mesh.name || self.local_mesh.as_ref().is_some_and(|m| m.name == mesh.name) {
            return Err(CouplingError::Config(format!("duplicate mesh registration {:?}", mesh.name)));
        }
        if self.local_mesh.is_some() {
            return Err(CouplingError::Config(format!(
                "participant {:?} already registered a mesh",
                self.local_name()
            )));
        }
        if mesh.name != self.config.participants[0].mesh {
            return Err(CouplingError::Config(format!("unknown mesh {:?}", mesh.name)));
        }
        if mesh.dim != self.remote_mesh.dim {
            return Err(CouplingError::Config(format!(
                "mesh {:?} has dimension {}, {:?} has {}",
                mesh.name, mesh.dim, self.remote_mesh.name, self.remote_mesh.dim
            )));
        }
        self.local_mesh = Some(mesh);
        Ok(())
    }

    /// Builds mappings and zero-initialises the exchanged data. Returns the
    /// length of the first window.
    pub fn initialize(&mut self) -> Result<f64, CouplingError> {
        if self.initialized {
            return Err(CouplingError::Protocol("initialize called twice".into()));
        }
        let local = self
            .local_mesh
            .clone()
            .ok_or_else(|| CouplingError::Protocol("initialize before mesh registration".into()))?;
        let local_name = self.local_name().to_string();
        for ex in &self.config.exchanges {
            let (src, dst) = if ex.from == local_name {
                (&local, &self.remote_mesh)
            } else {
                (&self.remote_mesh, &local)
            };
            let plan = MappingPlan::build(ex.mapping, ex.constraint, src, dst)
                .map_err(|e| CouplingError::Config(format!("mapping for {:?}: {e}", ex.data)))?;
            let exchange = Exchange { config: ex.clone(), plan };
            if ex.from == local_name {
                self.local_out.insert(ex.data.clone(), None);
                self.local_out_iterate.insert(ex.data.clone(), vec![0.0; local.len() * self.components]);
                self.to_remote.push(exchange);
            } else {
                self.local_in.insert(ex.data.clone(), vec![0.0; local.len() * self.components]);
                self.to_local.push(exchange);
            }
        }
        self.initialized = true;
        Ok(self.window_length())
    }

    fn window_start(&self) -> f64 {
        self.window as f64 * self.config.scheme.window_dt
    }

    /// Length of the current window; the last one ends exactly at `max_time`.
    pub fn window_length(&self) -> f64 {
        let s = &self.config.scheme;
        s.window_dt.min(s.max_time - self.window_start()).max(0.0)
    }

    pub fn time(&self) -> f64 {
        self.window_start().min(self.config.scheme.max_time)
    }

    pub fn is_coupling_ongoing(&self) -> bool {
        self.window_length() > 1e-12 * self.config.scheme.window_dt
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn scheme(&self) -> SchemeKind {
        self.config.scheme.kind
    }

    pub fn config(&self) -> &CouplingConfig {
        &self.config
    }

    /// True at the first iteration of an implicit window.
    pub fn requires_write_checkpoint(&self) -> bool {
        self.config.scheme.kind.is_implicit() && self.iteration == 0
    }

    /// True while repeating a window; the driver must restore its checkpoint.
    pub fn requires_read_checkpoint(&self) -> bool {
        self.config.scheme.kind.is_implicit() && self.iteration > 0
    }

    pub fn remote(&self) -> &R {
        &self.remote
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn stats(&self) -> &[WindowStats] {
        &self.stats
    }

    pub fn last_residual(&self) -> f64 {
        self.last_residual
    }

    pub fn accelerator(&self) -> &Accelerator {
        &self.accelerator
    }

    /// Records an event of the driving participant in the trace.
    pub fn note(&mut self, event: TraceEvent) {
        self.record(event);
    }

    fn record(&mut self, event: TraceEvent) {
        self.trace.push(TraceEntry {
            window: self.window,
            iteration: self.iteration,
            event,
        });
    }

    fn check_local_mesh(&self, mesh: &str) -> Result<usize, CouplingError> {
        let local = self
            .local_mesh
            .as_ref()
            .filter(|_| self.initialized)
            .ok_or_else(|| CouplingError::Protocol("system is not initialized".into()))?;
        if local.name != mesh {
            return Err(CouplingError::Config(format!("unknown mesh {mesh:?}")));
        }
        Ok(local.len() * self.components)
    }

    pub fn read(&mut self, mesh: &str, data: &str) -> Result<Vec<f64>, CouplingError> {
        self.check_local_mesh(mesh)?;
        let values = self
            .local_in
            .get(data)
            .cloned()
            .ok_or_else(|| CouplingError::Config(format!("data {data:?} is not sent to {:?}", self.local_name())))?;
        let participant = self.local_name().to_string();
        self.record(TraceEvent::Read {
            participant,
            data: data.to_string(),
        });
        Ok(values)
    }

    pub fn write(&mut self, mesh: &str, data: &str, values: &[f64]) -> Result<(), CouplingError> {
        let n = self.check_local_mesh(mesh)?;
        if values.len() != n {
            return Err(CouplingError::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(CouplingError::NonFinite(format!("{data:?} contains {x}")));
        }
        let slot = self
            .local_out
            .get_mut(data)
            .ok_or_else(|| CouplingError::Config(format!("data {data:?} is not sent by {:?}", self.config.participants[0].name)))?;
        *slot = Some(values.to_vec());
        let participant = self.local_name().to_string();
        self.record(TraceEvent::Write {
            participant,
            data: data.to_string(),
        });
        Ok(())
    }

    /// Ends the current iteration of the current window.
    pub fn advance(&mut self, dt: f64) -> Result<AdvanceOutcome, CouplingError> {
        if !self.initialized {
            return Err(CouplingError::Protocol("advance before initialize".into()));
        }
        if !self.is_coupling_ongoing() {
            return Err(CouplingError::Protocol("advance after the final window".into()));
        }
        let len = self.window_length();
        if (dt - len).abs() > 1e-9 * len {
            return Err(CouplingError::Protocol(format!(
                "advance by {dt} but the window length is {len}"
            )));
        }
        if let Some((name, _)) = self.local_out.iter().find(|(_, v)| v.is_none()) {
            return Err(CouplingError::Protocol(format!(
                "advance before {:?} wrote {name:?} (window {}, iteration {})",
                self.local_name(),
                self.window,
                self.iteration
            )));
        }
        let written: FieldSet = self
            .local_out
            .iter()
            .map(|(k, v)| (k.clone(), v.clone().expect("checked above")))
            .collect();
        let kind = self.config.scheme.kind;

        // The remote consumes the current iterate in parallel schemes and
        // the fresh output in serial ones.
        let remote_source = if kind.is_parallel() {
            self.local_out_iterate.clone()
        } else {
            written.clone()
        };
        let remote_inputs = self.send_to_remote(&remote_source)?;

        if kind.is_implicit() && self.iteration == 0 {
            self.remote_checkpoint = Some(self.remote.checkpoint());
            let participant = self.remote_name().to_string();
            self.record(TraceEvent::Checkpoint { participant });
        }
        let participant = self.remote_name().to_string();
        self.record(TraceEvent::Solve {
            participant: participant.clone(),
        });
        let outputs = self
            .remote
            .solve_window(dt, &remote_inputs)
            .map_err(|source| CouplingError::Participant {
                participant: participant.clone(),
                window: self.window,
                iteration: self.iteration,
                message: source.to_string(),
            })?;
        let received = self.receive_from_remote(&outputs)?;

        let outcome = if !kind.is_implicit() {
            self.local_in = received;
            self.local_out_iterate = written;
            self.last_residual = 0.0;
            AdvanceOutcome::WindowConverged
        } else {
            self.implicit_update(written, received)?
        };
        self.record(TraceEvent::Advance { outcome });

        match outcome {
            AdvanceOutcome::WindowConverged => {
                self.stats.push(WindowStats {
                    window: self.window,
                    iterations: self.iteration + 1,
                    residual: self.last_residual,
                    reload_requests: self.iteration,
                    converged: !kind.is_implicit() || self.last_residual < self.config.scheme.tolerance,
                });
                self.window += 1;
                self.iteration = 0;
                self.accelerator.reset_window();
            }
            AdvanceOutcome::IterateAgain => {
                let cp = self.remote_checkpoint.as_ref().expect("checkpoint taken at iteration 0");
                self.remote.reload(cp);
                let participant = self.remote_name().to_string();
                self.record(TraceEvent::Reload { participant });
                self.iteration += 1;
            }
        }
        for v in self.local_out.values_mut() {
            *v = None;
        }
        Ok(outcome)
    }

    fn implicit_update(&mut self, written: FieldSet, received: FieldSet) -> Result<AdvanceOutcome, CouplingError> {
        let parallel = self.config.scheme.kind.is_parallel();
        // Current iterate and its image, field by field.
        let mut current: Vec<(&String, &Vec<f64>, &Vec<f64>)> = Vec::new();
        for (k, v) in &received {
            current.push((k, &self.local_in[k], v));
        }
        for (k, v) in &written {
            current.push((k, &self.local_out_iterate[k], v));
        }
        let mut worst = 0.0f64;
        for (name, prev, new) in &current {
            if self.convergence.iter().any(|c| c == *name) {
                worst = worst.max(residual(new, prev)?);
            }
        }
        self.last_residual = worst;
        self.record(TraceEvent::Residual { value: worst });

        let converged = worst < self.config.scheme.tolerance;
        if converged || self.iteration + 1 >= self.config.scheme.max_iterations {
            self.local_in = received;
            self.local_out_iterate = written;
            return Ok(AdvanceOutcome::WindowConverged);
        }

        // Relax the fields the next iteration consumes.
        let mut names: Vec<String> = received.keys().cloned().collect();
        if parallel {
            names.extend(written.keys().cloned());
        }
        let mut prev = Vec::new();
        let mut new = Vec::new();
        for n in &names {
            let (p, x) = if let Some(x) = received.get(n) {
                (&self.local_in[n], x)
            } else {
                (&self.local_out_iterate[n], &written[n])
            };
            prev.extend_from_slice(p);
            new.extend_from_slice(x);
        }
        let relaxed = self.accelerator.accelerate(&prev, &new)?;
        let mut offset = 0;
        for n in &names {
            let target = if received.contains_key(n) {
                self.local_in.get_mut(n)
            } else {
                self.local_out_iterate.get_mut(n)
            }
            .expect("known field");
            let len = target.len();
            target.copy_from_slice(&relaxed[offset..offset + len]);
            offset += len;
        }
        if !parallel {
            self.local_out_iterate = written;
        }
        Ok(AdvanceOutcome::IterateAgain)
    }

    fn send_to_remote(&mut self, source: &FieldSet) -> Result<FieldSet, CouplingError> {
        let mut inputs = FieldSet::new();
        for i in 0..self.to_remote.len() {
            let ex = &self.to_remote[i];
            let data = ex.config.data.clone();
            let mapped = ex.plan.map(&source[&data], self.components)?;
            let (from, to) = (ex.plan.source_mesh().to_string(), ex.plan.target_mesh().to_string());
            self.transport.send(Message {
                mesh: to.clone(),
                data: data.clone(),
                values: mapped,
            })?;
            self.record(TraceEvent::Map {
                data: data.clone(),
                from,
                to: to.clone(),
            });
            let msg = self.transport.receive(&to, &data)?;
            inputs.insert(data, msg.values);
        }
        Ok(inputs)
    }

    fn receive_from_remote(&mut self, outputs: &FieldSet) -> Result<FieldSet, CouplingError> {
        let n_remote = self.remote_mesh.len() * self.components;
        let mut received = FieldSet::new();
        for i in 0..self.to_local.len() {
            let ex = &self.to_local[i];
            let data = ex.config.data.clone();
            let values = outputs.get(&data).ok_or_else(|| {
                CouplingError::Protocol(format!("{:?} did not produce {data:?}", self.config.participants[1].name))
            })?;
            if values.len() != n_remote {
                return Err(CouplingError::LengthMismatch {
                    expected: n_remote,
                    got: values.len(),
                });
            }
            if let Some(x) = values.iter().find(|x| !x.is_finite()) {
                return Err(CouplingError::NonFinite(format!("{data:?} contains {x}")));
            }
            let mapped = ex.plan.map(values, self.components)?;
            let (from, to) = (ex.plan.source_mesh().to_string(), ex.plan.target_mesh().to_string());
            self.transport.send(Message {
                mesh: to.clone(),
                data: data.clone(),
                values: mapped,
            })?;
            self.record(TraceEvent::Map {
                data: data.clone(),
                from,
                to: to.clone(),
            });
            let msg = self.transport.receive(&to, &data)?;
            received.insert(data, msg.values);
        }
        Ok(received)
    }

    /// Releases the coupling and returns the owned participant.
    pub fn finalize(self) -> R {
        self.remote
    }
}
