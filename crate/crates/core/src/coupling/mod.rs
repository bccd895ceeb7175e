//! Partitioned coupling of two solvers over a shared interface.

mod accelerator;
mod checkpoint;
mod config;
mod system;
mod transport;

pub use accelerator::{residual, Accelerator};
pub use checkpoint::CheckpointStore;
pub use config::{
    AcceleratorConfig, CouplingConfig, ExchangeConfig, ParticipantConfig, SchemeConfig, SchemeKind,
};
pub use system::{
    AdvanceOutcome, CouplingSystem, FieldSet, Participant, ParticipantError, TraceEntry, TraceEvent,
    WindowStats,
};
pub use transport::{InProcessTransport, Message, Transport};

pub use crate::mapping::CouplingMesh;

use thiserror::Error;

use crate::mapping::MappingError;

#[derive(Debug, Error, PartialEq)]
pub enum CouplingError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite coupling data: {0}")]
    NonFinite(String),
    #[error("mapping: {0}")]
    Mapping(#[from] MappingError),
    #[error("participant {participant:?} failed in window {window}, iteration {iteration}: {message}")]
    Participant {
        participant: String,
        window: usize,
        iteration: usize,
        message: String,
    },
}
