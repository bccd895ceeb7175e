use std::collections::VecDeque;

use super::CouplingError;

/// One field addressed to a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub mesh: String,
    pub data: String,
    pub values: Vec<f64>,
}

/// Message queue between the two sides of a coupling.
pub trait Transport: Send {
    fn send(&mut self, message: Message) -> Result<(), CouplingError>;
    /// Removes and returns the oldest message for `(mesh, data)`.
    fn receive(&mut self, mesh: &str, data: &str) -> Result<Message, CouplingError>;
    fn pending(&self) -> usize;
}

#[derive(Debug, Clone, Default)]
pub struct InProcessTransport {
    queue: VecDeque<Message>,
}

impl InProcessTransport {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for InProcessTransport {
    fn send(&mut self, message: Message) -> Result<(), CouplingError> {
        self.queue.push_back(message);
        Ok(())
    }

    fn receive(&mut self, mesh: &str, data: &str) -> Result<Message, CouplingError> {
        let pos = self
            .queue
            .iter()
            .position(|m| m.mesh == mesh && m.data == data)
            .ok_or_else(|| CouplingError::Protocol(format!("no message for {data:?} on mesh {mesh:?}")))?;
        Ok(self.queue.remove(pos).expect("position is valid"))
    }

    fn pending(&self) -> usize {
        self.queue.len()
    }
}
