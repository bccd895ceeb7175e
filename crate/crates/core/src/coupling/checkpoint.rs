use super::CouplingError;

/// Holds the state snapshot taken at the start of a coupling window.
#[derive(Debug, Clone)]
pub struct CheckpointStore<T: Clone> {
    snapshot: Option<T>,
    saves: usize,
    reloads: usize,
}

impl<T: Clone> Default for CheckpointStore<T> {
    fn default() -> Self {
        Self {
            snapshot: None,
            saves: 0,
            reloads: 0,
        }
    }
}

impl<T: Clone> CheckpointStore<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn save(&mut self, state: &T) {
        self.snapshot = Some(state.clone());
        self.saves += 1;
    }

    pub fn reload(&mut self) -> Result<T, CouplingError> {
        let s = self
            .snapshot
            .clone()
            .ok_or_else(|| CouplingError::Protocol("reload requested without a checkpoint".into()))?;
        self.reloads += 1;
        Ok(s)
    }

    pub fn is_set(&self) -> bool {
        self.snapshot.is_some()
    }

    pub fn saves(&self) -> usize {
        self.saves
    }

    pub fn reloads(&self) -> usize {
        self.reloads
    }
}
