//! Resource levels along loaded paths.

use thiserror::Error;

use crate::model::{ActionId, Cmdp, StateId};

/// One application of the resource-level recurrence: the level after playing
/// `action` in `state` with `level` units, or `None` once depleted.
///
/// Reload states refill to capacity before the action's consumption is paid.
pub fn next_level(model: &Cmdp, state: StateId, action: ActionId, level: Option<u64>) -> Option<u64> {
    let level = level?;
    let cost = model.action(action).consumption;
    if model.is_reload(state) {
        model.capacity().checked_sub(cost)
    } else {
        level.checked_sub(cost)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("initial load {load} exceeds capacity {capacity}")]
    LoadAboveCapacity { load: u64, capacity: u64 },
    #[error("step {step}: action {action} is not available in state {state}")]
    ActionUnavailable { step: usize, state: StateId, action: ActionId },
    #[error("step {step}: state {next} is not a successor")]
    NotASuccessor { step: usize, next: StateId },
    #[error("unknown name `{0}` in path")]
    UnknownName(String),
    #[error("path must alternate states and actions and end in a state")]
    Malformed,
}

/// A finite path `s1 a1 s2 a2 ... sn` started with `initial_load` units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedPath {
    pub initial_load: u64,
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
}

impl LoadedPath {
    pub fn new(initial_load: u64, start: StateId) -> Self {
        LoadedPath { initial_load, states: vec![start], actions: Vec::new() }
    }

    pub fn push(&mut self, action: ActionId, next: StateId) -> &mut Self {
        self.actions.push(action);
        self.states.push(next);
        self
    }

    /// Parses an alternating list of state and action names such as
    /// `["s", "a", "r", "a", "s"]`.
    pub fn from_names<S: AsRef<str>>(model: &Cmdp, initial_load: u64, names: &[S]) -> Result<Self, PathError> {
        if names.len().is_multiple_of(2) {
            return Err(PathError::Malformed);
        }
        let state =
            |n: &S| model.state_by_name(n.as_ref()).ok_or_else(|| PathError::UnknownName(n.as_ref().to_string()));
        let mut path = LoadedPath::new(initial_load, state(&names[0])?);
        for pair in names[1..].chunks(2) {
            let from = *path.states.last().unwrap();
            let action = model
                .action_by_name(from, pair[0].as_ref())
                .ok_or_else(|| PathError::UnknownName(pair[0].as_ref().to_string()))?;
            path.push(action, state(&pair[1])?);
        }
        Ok(path)
    }

    pub fn last_state(&self) -> StateId {
        *self.states.last().unwrap()
    }

    fn check(&self, model: &Cmdp) -> Result<(), PathError> {
        if self.initial_load > model.capacity() {
            return Err(PathError::LoadAboveCapacity { load: self.initial_load, capacity: model.capacity() });
        }
        if self.states.len() != self.actions.len() + 1 {
            return Err(PathError::Malformed);
        }
        for (step, (&action, pair)) in self.actions.iter().zip(self.states.windows(2)).enumerate() {
            let (state, next) = (pair[0], pair[1]);
            if !model.actions_of(state).contains(&action) {
                return Err(PathError::ActionUnavailable { step, state, action });
            }
            if model.action(action).probability_of(next).is_none() {
                return Err(PathError::NotASuccessor { step, next });
            }
        }
        Ok(())
    }
}

/// Resource levels along a path; `None` marks depletion, which is absorbing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceTrace(pub Vec<Option<u64>>);

impl ResourceTrace {
    pub fn last(&self) -> Option<u64> {
        *self.0.last().unwrap()
    }

    pub fn is_safe(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }
}

pub fn resource_levels(model: &Cmdp, path: &LoadedPath) -> Result<ResourceTrace, PathError> {
    path.check(model)?;
    let mut levels = Vec::with_capacity(path.states.len());
    let mut level = Some(path.initial_load);
    levels.push(level);
    for (&state, &action) in path.states.iter().zip(&path.actions) {
        level = next_level(model, state, action, level);
        levels.push(level);
    }
    Ok(ResourceTrace(levels))
}

pub fn is_safe(model: &Cmdp, path: &LoadedPath) -> Result<bool, PathError> {
    Ok(resource_levels(model, path)?.is_safe())
}
