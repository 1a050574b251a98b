//! Non-reloading reachability: the functionals F and G.

use crate::level::{Level, LevelVector};
use crate::model::{Cmdp, StateId};
use crate::strategy::MemorylessStrategy;

use super::values::{action_value, action_value_by};
use super::{target_mask, SolveError};

#[derive(Clone, Debug, PartialEq)]
pub struct NonReloadingResult {
    pub vector: LevelVector,
    pub strategy: MemorylessStrategy,
    /// Applications of F that changed the vector.
    pub iterations: usize,
}

/// Least fixpoint of F from `x_T`: the minimal load to surely reach a target
/// without passing a reload, together with a memoryless witness.
pub fn non_reloading_reach(model: &Cmdp, targets: &[StateId]) -> Result<NonReloadingResult, SolveError> {
    let mask = target_mask(model, targets)?;
    let (vector, iterations) = reach_fixpoint(model, &mask);
    // an action whose value matches the state's value; on targets any action
    let actions = model
        .states()
        .map(|s| {
            let mut acts = model.actions_of(s);
            if mask[s] {
                return acts.start;
            }
            acts.find(|&a| action_value(model, &vector, a) == vector[s]).unwrap_or(model.actions_of(s).start)
        })
        .collect();
    Ok(NonReloadingResult { vector, strategy: MemorylessStrategy::new(actions), iterations })
}

fn reach_fixpoint(model: &Cmdp, targets: &[bool]) -> (LevelVector, usize) {
    let mut x: LevelVector = targets.iter().map(|&t| if t { Level::ZERO } else { Level::Infinite }).collect();
    let mut iterations = 0;
    loop {
        let next: LevelVector = model
            .states()
            .map(|s| if targets[s] { Level::ZERO } else { min_action_value(model, s, |t| x[t]) })
            .collect();
        if next == x {
            return (x, iterations);
        }
        x = next;
        iterations += 1;
    }
}

fn min_action_value(model: &Cmdp, state: StateId, value: impl Fn(StateId) -> Level + Copy) -> Level {
    model.actions_of(state).map(|a| action_value_by(model, a, value)).min().unwrap_or(Level::Infinite)
}

/// Iterates G from the all-infinite vector; the least fixpoint is the minimal
/// load to surely reach a target in at least one step without reloading on
/// the way. Targets count as 0 only when reached.
pub fn min_init_cons(model: &Cmdp, targets: &[StateId]) -> Result<LevelVector, SolveError> {
    let mask = target_mask(model, targets)?;
    Ok(min_init_cons_masked(model, &mask).0)
}

/// [`min_init_cons`] on a target mask, also returning the number of changing
/// iterations. An empty mask yields the all-infinite vector.
pub(crate) fn min_init_cons_masked(model: &Cmdp, targets: &[bool]) -> (LevelVector, usize) {
    let mut v = LevelVector::infinite(model.num_states());
    let mut iterations = 0;
    loop {
        let old = v.clone();
        let value = |t: StateId| if targets[t] { Level::ZERO } else { old[t] };
        let mut changed = false;
        for s in model.states() {
            let c = min_action_value(model, s, value);
            if c < v[s] {
                v[s] = c;
                changed = true;
            }
        }
        if !changed {
            return (v, iterations);
        }
        iterations += 1;
    }
}
