//! Action, hope and safe values, and the argmin operators built on them.

use thiserror::Error;

use crate::level::{Level, LevelVector};
use crate::model::{ActionId, Cmdp, StateId};

use super::HeuristicMode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("state {successor} is not a successor of action {action}")]
pub struct NotASuccessor {
    pub action: ActionId,
    pub successor: StateId,
}

/// `γ(s,a) + max` of `value` over the successors of `action`.
pub(crate) fn action_value_by(model: &Cmdp, action: ActionId, value: impl Fn(StateId) -> Level) -> Level {
    let act = model.action(action);
    let worst = act.successors.iter().map(|t| value(t.target)).max().unwrap_or(Level::ZERO);
    worst + act.consumption
}

/// The action value: consumption plus the worst successor value.
pub fn action_value(model: &Cmdp, vector: &LevelVector, action: ActionId) -> Level {
    action_value_by(model, action, |s| vector[s])
}

/// The hope value of `successor`: it must be worth `vector(successor)` while
/// every other successor only has to survive with `survival`.
pub fn hope_value(
    model: &Cmdp,
    survival: &LevelVector,
    vector: &LevelVector,
    action: ActionId,
    successor: StateId,
) -> Result<Level, NotASuccessor> {
    let act = model.action(action);
    if act.probability_of(successor).is_none() {
        return Err(NotASuccessor { action, successor });
    }
    let others = act
        .successors
        .iter()
        .filter(|t| t.target != successor)
        .map(|t| survival[t.target])
        .max()
        .unwrap_or(Level::ZERO);
    Ok(vector[successor].max(others))
}

/// The safe value of `action`, ignoring successors reached with probability
/// below `theta`. An action with no successor at or above `theta` is worth
/// infinity.
pub fn safe_value(model: &Cmdp, survival: &LevelVector, vector: &LevelVector, action: ActionId, theta: f64) -> Level {
    evaluate(model, survival, vector, action, theta).value
}

/// A safe value together with the probability of the successor it hopes for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct SafeValue {
    pub value: Level,
    pub lean: f64,
}

pub(crate) fn evaluate(
    model: &Cmdp,
    survival: &LevelVector,
    vector: &LevelVector,
    action: ActionId,
    theta: f64,
) -> SafeValue {
    let act = model.action(action);
    // largest and second largest survival value among successors, so that the
    // maximum over "all other successors" is O(1) per successor
    let mut top = (Level::ZERO, usize::MAX);
    let mut second = Level::ZERO;
    for (i, t) in act.successors.iter().enumerate() {
        let v = survival[t.target];
        if top.1 == usize::MAX || v > top.0 {
            second = if top.1 == usize::MAX { Level::ZERO } else { top.0 };
            top = (v, i);
        } else if v > second {
            second = v;
        }
    }
    let mut best = SafeValue { value: Level::Infinite, lean: 0.0 };
    for (i, t) in act.successors.iter().enumerate() {
        let p = t.probability.value();
        if p < theta {
            continue;
        }
        let others = if i == top.1 { second } else { top.0 };
        let hope = vector[t.target].max(others);
        if hope < best.value || (hope == best.value && p > best.lean) {
            best = SafeValue { value: hope, lean: p };
        }
    }
    SafeValue { value: best.value + act.consumption, lean: best.lean }
}

/// The action chosen by the argmin operator of `mode` together with its safe
/// value.
///
/// Standard mode takes the smallest safe value and breaks ties by action
/// order. The goal-leaning and threshold modes break ties among minimal
/// actions by the larger probability of the hoped-for successor first.
pub(crate) fn argmin(
    model: &Cmdp,
    survival: &LevelVector,
    vector: &LevelVector,
    state: StateId,
    mode: HeuristicMode,
    theta: f64,
) -> (ActionId, Level) {
    let leaning = !matches!(mode, HeuristicMode::Standard);
    let mut actions = model.actions_of(state);
    let first = actions.next().expect("every state has an action");
    let mut best = (first, evaluate(model, survival, vector, first, theta));
    for a in actions {
        let sv = evaluate(model, survival, vector, a, theta);
        let better = sv.value < best.1.value || (leaning && sv.value == best.1.value && sv.lean > best.1.lean);
        if better {
            best = (a, sv);
        }
    }
    (best.0, best.1.value)
}

/// The public form of [`argmin`]; threshold mode filters by its own θ.
pub fn argmin_action(
    model: &Cmdp,
    survival: &LevelVector,
    vector: &LevelVector,
    state: StateId,
    mode: HeuristicMode,
) -> ActionId {
    argmin(model, survival, vector, state, mode, mode.theta()).0
}
