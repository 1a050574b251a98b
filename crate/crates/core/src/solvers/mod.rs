//! Fixed-point synthesis of minimal initial loads and witness strategies.
//!
//! Every solver works on a [`Cmdp`] and a target set given as a list of
//! states. Vectors hold exact finite values until capacity truncation is
//! applied, so values above capacity can still be compared.

mod asreach;
mod buchi;
mod posreach;
mod reach;
mod safety;
mod values;

use thiserror::Error;

use crate::level::LevelVector;
use crate::model::{Cmdp, StateId};
use crate::strategy::RuleSelector;

pub use asreach::{almost_sure_reach_direct, almost_sure_reach_product, modified_min_init_cons, sink_product};
pub use buchi::buchi;
pub use posreach::{positive_reachability, positive_reachability_iterates};
pub use reach::{min_init_cons, non_reloading_reach, NonReloadingResult};
pub use safety::{is_safe_action, min_safe_action, safety};
pub use values::{action_value, argmin_action, hope_value, safe_value, NotASuccessor};

/// Tie-breaking and filtering used by the argmin operator of the
/// reachability fixpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeuristicMode {
    Standard,
    GoalLeaning,
    /// Goal-leaning with successors below the given probability ignored in a
    /// first phase.
    Threshold(f64),
}

impl HeuristicMode {
    pub(crate) fn theta(self) -> f64 {
        match self {
            HeuristicMode::Threshold(theta) => theta,
            _ => 0.0,
        }
    }

    pub fn validate(self) -> Result<(), SolveError> {
        match self {
            HeuristicMode::Threshold(theta) if !(0.0..=1.0).contains(&theta) => Err(SolveError::InvalidTheta(theta)),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    Safety,
    NonReloadingReach,
    PositiveReach,
    AlmostSureBuchi,
    AlmostSureReach,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub targets: Vec<StateId>,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, targets: Vec<StateId>) -> Self {
        ObjectiveSpec { kind, targets }
    }

    pub fn safety() -> Self {
        Self::new(ObjectiveKind::Safety, Vec::new())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("the objective needs at least one target")]
    EmptyTargets,
    #[error("target state {0} out of range")]
    TargetOutOfRange(StateId),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidTheta(f64),
}

/// Statistics of one inner fixpoint run of an iterated solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Round {
    /// Number of reload states the round ran with.
    pub reloads: usize,
    /// Number of fixpoint applications that changed the vector.
    pub iterations: usize,
}

/// A minimal-load vector with a witness rule selector.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    pub vector: LevelVector,
    pub selector: RuleSelector,
    /// Applications of the main functional that changed the vector, summed
    /// over all rounds.
    pub iterations: usize,
    /// One entry per round of the outer reload-pruning loop.
    pub rounds: Vec<Round>,
}

/// Output of [`solve`].
#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Selector(SynthesisResult),
    Memoryless(NonReloadingResult),
}

impl Solution {
    pub fn vector(&self) -> &LevelVector {
        match self {
            Solution::Selector(r) => &r.vector,
            Solution::Memoryless(r) => &r.vector,
        }
    }

    /// The witness as a rule selector; memoryless strategies play their action
    /// from level 0.
    pub fn selector(&self) -> RuleSelector {
        match self {
            Solution::Selector(r) => r.selector.clone(),
            Solution::Memoryless(r) => r.strategy.to_selector(),
        }
    }
}

/// Whether the almost-sure reachability solver runs directly on the model or
/// through the sink product and the Büchi solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReachPath {
    #[default]
    Direct,
    Product,
}

pub(crate) fn target_mask(model: &Cmdp, targets: &[StateId]) -> Result<Vec<bool>, SolveError> {
    if targets.is_empty() {
        return Err(SolveError::EmptyTargets);
    }
    if let Some(&bad) = targets.iter().find(|&&t| t >= model.num_states()) {
        return Err(SolveError::TargetOutOfRange(bad));
    }
    Ok(model.mask(targets))
}

/// Dispatches an objective to its solver.
pub fn solve(
    model: &Cmdp,
    objective: &ObjectiveSpec,
    mode: HeuristicMode,
    path: ReachPath,
) -> Result<Solution, SolveError> {
    mode.validate()?;
    let targets = &objective.targets;
    Ok(match objective.kind {
        ObjectiveKind::Safety => Solution::Selector(safety(model)),
        ObjectiveKind::NonReloadingReach => Solution::Memoryless(non_reloading_reach(model, targets)?),
        ObjectiveKind::PositiveReach => Solution::Selector(positive_reachability(model, targets, mode)?),
        ObjectiveKind::AlmostSureBuchi => Solution::Selector(buchi(model, targets, mode)?),
        ObjectiveKind::AlmostSureReach => Solution::Selector(match path {
            ReachPath::Direct => almost_sure_reach_direct(model, targets, mode)?,
            ReachPath::Product => almost_sure_reach_product(model, targets, mode)?,
        }),
    })
}
