//! The consumption MDP data model and its structural validation.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, One, Zero};
use thiserror::Error;

/// Dense state index, `0..model.num_states()`.
pub type StateId = usize;

/// Dense index into the model-wide action table. Every action belongs to
/// exactly one state.
pub type ActionId = usize;

/// Tolerance on distribution sums when some probability is not exact.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// A transition probability. Values that were given as fractions or finite
/// decimals keep an exact rational alongside the float used for sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probability {
    value: f64,
    exact: Option<Ratio<u64>>,
}

impl Probability {
    pub const ONE: Probability = Probability { value: 1.0, exact: Some(Ratio::new_raw(1, 1)) };

    /// Exact `numerator / denominator`. Panics on a zero denominator.
    pub fn ratio(numerator: u64, denominator: u64) -> Probability {
        let exact = Ratio::new(numerator, denominator);
        Probability { value: *exact.numer() as f64 / *exact.denom() as f64, exact: Some(exact) }
    }

    /// An inexact probability.
    pub fn from_f64(value: f64) -> Probability {
        Probability { value, exact: None }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<u64>> {
        self.exact
    }

    pub fn is_zero(&self) -> bool {
        match self.exact {
            Some(r) => r.is_zero(),
            None => self.value == 0.0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid probability `{0}`")]
pub struct ParseProbabilityError(pub String);

impl FromStr for Probability {
    type Err = ParseProbabilityError;

    /// Accepts `n/d` fractions and plain decimals; decimals with a short enough
    /// expansion are stored exactly.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || ParseProbabilityError(text.to_string());
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: u64 = num.trim().parse().map_err(|_| err())?;
            let den: u64 = den.trim().parse().map_err(|_| err())?;
            if den == 0 {
                return Err(err());
            }
            return Ok(Probability::ratio(num, den));
        }
        let value: f64 = text.parse().map_err(|_| err())?;
        if !value.is_finite() {
            return Err(err());
        }
        Ok(decimal_ratio(text).map_or(Probability::from_f64(value), |(n, d)| Probability::ratio(n, d)))
    }
}

/// Exact value of a plain decimal literal such as `0.125`, if it fits.
fn decimal_ratio(text: &str) -> Option<(u64, u64)> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let frac = frac.trim_end_matches('0');
    let den = 10u64.checked_pow(frac.len() as u32)?;
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some((int.checked_mul(den)?.checked_add(frac)?, den))
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub target: StateId,
    pub probability: Probability,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub state: StateId,
    pub name: String,
    pub consumption: u64,
    pub successors: Vec<Transition>,
}

impl Action {
    pub fn probability_of(&self, target: StateId) -> Option<f64> {
        self.successors.iter().find(|t| t.target == target).map(|t| t.probability.value())
    }
}

#[derive(Clone, Debug, PartialEq)]
struct StateInfo {
    name: String,
    reload: bool,
}

/// A consumption MDP. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Cmdp {
    capacity: u64,
    states: Vec<StateInfo>,
    actions: Vec<Action>,
    // actions of state `s` are `offsets[s]..offsets[s + 1]`
    offsets: Vec<usize>,
    names: HashMap<String, StateId>,
}

impl Cmdp {
    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> Range<StateId> {
        0..self.states.len()
    }

    pub fn state_name(&self, state: StateId) -> &str {
        &self.states[state].name
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.get(name).copied()
    }

    pub fn is_reload(&self, state: StateId) -> bool {
        self.states[state].reload
    }

    /// Reload membership as a mask indexed by state.
    pub fn reload_mask(&self) -> Vec<bool> {
        self.states.iter().map(|s| s.reload).collect()
    }

    pub fn reload_states(&self) -> Vec<StateId> {
        self.states().filter(|&s| self.is_reload(s)).collect()
    }

    pub fn actions_of(&self, state: StateId) -> Range<ActionId> {
        self.offsets[state]..self.offsets[state + 1]
    }

    pub fn action(&self, action: ActionId) -> &Action {
        &self.actions[action]
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action_by_name(&self, state: StateId, name: &str) -> Option<ActionId> {
        self.actions_of(state).find(|&a| self.actions[a].name == name)
    }

    /// The same model with a different reload set.
    pub fn with_reloads(&self, reload: &[bool]) -> Cmdp {
        let mut model = self.clone();
        for (info, &r) in model.states.iter_mut().zip(reload) {
            info.reload = r;
        }
        model
    }

    pub fn with_capacity(&self, capacity: u64) -> Cmdp {
        Cmdp { capacity, ..self.clone() }
    }

    /// Looks up a list of state names.
    pub fn states_named<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<StateId>, ModelError> {
        names
            .iter()
            .map(|n| self.state_by_name(n.as_ref()).ok_or_else(|| ModelError::UnknownState(n.as_ref().to_string())))
            .collect()
    }

    /// A state-membership mask built from a list of states.
    pub fn mask(&self, states: &[StateId]) -> Vec<bool> {
        let mut mask = vec![false; self.num_states()];
        for &s in states {
            mask[s] = true;
        }
        mask
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("duplicate action `{action}` in state `{state}`")]
    DuplicateAction { state: String, action: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(StateId),
    #[error("action `{action}` of state `{state}` lists successor `{target}` twice")]
    DuplicateSuccessor { state: String, action: String, target: String },
}

struct PendingAction {
    name: String,
    consumption: u64,
    successors: Vec<(StateId, Probability)>,
}

/// Incremental construction of a [`Cmdp`]. States are declared first so
/// actions may refer to states declared later.
pub struct CmdpBuilder {
    capacity: u64,
    states: Vec<StateInfo>,
    actions: Vec<Vec<PendingAction>>,
}

impl CmdpBuilder {
    pub fn new(capacity: u64) -> Self {
        CmdpBuilder { capacity, states: Vec::new(), actions: Vec::new() }
    }

    pub fn add_state(&mut self, name: impl Into<String>, reload: bool) -> StateId {
        self.states.push(StateInfo { name: name.into(), reload });
        self.actions.push(Vec::new());
        self.states.len() - 1
    }

    /// Adds an action to `state`. Zero-probability entries are dropped.
    pub fn add_action(
        &mut self,
        state: StateId,
        name: impl Into<String>,
        consumption: u64,
        successors: impl IntoIterator<Item = (StateId, Probability)>,
    ) -> &mut Self {
        self.actions[state].push(PendingAction {
            name: name.into(),
            consumption,
            successors: successors.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        });
        self
    }

    /// Shorthand for an action with a single successor.
    pub fn add_move(
        &mut self,
        state: StateId,
        name: impl Into<String>,
        consumption: u64,
        target: StateId,
    ) -> &mut Self {
        self.add_action(state, name, consumption, [(target, Probability::ONE)])
    }

    pub fn build(self) -> Result<Cmdp, ModelError> {
        let n = self.states.len();
        let mut names = HashMap::with_capacity(n);
        for (id, info) in self.states.iter().enumerate() {
            if names.insert(info.name.clone(), id).is_some() {
                return Err(ModelError::DuplicateState(info.name.clone()));
            }
        }
        let mut actions = Vec::new();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for (state, pending) in self.actions.into_iter().enumerate() {
            let first = actions.len();
            for action in pending {
                let state_name = &self.states[state].name;
                if actions[first..].iter().any(|a: &Action| a.name == action.name) {
                    return Err(ModelError::DuplicateAction { state: state_name.clone(), action: action.name });
                }
                let mut successors: Vec<Transition> = Vec::with_capacity(action.successors.len());
                for (target, probability) in action.successors {
                    if target >= n {
                        return Err(ModelError::StateOutOfRange(target));
                    }
                    if successors.iter().any(|t| t.target == target) {
                        return Err(ModelError::DuplicateSuccessor {
                            state: state_name.clone(),
                            action: action.name,
                            target: self.states[target].name.clone(),
                        });
                    }
                    successors.push(Transition { target, probability });
                }
                actions.push(Action { state, name: action.name, consumption: action.consumption, successors });
            }
            offsets.push(actions.len());
        }
        Ok(Cmdp { capacity: self.capacity, states: self.states, actions, offsets, names })
    }
}

/// A single violated model invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    ZeroCapacity,
    NoActions {
        state: String,
    },
    NonPositiveProbability {
        state: String,
        action: String,
        target: String,
    },
    DistributionSum {
        state: String,
        action: String,
        sum: f64,
    },
    /// States of a cycle whose every step can be taken with zero consumption;
    /// the first state is repeated at the end.
    ZeroConsumptionCycle {
        cycle: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroCapacity => f.write_str("capacity must be positive"),
            Violation::NoActions { state } => write!(f, "state `{state}` has no actions"),
            Violation::NonPositiveProbability { state, action, target } => {
                write!(f, "non-positive probability: action `{action}` of `{state}` to `{target}`")
            }
            Violation::DistributionSum { state, action, sum } => {
                write!(f, "distribution sum: action `{action}` of `{state}` sums to {sum}")
            }
            Violation::ZeroConsumptionCycle { cycle } => {
                write!(f, "zero-consumption cycle: {}", cycle.join(" -> "))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant and lists all violations.
pub fn validate(model: &Cmdp) -> ValidationReport {
    let mut violations = Vec::new();
    if model.capacity == 0 {
        violations.push(Violation::ZeroCapacity);
    }
    for s in model.states() {
        if model.actions_of(s).is_empty() {
            violations.push(Violation::NoActions { state: model.state_name(s).to_string() });
        }
    }
    for action in &model.actions {
        let state = model.state_name(action.state).to_string();
        let mut positive = true;
        for t in &action.successors {
            if t.probability.value().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                positive = false;
                violations.push(Violation::NonPositiveProbability {
                    state: state.clone(),
                    action: action.name.clone(),
                    target: model.state_name(t.target).to_string(),
                });
            }
        }
        if positive && !distribution_sums_to_one(&action.successors) {
            violations.push(Violation::DistributionSum {
                state,
                action: action.name.clone(),
                sum: action.successors.iter().map(|t| t.probability.value()).sum(),
            });
        }
    }
    if let Some(cycle) = zero_consumption_cycle(model) {
        violations.push(Violation::ZeroConsumptionCycle {
            cycle: cycle.iter().map(|&s| model.state_name(s).to_string()).collect(),
        });
    }
    ValidationReport { violations }
}

fn distribution_sums_to_one(successors: &[Transition]) -> bool {
    let mut exact = Some(Ratio::<u128>::zero());
    for t in successors {
        exact = match (exact, t.probability.exact()) {
            (Some(acc), Some(p)) => acc.checked_add(&Ratio::new_raw(*p.numer() as u128, *p.denom() as u128)),
            _ => None,
        };
    }
    match exact {
        Some(sum) => sum.is_one(),
        None => {
            let sum: f64 = successors.iter().map(|t| t.probability.value()).sum();
            (sum - 1.0).abs() <= DISTRIBUTION_TOLERANCE
        }
    }
}

/// Finds a cycle in the graph of zero-consumption transitions, if any.
pub fn zero_consumption_cycle(model: &Cmdp) -> Option<Vec<StateId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let successors = |s: StateId| {
        model
            .actions_of(s)
            .map(move |a| &model.actions[a])
            .filter(|a| a.consumption == 0)
            .flat_map(|a| a.successors.iter().map(|t| t.target))
    };
    let mut mark = vec![Mark::New; model.num_states()];
    for root in model.states() {
        if mark[root] != Mark::New {
            continue;
        }
        // explicit stack of (state, remaining successors)
        let mut stack: Vec<(StateId, Vec<StateId>)> = vec![(root, successors(root).collect())];
        mark[root] = Mark::Open;
        while let Some((state, pending)) = stack.last_mut() {
            let state = *state;
            match pending.pop() {
                Some(next) => match mark[next] {
                    Mark::New => {
                        mark[next] = Mark::Open;
                        stack.push((next, successors(next).collect()));
                    }
                    Mark::Open => {
                        let start = stack.iter().position(|(s, _)| *s == next).unwrap();
                        let mut cycle: Vec<StateId> = stack[start..].iter().map(|(s, _)| *s).collect();
                        cycle.push(next);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                },
                None => {
                    mark[state] = Mark::Done;
                    stack.pop();
                }
            }
        }
    }
    None
}
