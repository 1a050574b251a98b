//! Rules, rule selectors and the finite counter strategies they encode.
//!
//! A [`Rule`] maps border levels to actions; the action for a resource level
//! `l` is the one stored at the largest border level `<= l`. A
//! [`RuleSelector`] holds one rule per state. Together with a counter that
//! tracks the current resource level it forms a [`CounterStrategy`].

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ActionId, Cmdp, StateId};
use crate::resource::next_level;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("action {action} is not available in state `{state}`")]
    ActionUnavailable { state: String, action: String },
    #[error("border level {level} exceeds capacity {capacity}")]
    LevelAboveCapacity { level: u64, capacity: u64 },
    #[error("resource exhausted")]
    Exhausted,
    #[error("unknown state `{0}` in strategy")]
    UnknownState(String),
    #[error("border levels of state `{0}` are not strictly increasing")]
    Unsorted(String),
    #[error("malformed strategy JSON: {0}")]
    Json(String),
}

/// The outcome of a rule lookup. `defined` is false when the level lies below
/// every border level and the state's fallback action was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub action: ActionId,
    pub defined: bool,
}

/// Border levels with their actions, sorted by level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rule {
    entries: Vec<(u64, ActionId)>,
}

impl Rule {
    pub fn new() -> Self {
        Rule::default()
    }

    /// Builds a rule from `(level, action)` pairs; later pairs overwrite
    /// earlier ones at the same level.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, ActionId)>) -> Self {
        let mut rule = Rule::new();
        for (level, action) in pairs {
            rule.insert(level, action);
        }
        rule
    }

    /// Adds or overwrites the action at `level`.
    pub fn insert(&mut self, level: u64, action: ActionId) {
        match self.entries.binary_search_by_key(&level, |&(l, _)| l) {
            Ok(i) => self.entries[i].1 = action,
            Err(i) => self.entries.insert(i, (level, action)),
        }
    }

    /// The action for `level`, or `None` below the lowest border level.
    pub fn lookup(&self, level: u64) -> Option<ActionId> {
        let i = self.entries.partition_point(|&(l, _)| l <= level);
        i.checked_sub(1).map(|i| self.entries[i].1)
    }

    /// Selection with a fallback for levels below every border level.
    pub fn select(&self, level: u64, fallback: ActionId) -> Selection {
        match self.lookup(level) {
            Some(action) => Selection { action, defined: true },
            None => Selection { action: fallback, defined: false },
        }
    }

    pub fn entries(&self) -> &[(u64, ActionId)] {
        &self.entries
    }

    pub fn border_levels(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|&(l, _)| l)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One rule per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleSelector {
    rules: Vec<Rule>,
}

impl RuleSelector {
    /// A selector with an empty rule in each of `num_states` states.
    pub fn empty(num_states: usize) -> Self {
        RuleSelector { rules: vec![Rule::new(); num_states] }
    }

    pub fn rule(&self, state: StateId) -> &Rule {
        &self.rules[state]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Adds a border level, checking the action belongs to `state`.
    pub fn insert(&mut self, model: &Cmdp, state: StateId, level: u64, action: ActionId) -> Result<(), StrategyError> {
        if !model.actions_of(state).contains(&action) {
            return Err(StrategyError::ActionUnavailable {
                state: model.state_name(state).to_string(),
                action: action.to_string(),
            });
        }
        if level > model.capacity() {
            return Err(StrategyError::LevelAboveCapacity { level, capacity: model.capacity() });
        }
        self.rules[state].insert(level, action);
        Ok(())
    }

    /// Unchecked insertion for solver code that already knows the action is
    /// available and the level is within capacity.
    pub(crate) fn set(&mut self, state: StateId, level: u64, action: ActionId) {
        self.rules[state].insert(level, action);
    }

    pub(crate) fn set_rule(&mut self, state: StateId, rule: Rule) {
        self.rules[state] = rule;
    }

    /// Selection in `state` at `level`. The fallback below all border levels is
    /// the first action of the state.
    pub fn select(&self, model: &Cmdp, state: StateId, level: u64) -> Selection {
        self.rules[state].select(level, model.actions_of(state).start)
    }

    pub fn total_border_levels(&self) -> usize {
        self.rules.iter().map(Rule::len).sum()
    }

    /// Serializes to `{"states": {"<state>": [[level, "action"], ...]}}` with
    /// states in model order.
    pub fn to_json(&self, model: &Cmdp) -> String {
        let doc = StrategyDocument {
            states: model
                .states()
                .map(|s| {
                    let rule =
                        self.rules[s].entries().iter().map(|&(l, a)| (l, model.action(a).name.clone())).collect();
                    (model.state_name(s).to_string(), rule)
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("strategy serializes")
    }

    /// Parses the JSON form produced by [`RuleSelector::to_json`]. States
    /// missing from the document get an empty rule.
    pub fn from_json(model: &Cmdp, text: &str) -> Result<Self, StrategyError> {
        let doc: StrategyDocument = serde_json::from_str(text).map_err(|e| StrategyError::Json(e.to_string()))?;
        let mut selector = RuleSelector::empty(model.num_states());
        for (name, entries) in doc.states {
            let state = model.state_by_name(&name).ok_or_else(|| StrategyError::UnknownState(name.clone()))?;
            if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(StrategyError::Unsorted(name));
            }
            for (level, action_name) in entries {
                let action = model.action_by_name(state, &action_name).ok_or_else(|| {
                    StrategyError::ActionUnavailable { state: name.clone(), action: action_name.clone() }
                })?;
                selector.insert(model, state, level, action)?;
            }
        }
        Ok(selector)
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyDocument {
    states: IndexMap<String, Vec<(u64, String)>>,
}

/// One fixed action per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorylessStrategy {
    actions: Vec<ActionId>,
}

impl MemorylessStrategy {
    pub fn new(actions: Vec<ActionId>) -> Self {
        MemorylessStrategy { actions }
    }

    pub fn action(&self, state: StateId) -> ActionId {
        self.actions[state]
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    /// The equivalent selector: each state plays its action from level 0.
    pub fn to_selector(&self) -> RuleSelector {
        RuleSelector { rules: self.actions.iter().map(|&a| Rule::from_pairs([(0, a)])).collect() }
    }
}

/// A rule selector driven by a resource counter.
///
/// The counter holds the resource level of the history played so far and is
/// advanced explicitly through [`CounterStrategy::step`].
#[derive(Clone, Debug)]
pub struct CounterStrategy<'a> {
    model: &'a Cmdp,
    selector: &'a RuleSelector,
    counter: Option<u64>,
}

impl<'a> CounterStrategy<'a> {
    /// A strategy whose counter starts at `load`.
    pub fn new(model: &'a Cmdp, selector: &'a RuleSelector, load: u64) -> Self {
        CounterStrategy { model, selector, counter: Some(load) }
    }

    /// Current counter value; `None` once depleted.
    pub fn counter(&self) -> Option<u64> {
        self.counter
    }

    pub fn reset(&mut self, load: u64) {
        self.counter = Some(load);
    }

    /// The action to play in `state` at the current counter value.
    pub fn next(&self, state: StateId) -> Result<Selection, StrategyError> {
        let level = self.counter.ok_or(StrategyError::Exhausted)?;
        Ok(self.selector.select(self.model, state, level))
    }

    /// Advances the counter over the transition `state --action--> next`.
    pub fn step(&mut self, state: StateId, action: ActionId, _next: StateId) -> Option<u64> {
        self.counter = next_level(self.model, state, action, self.counter);
        self.counter
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::resource::{resource_levels, LoadedPath};

    const A: ActionId = 10;
    const B: ActionId = 11;

    #[test]
    fn interval_selection() {
        let rule = Rule::from_pairs([(0, A), (10, B)]);
        assert_eq!(rule.select(9, 99), Selection { action: A, defined: true });
        assert_eq!(rule.select(10, 99), Selection { action: B, defined: true });
        assert_eq!(rule.select(20, 99), Selection { action: B, defined: true });
        let rule = Rule::from_pairs([(5, A)]);
        assert_eq!(rule.select(3, 99), Selection { action: 99, defined: false });
        assert_eq!(Rule::new().select(0, 99), Selection { action: 99, defined: false });
    }

    #[test]
    fn insert_keeps_levels_sorted_and_overwrites() {
        let mut rule = Rule::new();
        rule.insert(0, A);
        assert_eq!(rule.entries(), &[(0, A)]);
        rule.insert(10, B);
        assert_eq!(rule.entries(), &[(0, A), (10, B)]);
        rule.insert(10, A);
        assert_eq!(rule.entries(), &[(0, A), (10, A)]);
        rule.insert(4, B);
        assert_eq!(rule.entries(), &[(0, A), (4, B), (10, A)]);
    }

    fn detour_selector(model: &Cmdp) -> RuleSelector {
        let mut sel = RuleSelector::empty(model.num_states());
        for s in model.states() {
            let a = model.action_by_name(s, "a").unwrap();
            sel.insert(model, s, 0, a).unwrap();
        }
        let s = model.state_by_name("s").unwrap();
        sel.insert(model, s, 10, model.action_by_name(s, "b").unwrap()).unwrap();
        sel
    }

    #[test]
    fn counter_strategy_follows_rules() {
        let m = examples::detour();
        let sel = detour_selector(&m);
        let s = m.state_by_name("s").unwrap();
        let t = m.state_by_name("t").unwrap();
        let (a, b) = (m.action_by_name(s, "a").unwrap(), m.action_by_name(s, "b").unwrap());
        assert_eq!(CounterStrategy::new(&m, &sel, 2).next(s).unwrap().action, a);
        assert_eq!(CounterStrategy::new(&m, &sel, 15).next(s).unwrap().action, b);
        assert_eq!(CounterStrategy::new(&m, &sel, 0).next(t).unwrap().action, m.action_by_name(t, "a").unwrap());
    }

    #[test]
    fn counter_steps_apply_the_recurrence() {
        let m = examples::detour();
        let sel = detour_selector(&m);
        let s = m.state_by_name("s").unwrap();
        let r = m.state_by_name("r").unwrap();
        let u = m.state_by_name("u").unwrap();
        let sa = m.action_by_name(s, "a").unwrap();
        let sb = m.action_by_name(s, "b").unwrap();
        let ra = m.action_by_name(r, "a").unwrap();

        let mut strat = CounterStrategy::new(&m, &sel, 2);
        assert_eq!(strat.step(s, sa, r), Some(0));
        assert_eq!(strat.step(r, ra, s), Some(19));

        let mut strat = CounterStrategy::new(&m, &sel, 4);
        assert_eq!(strat.step(s, sb, u), None);
        assert_eq!(strat.next(u), Err(StrategyError::Exhausted));
    }

    #[test]
    fn counter_matches_resource_levels() {
        let m = examples::detour();
        let sel = detour_selector(&m);
        let names = ["s", "b", "u", "a", "v", "a", "s", "a", "r", "b", "s", "b", "t", "a", "t"];
        let path = LoadedPath::from_names(&m, 17, &names).unwrap();
        let trace = resource_levels(&m, &path).unwrap();
        let mut strat = CounterStrategy::new(&m, &sel, 17);
        for (i, (&state, &action)) in path.states.iter().zip(&path.actions).enumerate() {
            let counter = strat.step(state, action, path.states[i + 1]);
            assert_eq!(counter, trace.0[i + 1]);
        }
    }

    #[test]
    fn selector_insert_rejects_foreign_actions() {
        let m = examples::detour();
        let s = m.state_by_name("s").unwrap();
        let t = m.state_by_name("t").unwrap();
        let mut sel = RuleSelector::empty(m.num_states());
        let ta = m.action_by_name(t, "a").unwrap();
        assert!(matches!(sel.insert(&m, s, 0, ta), Err(StrategyError::ActionUnavailable { .. })));
        assert!(matches!(sel.insert(&m, t, 21, ta), Err(StrategyError::LevelAboveCapacity { .. })));
    }

    #[test]
    fn json_form() {
        let m = examples::detour();
        let sel = detour_selector(&m);
        let text = sel.to_json(&m);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["states"]["s"], serde_json::json!([[0, "a"], [10, "b"]]));
        let back = RuleSelector::from_json(&m, &text).unwrap();
        assert_eq!(back, sel);
        assert_eq!(back.to_json(&m), text);
    }

    #[test]
    fn json_rejects_bad_documents() {
        let m = examples::detour();
        assert!(matches!(
            RuleSelector::from_json(&m, r#"{"states": {"zz": []}}"#),
            Err(StrategyError::UnknownState(_))
        ));
        assert!(matches!(
            RuleSelector::from_json(&m, r#"{"states": {"s": [[3, "a"], [1, "b"]]}}"#),
            Err(StrategyError::Unsorted(_))
        ));
        assert!(matches!(
            RuleSelector::from_json(&m, r#"{"states": {"s": [[3, "c"]]}}"#),
            Err(StrategyError::ActionUnavailable { .. })
        ));
        assert!(matches!(RuleSelector::from_json(&m, "{"), Err(StrategyError::Json(_))));
    }
}
