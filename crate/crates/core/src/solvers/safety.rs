//! Safety: iterated pruning of unusable reloads, and safe actions.

use crate::level::{Level, LevelVector};
use crate::model::{ActionId, Cmdp, StateId};
use crate::strategy::RuleSelector;

use super::reach::min_init_cons_masked;
use super::values::action_value;
use super::{Round, SynthesisResult};

pub(crate) struct SafetyRun {
    pub vector: LevelVector,
    pub rounds: Vec<Round>,
}

/// Minimal loads for safety in the model with reload set `reload`.
pub(crate) fn safety_on(model: &Cmdp, reload: &[bool]) -> SafetyRun {
    let cap = model.capacity();
    let mut reload = reload.to_vec();
    let mut rounds = Vec::new();
    loop {
        let (mut n, iterations) = min_init_cons_masked(model, &reload);
        rounds.push(Round { reloads: reload.iter().filter(|&&r| r).count(), iterations });
        let mut unusable = false;
        for s in model.states() {
            if reload[s] && !n[s].within(cap) {
                reload[s] = false;
                unusable = true;
            }
        }
        if !unusable {
            n.truncate(cap, &reload);
            return SafetyRun { vector: n, rounds };
        }
    }
}

/// The minimal initial loads for safety with a selector of min-safe actions.
pub fn safety(model: &Cmdp) -> SynthesisResult {
    let run = safety_on(model, &model.reload_mask());
    let selector = min_safe_selector(model, &run.vector);
    SynthesisResult {
        iterations: run.rounds.iter().map(|r| r.iterations).sum(),
        vector: run.vector,
        selector,
        rounds: run.rounds,
    }
}

/// An action of `state` with the smallest action value under `safety`; the
/// first such action in state order.
pub fn min_safe_action(model: &Cmdp, safety: &LevelVector, state: StateId) -> ActionId {
    model.actions_of(state).min_by_key(|&a| action_value(model, safety, a)).expect("every state has an action")
}

/// Plays a min-safe action from each state's safety value upward. States
/// that cannot be kept safe get an empty rule.
pub(crate) fn min_safe_selector(model: &Cmdp, safety: &LevelVector) -> RuleSelector {
    let mut selector = RuleSelector::empty(model.num_states());
    for s in model.states() {
        if let Level::Finite(level) = safety[s] {
            selector.set(s, level, min_safe_action(model, safety, s));
        }
    }
    selector
}

/// Whether `action` is safe in `state` with `level` units given the safety
/// vector `safety`.
pub fn is_safe_action(model: &Cmdp, safety: &LevelVector, state: StateId, action: ActionId, level: u64) -> bool {
    let cap = model.capacity();
    let av = action_value(model, safety, action);
    av.within(level) || (model.is_reload(state) && av.within(cap)) || !safety[state].within(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::level::Level::{Finite as F, Infinite as INF};
    use crate::model::CmdpBuilder;

    #[test]
    fn detour_safety() {
        let m = examples::detour();
        let res = safety(&m);
        assert_eq!(res.vector.as_slice(), &[F(2), F(0), F(0), F(5), F(4)]);
        let s = m.state_by_name("s").unwrap();
        let a = m.action_by_name(s, "a").unwrap();
        assert_eq!(res.selector.rule(s).entries(), &[(2, a)]);
        assert_eq!(res.rounds.len(), 1);
    }

    #[test]
    fn reload_chain_prunes_in_three_rounds() {
        let m = examples::reload_chain();
        let res = safety(&m);
        assert_eq!(res.vector.as_slice(), &[F(3), F(0), INF, INF, INF, INF]);
        assert_eq!(res.rounds.iter().map(|r| r.reloads).collect::<Vec<_>>(), vec![4, 3, 1]);
        let y = m.state_by_name("y").unwrap();
        assert!(res.selector.rule(y).is_empty());
    }

    #[test]
    fn no_reloads_means_nothing_is_safe() {
        let mut b = CmdpBuilder::new(10);
        let s = b.add_state("s", false);
        let t = b.add_state("t", false);
        b.add_move(s, "a", 1, t).add_move(t, "a", 1, s);
        let res = safety(&b.build().unwrap());
        assert!(res.vector.iter().all(|&l| l == INF));
    }

    #[test]
    fn safe_actions() {
        let m = examples::detour();
        let ml = safety(&m).vector;
        let s = m.state_by_name("s").unwrap();
        let a = m.action_by_name(s, "a").unwrap();
        let b = m.action_by_name(s, "b").unwrap();
        assert!(is_safe_action(&m, &ml, s, a, 2));
        assert!(!is_safe_action(&m, &ml, s, b, 2));
        assert!(is_safe_action(&m, &ml, s, b, 10));

        let m = examples::reload_chain();
        let ml = safety(&m).vector;
        let y = m.state_by_name("y").unwrap();
        let ya = m.action_by_name(y, "a").unwrap();
        assert!((0..=m.capacity()).all(|l| is_safe_action(&m, &ml, y, ya, l)));
    }
}
