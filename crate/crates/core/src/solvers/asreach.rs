//! Almost-sure reachability, directly with sink vectors and through the sink
//! product with the Büchi solver.

use crate::level::{Level, LevelVector};
use crate::model::{Cmdp, CmdpBuilder, StateId};
use crate::strategy::RuleSelector;

use super::buchi::buchi;
use super::posreach::Descent;
use super::reach::min_init_cons_masked;
use super::safety::{min_safe_action, min_safe_selector, safety_on};
use super::values::action_value_by;
use super::{target_mask, HeuristicMode, Round, SolveError, SynthesisResult};

/// Minimal loads to surely reach `x` or a finite entry `t` of `sink` with at
/// least `sink(t)` units left, never passing a reload on the way. Finite
/// entries of `sink` are pinned to their value.
///
/// With an all-infinite `sink` this is [`super::min_init_cons`] on `x`.
pub fn modified_min_init_cons(model: &Cmdp, sink: &LevelVector, x: &[StateId]) -> LevelVector {
    pinned_min_init_cons(model, sink, &model.mask(x)).0
}

fn pinned_min_init_cons(model: &Cmdp, sink: &LevelVector, x: &[bool]) -> (LevelVector, usize) {
    if sink.iter().all(|l| !l.is_finite()) {
        return min_init_cons_masked(model, x);
    }
    let mut v = LevelVector::infinite(model.num_states());
    let mut iterations = 0;
    loop {
        let old = v.clone();
        let value = |t: StateId| if x[t] { Level::ZERO } else { old[t] };
        for s in model.states() {
            if sink[s].is_finite() {
                v[s] = sink[s];
                continue;
            }
            let c = model.actions_of(s).map(|a| action_value_by(model, a, value)).min().unwrap_or(Level::Infinite);
            if c < v[s] {
                v[s] = c;
            }
        }
        if v == old {
            return (v, iterations);
        }
        iterations += 1;
    }
}

/// Safety values of the sink-augmented model restricted to reloads `reload`,
/// projected to the original states.
fn sink_safety(model: &Cmdp, reload: &[bool], sink: &LevelVector) -> LevelVector {
    let cap = model.capacity();
    let mut reload = reload.to_vec();
    loop {
        let (mut n, _) = pinned_min_init_cons(model, sink, &reload);
        let mut unusable = false;
        for s in model.states() {
            if reload[s] && !n[s].within(cap) {
                reload[s] = false;
                unusable = true;
            }
        }
        if !unusable {
            n.truncate(cap, &reload);
            return n;
        }
    }
}

/// Minimal loads to safely reach a target with probability 1, computed on
/// the model itself, and a witness selector.
pub fn almost_sure_reach_direct(
    model: &Cmdp,
    targets: &[StateId],
    mode: HeuristicMode,
) -> Result<SynthesisResult, SolveError> {
    mode.validate()?;
    let mask = target_mask(model, targets)?;
    let cap = model.capacity();
    let safety = safety_on(model, &model.reload_mask()).vector;
    let sink: LevelVector = model.states().map(|s| if mask[s] { safety[s] } else { Level::Infinite }).collect();
    let mut reload = model.reload_mask();
    let mut rounds = Vec::new();
    loop {
        let mut selector = min_safe_selector(model, &safety);
        let mut p = sink.clone();
        let survival = sink_safety(model, &reload, &sink);
        let descent = Descent { model, survival: &survival, targets: &mask, reload: &reload, mode };
        let iterations = descent.run(&mut p, &mut selector, None);
        rounds.push(Round { reloads: reload.iter().filter(|&&r| r).count(), iterations });
        let mut unusable = false;
        for s in model.states() {
            if reload[s] && !p[s].within(cap) {
                reload[s] = false;
                unusable = true;
            }
        }
        if !unusable {
            return Ok(SynthesisResult {
                vector: p,
                selector,
                iterations: rounds.iter().map(|r| r.iterations).sum(),
                rounds,
            });
        }
    }
}

/// The sink-augmented model: every action of a target leads to a fresh
/// absorbing reload state and consumes the target's safety value (capacity
/// plus one where that value is infinite). Returns the model and the sink.
///
/// States and actions of the original model keep their indices.
pub fn sink_product(model: &Cmdp, targets: &[StateId]) -> Result<(Cmdp, StateId), SolveError> {
    let mask = target_mask(model, targets)?;
    let cap = model.capacity();
    let safety = safety_on(model, &model.reload_mask()).vector;
    let mut b = CmdpBuilder::new(cap);
    for s in model.states() {
        b.add_state(model.state_name(s), model.is_reload(s));
    }
    let mut name = String::from("sink");
    while model.state_by_name(&name).is_some() {
        name.push('\'');
    }
    let sink = b.add_state(name, true);
    for s in model.states() {
        for a in model.actions_of(s) {
            let act = model.action(a);
            if mask[s] {
                let cost = safety[s].finite().unwrap_or(cap + 1);
                b.add_move(s, act.name.clone(), cost, sink);
            } else {
                b.add_action(
                    s,
                    act.name.clone(),
                    act.consumption,
                    act.successors.iter().map(|t| (t.target, t.probability)),
                );
            }
        }
    }
    b.add_move(sink, "loop", 1, sink);
    let product = b.build().expect("the product of a built model is well-formed");
    Ok((product, sink))
}

/// Almost-sure reachability through the Büchi solver on [`sink_product`].
/// On targets the selector plays the original model's min-safe actions.
pub fn almost_sure_reach_product(
    model: &Cmdp,
    targets: &[StateId],
    mode: HeuristicMode,
) -> Result<SynthesisResult, SolveError> {
    mode.validate()?;
    let (product, sink) = sink_product(model, targets)?;
    let mask = model.mask(targets);
    let res = buchi(&product, &[sink], mode)?;
    let safety = safety_on(model, &model.reload_mask()).vector;
    let mut selector = RuleSelector::empty(model.num_states());
    for s in model.states() {
        if !mask[s] {
            // after a target is visited only safety matters, and play may
            // arrive at levels the product strategy never reaches
            let mut rule = res.selector.rule(s).clone();
            if let Level::Finite(level) = safety[s] {
                if rule.lookup(level).is_none() {
                    rule.insert(level, min_safe_action(model, &safety, s));
                }
            }
            selector.set_rule(s, rule);
        } else if let Level::Finite(level) = safety[s] {
            selector.set(s, level, min_safe_action(model, &safety, s));
        }
    }
    Ok(SynthesisResult {
        vector: res.vector.iter().take(model.num_states()).copied().collect(),
        selector,
        iterations: res.iterations,
        rounds: res.rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::level::Level::{Finite as F, Infinite as INF};
    use crate::solvers::min_init_cons;

    fn both(model: &Cmdp, target: &str, mode: HeuristicMode) -> LevelVector {
        let t = model.state_by_name(target).unwrap();
        let direct = almost_sure_reach_direct(model, &[t], mode).unwrap();
        let product = almost_sure_reach_product(model, &[t], mode).unwrap();
        assert_eq!(direct.vector, product.vector);
        direct.vector
    }

    #[test]
    fn two_route_models() {
        let expected = [F(2), F(0), F(1), F(0), F(0)];
        assert_eq!(both(&examples::goal_leaning(), "t", HeuristicMode::Standard).as_slice(), &expected);
        let expected = [F(1), F(0), F(1), F(0), F(0)];
        assert_eq!(both(&examples::threshold(), "t", HeuristicMode::Standard).as_slice(), &expected);
        assert_eq!(both(&examples::threshold(), "t", HeuristicMode::Threshold(0.2)).as_slice(), &expected);
    }

    #[test]
    fn leaning_limit_values() {
        let m = examples::leaning_limit();
        assert_eq!(both(&m, "t", HeuristicMode::GoalLeaning).as_slice(), &[F(0), F(0), F(1), F(1)]);
    }

    #[test]
    fn threshold_selector_plays_a_from_two() {
        let m = examples::threshold();
        let s = m.state_by_name("s").unwrap();
        let t = m.state_by_name("t").unwrap();
        let a = m.action_by_name(s, "a").unwrap();
        let b = m.action_by_name(s, "b").unwrap();
        let res = almost_sure_reach_direct(&m, &[t], HeuristicMode::Threshold(0.2)).unwrap();
        assert_eq!(res.selector.rule(s).lookup(1), Some(b));
        assert_eq!(res.selector.rule(s).lookup(2), Some(a));
        assert_eq!(res.selector.rule(s).lookup(3), Some(a));
    }

    #[test]
    fn infinite_sink_vector_is_plain_min_init_cons() {
        let m = examples::reload_chain();
        let none = LevelVector::infinite(m.num_states());
        let reloads = m.reload_states();
        assert_eq!(modified_min_init_cons(&m, &none, &reloads), min_init_cons(&m, &reloads).unwrap());
    }

    #[test]
    fn pinned_entries_keep_their_value() {
        let m = examples::goal_leaning();
        let mut sink = LevelVector::infinite(m.num_states());
        let t = m.state_by_name("t").unwrap();
        sink[t] = F(0);
        let x = modified_min_init_cons(&m, &sink, &m.reload_states());
        assert_eq!(x[t], F(0));
        let u = m.state_by_name("u").unwrap();
        assert_eq!(x[u], F(1));
    }

    #[test]
    fn product_shape() {
        let m = examples::goal_leaning();
        let t = m.state_by_name("t").unwrap();
        let (p, sink) = sink_product(&m, &[t]).unwrap();
        assert_eq!(p.num_states(), m.num_states() + 1);
        assert!(p.is_reload(sink));
        for a in p.actions_of(t) {
            assert_eq!(p.action(a).successors.len(), 1);
            assert_eq!(p.action(a).successors[0].target, sink);
            assert_eq!(p.action(a).consumption, 0);
        }
        assert_eq!(p.state_name(sink), "sink");
    }

    #[test]
    fn product_selector_stays_safe_after_the_target() {
        use crate::env::{random_cmdp, RandomSpec};
        use crate::sim::{audit_safety, AuditConfig};
        for seed in 10_000..10_020 {
            let (m, targets) = random_cmdp(seed, &RandomSpec::default());
            let res = almost_sure_reach_product(&m, &targets, HeuristicMode::Standard).unwrap();
            let cfg = AuditConfig { episodes_per_state: 5, steps_per_episode: 300, seed };
            let report = audit_safety(&m, &res.vector, &res.selector, &targets, &cfg);
            assert!(report.is_clean(), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn unreachable_target_is_infinite() {
        let m = examples::reload_chain();
        let v = both(&m, "y", HeuristicMode::Standard);
        assert!(v.iter().all(|&l| l == INF));
    }
}
