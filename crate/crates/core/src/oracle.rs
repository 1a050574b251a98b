//! Brute-force ground truth on the explicit product of a CMDP with its
//! resource levels.
//!
//! Product state `(s, l)` has index `s * (cap + 1) + l`; one extra absorbing
//! state stands for depletion. The objectives are solved with plain
//! set-based fixpoints over this ordinary MDP and never call the solvers.

use std::collections::VecDeque;

use thiserror::Error;

use crate::level::{Level, LevelVector};
use crate::model::{ActionId, Cmdp, StateId};

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("explicit product would have {states} states, limit is {limit}")]
    TooLarge { states: usize, limit: usize },
}

/// An MDP over (state, level) pairs plus a dead state, stored in compressed
/// rows. Only supports of distributions are kept.
#[derive(Clone, Debug)]
pub struct ExplicitMdp {
    cmdp_states: usize,
    levels: usize,
    // actions of product state q: action_start[q]..action_start[q + 1]
    action_start: Vec<usize>,
    origin: Vec<Option<ActionId>>,
    // successors of product action k: succ_start[k]..succ_start[k + 1]
    succ_start: Vec<usize>,
    succ: Vec<usize>,
}

/// Which objective [`almost_sure`] solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlmostSureKind {
    Reach,
    Buchi,
}

pub fn encode(model: &Cmdp) -> Result<ExplicitMdp, OracleError> {
    encode_with_limit(model, DEFAULT_STATE_LIMIT)
}

/// Builds the product, refusing when `|S| * (cap + 1)` exceeds `limit`.
pub fn encode_with_limit(model: &Cmdp, limit: usize) -> Result<ExplicitMdp, OracleError> {
    let cap = model.capacity();
    let levels = usize::try_from(cap).ok().and_then(|c| c.checked_add(1)).unwrap_or(usize::MAX);
    let states = model.num_states().saturating_mul(levels);
    if states > limit {
        return Err(OracleError::TooLarge { states, limit });
    }
    let dead = states;
    let mut mdp = ExplicitMdp {
        cmdp_states: model.num_states(),
        levels,
        action_start: Vec::with_capacity(states + 2),
        origin: Vec::new(),
        succ_start: vec![0],
        succ: Vec::new(),
    };
    for s in model.states() {
        for l in 0..=cap {
            mdp.action_start.push(mdp.origin.len());
            for a in model.actions_of(s) {
                let act = model.action(a);
                let budget = if model.is_reload(s) { cap } else { l };
                match budget.checked_sub(act.consumption) {
                    Some(next) => {
                        for t in &act.successors {
                            mdp.succ.push(t.target * levels + next as usize);
                        }
                    }
                    None => mdp.succ.push(dead),
                }
                mdp.origin.push(Some(a));
                mdp.succ_start.push(mdp.succ.len());
            }
        }
    }
    mdp.action_start.push(mdp.origin.len());
    mdp.origin.push(None);
    mdp.succ.push(dead);
    mdp.succ_start.push(mdp.succ.len());
    mdp.action_start.push(mdp.origin.len());
    Ok(mdp)
}

impl ExplicitMdp {
    /// Number of product states including the dead state.
    pub fn num_states(&self) -> usize {
        self.action_start.len() - 1
    }

    pub fn dead(&self) -> usize {
        self.num_states() - 1
    }

    pub fn index(&self, state: StateId, level: u64) -> usize {
        state * self.levels + level as usize
    }

    /// The CMDP state and level of a product state; `None` for the dead state.
    pub fn decode(&self, q: usize) -> Option<(StateId, u64)> {
        (q != self.dead()).then(|| (q / self.levels, (q % self.levels) as u64))
    }

    fn actions(&self, q: usize) -> std::ops::Range<usize> {
        self.action_start[q]..self.action_start[q + 1]
    }

    fn successors(&self, k: usize) -> &[usize] {
        &self.succ[self.succ_start[k]..self.succ_start[k + 1]]
    }

    fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.origin.len()];
        for q in 0..self.num_states() {
            for k in self.actions(q) {
                owner[k] = q;
            }
        }
        owner
    }

    // product actions having q among their successors, once per occurrence
    fn predecessors(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.num_states();
        let mut start = vec![0usize; n + 1];
        for &z in &self.succ {
            start[z + 1] += 1;
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut pred = vec![0; self.succ.len()];
        for k in 0..self.origin.len() {
            for &z in self.successors(k) {
                pred[fill[z]] = k;
                fill[z] += 1;
            }
        }
        (start, pred)
    }

    /// The product state reached from `q` by playing `action` and moving to
    /// `next`, following the level recurrence.
    pub fn step(&self, q: usize, action: ActionId, next: StateId) -> Option<usize> {
        let k = self.actions(q).find(|&k| self.origin[k] == Some(action))?;
        let succ = self.successors(k);
        if succ == [self.dead()] {
            return Some(self.dead());
        }
        succ.iter().copied().find(|&z| z / self.levels == next)
    }

    fn cmdp_state(&self, q: usize) -> Option<StateId> {
        self.decode(q).map(|(s, _)| s)
    }
}

/// Marks, for a candidate set `inside`, the product actions whose whole
/// support lies inside, and returns for each state how many such actions it
/// has. States leaving `inside` are propagated until the set is closed.
fn closed_core(mdp: &ExplicitMdp, mut inside: Vec<bool>) -> (Vec<bool>, Vec<bool>) {
    let owner = mdp.owners();
    let (pstart, pred) = mdp.predecessors();
    let mut good = vec![true; mdp.origin.len()];
    let mut count = vec![0usize; mdp.num_states()];
    let mut queue = VecDeque::new();
    for q in 0..mdp.num_states() {
        for k in mdp.actions(q) {
            if mdp.successors(k).iter().any(|&z| !inside[z]) {
                good[k] = false;
            } else {
                count[q] += 1;
            }
        }
        if inside[q] && count[q] == 0 {
            inside[q] = false;
            queue.push_back(q);
        }
    }
    while let Some(z) = queue.pop_front() {
        for &k in &pred[pstart[z]..pstart[z + 1]] {
            if good[k] {
                good[k] = false;
                let q = owner[k];
                count[q] -= 1;
                if inside[q] && count[q] == 0 {
                    inside[q] = false;
                    queue.push_back(q);
                }
            }
        }
    }
    (inside, good)
}

/// Product states from which depletion can be avoided forever.
pub fn sure_safety(mdp: &ExplicitMdp) -> Vec<bool> {
    let mut inside = vec![true; mdp.num_states()];
    inside[mdp.dead()] = false;
    closed_core(mdp, inside).0
}

/// Backward search inside `within` from `base`, using only `allowed` actions.
/// Returns the number of steps needed to reach `base`, if any.
fn distances(mdp: &ExplicitMdp, within: &[bool], allowed: &[bool], base: &[bool]) -> Vec<Option<usize>> {
    let owner = mdp.owners();
    let (pstart, pred) = mdp.predecessors();
    let mut dist = vec![None; mdp.num_states()];
    let mut queue = VecDeque::new();
    for q in 0..mdp.num_states() {
        if within[q] && base[q] {
            dist[q] = Some(0);
            queue.push_back(q);
        }
    }
    while let Some(z) = queue.pop_front() {
        let d = dist[z].unwrap();
        for &k in &pred[pstart[z]..pstart[z + 1]] {
            let q = owner[k];
            if allowed[k] && within[q] && dist[q].is_none() {
                dist[q] = Some(d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

fn target_states(mdp: &ExplicitMdp, targets: &[StateId]) -> Vec<bool> {
    let mut mask = vec![false; mdp.cmdp_states];
    for &t in targets {
        mask[t] = true;
    }
    (0..mdp.num_states()).map(|q| mdp.cmdp_state(q).is_some_and(|s| mask[s])).collect()
}

/// For every product state, the fewest steps after which a target can be
/// reached with positive probability while staying surely safe.
pub fn positive_reach_distances(mdp: &ExplicitMdp, targets: &[StateId]) -> Vec<Option<usize>> {
    let safe = sure_safety(mdp);
    let (safe, good) = closed_core(mdp, safe);
    distances(mdp, &safe, &good, &target_states(mdp, targets))
}

/// Product states that can reach a target with positive probability while
/// staying surely safe.
pub fn positive_reach(mdp: &ExplicitMdp, targets: &[StateId]) -> Vec<bool> {
    positive_reach_distances(mdp, targets).iter().map(Option::is_some).collect()
}

/// Product states winning the objective with probability 1 under sure
/// safety.
pub fn almost_sure(mdp: &ExplicitMdp, targets: &[StateId], kind: AlmostSureKind) -> Vec<bool> {
    let target = target_states(mdp, targets);
    let mut winning = sure_safety(mdp);
    loop {
        let (within, allowed) = closed_core(mdp, winning.clone());
        // a target counts for Büchi only if play can continue inside the set
        let base: Vec<bool> = match kind {
            AlmostSureKind::Reach => target.iter().zip(&winning).map(|(&t, &w)| t && w).collect(),
            AlmostSureKind::Buchi => target.iter().zip(&within).map(|(&t, &w)| t && w).collect(),
        };
        let next: Vec<bool> = distances(mdp, &winning, &allowed, &base).iter().map(Option::is_some).collect();
        // non-target states additionally need an action closed under the set
        let next: Vec<bool> = (0..mdp.num_states()).map(|q| next[q] && (base[q] || within[q])).collect();
        if next == winning {
            return winning;
        }
        winning = next;
    }
}

/// The least level of each CMDP state inside `set`.
pub fn min_levels(mdp: &ExplicitMdp, set: &[bool]) -> LevelVector {
    let mut v = LevelVector::infinite(mdp.cmdp_states);
    for (q, _) in set.iter().enumerate().filter(|(_, &inside)| inside) {
        if let Some((s, l)) = mdp.decode(q) {
            v[s] = v[s].min(Level::Finite(l));
        }
    }
    v
}

/// The least level of each state from which a target is reached within
/// `steps` steps, given the output of [`positive_reach_distances`].
pub fn bounded_min_levels(mdp: &ExplicitMdp, dist: &[Option<usize>], steps: usize) -> LevelVector {
    let set: Vec<bool> = dist.iter().map(|d| d.is_some_and(|d| d <= steps)).collect();
    min_levels(mdp, &set)
}

/// Minimal loads to surely reach a target without any reloading, by
/// enumeration over levels up to the longest possible simple path cost.
/// With `at_least_one_step` a target only counts once entered by a move.
pub fn sure_reach_without_reload(model: &Cmdp, targets: &[StateId], at_least_one_step: bool) -> LevelVector {
    let n = model.num_states();
    let max_cost = model.actions().iter().map(|a| a.consumption).max().unwrap_or(0);
    let bound = (n as u64 + 1) * max_cost;
    let levels = bound as usize + 1;
    let is_target = model.mask(targets);
    // win[s * levels + l]: target surely reached from s with l units
    let mut win = vec![false; n * levels];
    for s in model.states().filter(|&s| is_target[s]) {
        for l in 0..levels {
            win[s * levels + l] = true;
        }
    }
    let surely = |win: &[bool], s: StateId, l: u64| {
        model.actions_of(s).any(|a| {
            let act = model.action(a);
            l.checked_sub(act.consumption)
                .is_some_and(|rest| act.successors.iter().all(|t| win[t.target * levels + rest as usize]))
        })
    };
    loop {
        let mut changed = false;
        for s in model.states() {
            for l in 0..=bound {
                if !win[s * levels + l as usize] && surely(&win, s, l) {
                    win[s * levels + l as usize] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    model
        .states()
        .map(|s| {
            (0..=bound)
                .find(|&l| if at_least_one_step { surely(&win, s, l) } else { win[s * levels + l as usize] })
                .map_or(Level::Infinite, Level::Finite)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::level::Level::{Finite as F, Infinite as INF};
    use crate::model::CmdpBuilder;
    use crate::resource::{resource_levels, LoadedPath};

    #[test]
    fn product_size() {
        let m = examples::detour();
        let p = encode(&m).unwrap();
        assert_eq!(p.num_states(), 5 * 21 + 1);
        assert!(matches!(encode_with_limit(&m, 100), Err(OracleError::TooLarge { states: 105, limit: 100 })));
    }

    #[test]
    fn reload_transition_refills() {
        let m = examples::detour();
        let p = encode(&m).unwrap();
        let r = m.state_by_name("r").unwrap();
        let s = m.state_by_name("s").unwrap();
        let a = m.action_by_name(r, "a").unwrap();
        assert_eq!(p.step(p.index(r, 0), a, s), Some(p.index(s, 19)));
    }

    #[test]
    fn product_paths_follow_resource_levels() {
        let m = examples::detour();
        let p = encode(&m).unwrap();
        let names: Vec<&str> = "s b u a v a s b u a v a s b u".split(' ').collect();
        let path = LoadedPath::from_names(&m, 20, &names).unwrap();
        let trace = resource_levels(&m, &path).unwrap();
        let mut q = p.index(path.states[0], 20);
        for (i, (&state, &action)) in path.states.iter().zip(&path.actions).enumerate() {
            assert_eq!(p.decode(q).map(|(s, _)| s), Some(state));
            q = p.step(q, action, path.states[i + 1]).unwrap();
            match trace.0[i + 1] {
                Some(l) => assert_eq!(p.decode(q), Some((path.states[i + 1], l))),
                None => assert_eq!(q, p.dead()),
            }
        }
    }

    #[test]
    fn zero_capacity_keeps_only_free_actions() {
        let mut b = CmdpBuilder::new(0);
        let s = b.add_state("s", false);
        let t = b.add_state("t", false);
        b.add_move(s, "go", 0, t).add_move(s, "pay", 1, t).add_move(t, "a", 1, t);
        let m = b.build().unwrap();
        let p = encode(&m).unwrap();
        assert_eq!(p.num_states(), 3);
        let go = m.action_by_name(s, "go").unwrap();
        let pay = m.action_by_name(s, "pay").unwrap();
        assert_eq!(p.step(p.index(s, 0), go, t), Some(p.index(t, 0)));
        assert_eq!(p.step(p.index(s, 0), pay, t), Some(p.dead()));
    }

    #[test]
    fn detour_values() {
        let m = examples::detour();
        let p = encode(&m).unwrap();
        let expected = [F(2), F(0), F(0), F(5), F(4)];
        assert_eq!(min_levels(&p, &sure_safety(&p)).as_slice(), &expected);
        let t = m.state_by_name("t").unwrap();
        assert_eq!(min_levels(&p, &positive_reach(&p, &[t])).as_slice(), &expected);
        assert_eq!(min_levels(&p, &almost_sure(&p, &[t], AlmostSureKind::Buchi)).as_slice(), &expected);
        let dist = positive_reach_distances(&p, &[t]);
        assert_eq!(bounded_min_levels(&p, &dist, 1).as_slice(), &[F(10), F(0), INF, INF, INF]);
    }

    #[test]
    fn reload_chain_safety() {
        let m = examples::reload_chain();
        let p = encode(&m).unwrap();
        assert_eq!(min_levels(&p, &sure_safety(&p)).as_slice(), &[F(3), F(0), INF, INF, INF, INF]);
    }

    #[test]
    fn almost_sure_reach_on_two_route_models() {
        let m = examples::goal_leaning();
        let p = encode(&m).unwrap();
        let t = m.state_by_name("t").unwrap();
        assert_eq!(
            min_levels(&p, &almost_sure(&p, &[t], AlmostSureKind::Reach)).as_slice(),
            &[F(2), F(0), F(1), F(0), F(0)]
        );
        let m = examples::leaning_limit();
        let p = encode(&m).unwrap();
        assert_eq!(min_levels(&p, &almost_sure(&p, &[t], AlmostSureKind::Reach)).as_slice(), &[F(0), F(0), F(1), F(1)]);
    }

    #[test]
    fn no_reloads_nothing_safe() {
        let mut b = CmdpBuilder::new(4);
        let s = b.add_state("s", false);
        b.add_move(s, "a", 1, s);
        let p = encode(&b.build().unwrap()).unwrap();
        assert!(sure_safety(&p).iter().all(|&x| !x));
    }

    #[test]
    fn reaching_without_reload() {
        let m = examples::detour();
        let reloads = m.reload_states();
        assert_eq!(sure_reach_without_reload(&m, &reloads, false).as_slice(), &[F(2), F(0), F(0), F(5), F(4)]);
        assert_eq!(sure_reach_without_reload(&m, &reloads, true).as_slice(), &[F(2), F(1), F(3), F(5), F(4)]);
        let m = examples::reload_chain_without_w();
        assert_eq!(
            sure_reach_without_reload(&m, &m.reload_states(), true).as_slice(),
            &[F(3), F(1), INF, INF, INF, INF]
        );
    }
}
