//! Positive reachability: iterating B from `y_T` with selector updates.

use crate::level::{Level, LevelVector};
use crate::model::{ActionId, Cmdp, StateId};
use crate::strategy::RuleSelector;

use super::safety::{min_safe_selector, safety_on};
use super::values::argmin;
use super::{target_mask, HeuristicMode, Round, SolveError, SynthesisResult};

/// The inner fixpoint shared by positive and almost-sure reachability.
pub(crate) struct Descent<'a> {
    pub model: &'a Cmdp,
    /// Values other successors must be able to survive with.
    pub survival: &'a LevelVector,
    pub targets: &'a [bool],
    /// States zeroed by capacity truncation.
    pub reload: &'a [bool],
    pub mode: HeuristicMode,
}

impl Descent<'_> {
    /// Runs the fixpoint from `p`, recording a border level whenever a state's
    /// value drops. Threshold mode first iterates with its θ and then
    /// continues from the result with θ = 0. Returns the number of
    /// applications that changed `p`.
    pub fn run(
        &self,
        p: &mut LevelVector,
        selector: &mut RuleSelector,
        mut trace: Option<&mut Vec<LevelVector>>,
    ) -> usize {
        let mut iterations = 0;
        if let HeuristicMode::Threshold(theta) = self.mode {
            iterations += self.phase(p, selector, theta, trace.as_deref_mut());
        }
        iterations + self.phase(p, selector, 0.0, trace)
    }

    fn phase(
        &self,
        p: &mut LevelVector,
        selector: &mut RuleSelector,
        theta: f64,
        mut trace: Option<&mut Vec<LevelVector>>,
    ) -> usize {
        let model = self.model;
        let mut chosen: Vec<ActionId> = vec![0; model.num_states()];
        let mut iterations = 0;
        loop {
            let old = p.clone();
            for s in model.states().filter(|&s| !self.targets[s]) {
                let (a, value) = argmin(model, self.survival, &old, s, self.mode, theta);
                chosen[s] = a;
                p[s] = value;
            }
            p.truncate(model.capacity(), self.reload);
            let mut changed = false;
            for s in model.states().filter(|&s| !self.targets[s]) {
                if p[s] < old[s] {
                    changed = true;
                    if let Level::Finite(level) = p[s] {
                        selector.set(s, level, chosen[s]);
                    }
                } else {
                    debug_assert_eq!(p[s], old[s], "fixpoint values never grow");
                }
            }
            if !changed {
                return iterations;
            }
            iterations += 1;
            if let Some(trace) = trace.as_deref_mut() {
                trace.push(p.clone());
            }
        }
    }
}

pub(crate) struct PosreachRun {
    pub vector: LevelVector,
    pub selector: RuleSelector,
    pub iterations: usize,
}

/// Positive reachability in the model with reload set `reload`.
pub(crate) fn posreach_on(
    model: &Cmdp,
    reload: &[bool],
    targets: &[bool],
    mode: HeuristicMode,
    trace: Option<&mut Vec<LevelVector>>,
) -> PosreachRun {
    let survival = safety_on(model, reload).vector;
    let mut selector = min_safe_selector(model, &survival);
    let mut p: LevelVector = model.states().map(|s| if targets[s] { survival[s] } else { Level::Infinite }).collect();
    let mut trace = trace;
    if let Some(trace) = trace.as_deref_mut() {
        trace.push(p.clone());
    }
    let descent = Descent { model, survival: &survival, targets, reload, mode };
    let iterations = descent.run(&mut p, &mut selector, trace);
    PosreachRun { vector: p, selector, iterations }
}

/// Minimal loads to safely reach a target with positive probability, and a
/// witness selector.
pub fn positive_reachability(
    model: &Cmdp,
    targets: &[StateId],
    mode: HeuristicMode,
) -> Result<SynthesisResult, SolveError> {
    mode.validate()?;
    let mask = target_mask(model, targets)?;
    let reload = model.reload_mask();
    let run = posreach_on(model, &reload, &mask, mode, None);
    Ok(SynthesisResult {
        vector: run.vector,
        selector: run.selector,
        iterations: run.iterations,
        rounds: vec![Round { reloads: model.reload_states().len(), iterations: run.iterations }],
    })
}

/// Every distinct iterate of B in standard mode, starting with `y_T` and
/// ending with the fixpoint. Iterate `i` for `i` past the end equals the last
/// entry.
pub fn positive_reachability_iterates(model: &Cmdp, targets: &[StateId]) -> Result<Vec<LevelVector>, SolveError> {
    let mask = target_mask(model, targets)?;
    let mut trace = Vec::new();
    posreach_on(model, &model.reload_mask(), &mask, HeuristicMode::Standard, Some(&mut trace));
    Ok(trace)
}
