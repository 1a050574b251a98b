//! Almost-sure Büchi: positive reachability with iterated reload pruning.

use crate::model::{Cmdp, StateId};

use super::posreach::posreach_on;
use super::{target_mask, HeuristicMode, Round, SolveError, SynthesisResult};

/// Minimal loads to safely visit the targets infinitely often with
/// probability 1, and a witness selector.
pub fn buchi(model: &Cmdp, targets: &[StateId], mode: HeuristicMode) -> Result<SynthesisResult, SolveError> {
    mode.validate()?;
    let mask = target_mask(model, targets)?;
    let cap = model.capacity();
    let mut reload = model.reload_mask();
    let mut rounds = Vec::new();
    loop {
        let run = posreach_on(model, &reload, &mask, mode, None);
        rounds.push(Round { reloads: reload.iter().filter(|&&r| r).count(), iterations: run.iterations });
        let mut unusable = false;
        for s in model.states() {
            if reload[s] && !run.vector[s].within(cap) {
                reload[s] = false;
                unusable = true;
            }
        }
        if !unusable {
            return Ok(SynthesisResult {
                vector: run.vector,
                selector: run.selector,
                iterations: rounds.iter().map(|r| r.iterations).sum(),
                rounds,
            });
        }
    }
}
