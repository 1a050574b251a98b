//! Monte-Carlo execution of counter strategies.
//!
//! Every episode draws from its own ChaCha8 stream: the generator is seeded
//! with `seed_from_u64(seed)` and switched to stream `episode`. Successors are
//! sampled by inverting the cumulative distribution in stored successor
//! order, so traces depend only on the seed and the episode index.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::level::LevelVector;
use crate::model::{ActionId, Cmdp, StateId};
use crate::strategy::{CounterStrategy, RuleSelector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("initial load {load} exceeds capacity {capacity}")]
    LoadAboveCapacity { load: u64, capacity: u64 },
    #[error("unknown state index {0}")]
    UnknownState(StateId),
    #[error("episodes and max_steps must be positive")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub episodes: usize,
    pub max_steps: usize,
    pub seed: u64,
    pub start: StateId,
    pub load: u64,
}

impl SimConfig {
    pub fn check(&self, model: &Cmdp) -> Result<(), SimError> {
        if self.episodes == 0 || self.max_steps == 0 {
            return Err(SimError::Empty);
        }
        if self.start >= model.num_states() {
            return Err(SimError::UnknownState(self.start));
        }
        if self.load > model.capacity() {
            return Err(SimError::LoadAboveCapacity { load: self.load, capacity: model.capacity() });
        }
        Ok(())
    }
}

/// How an episode ended. Step numbers count transitions, the start being 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Hit(usize),
    Censored,
    Depleted(usize),
}

/// One visited state. `action` is `None` on the last row of an episode;
/// `level` is `None` once depleted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub step: usize,
    pub state: StateId,
    pub level: Option<u64>,
    pub action: Option<ActionId>,
    pub defined: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Episode {
    pub outcome: Outcome,
    pub trace: Vec<StepRecord>,
}

pub fn episode_rng(seed: u64, episode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode as u64);
    rng
}

fn sample_successor(model: &Cmdp, action: ActionId, rng: &mut impl Rng) -> StateId {
    let successors = &model.action(action).successors;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for t in successors {
        acc += t.probability.value();
        if u < acc {
            return t.target;
        }
    }
    successors.last().expect("actions have successors").target
}

// Runs up to `max_steps` transitions, stopping early on depletion or, if
// `stop` is given, on the first visit to a state in it. `visit` sees every
// decision before the successor is sampled.
fn run(
    model: &Cmdp,
    selector: &RuleSelector,
    (start, load): (StateId, u64),
    max_steps: usize,
    rng: &mut impl Rng,
    stop: Option<&[bool]>,
    mut visit: impl FnMut(usize, StateId, u64, ActionId, bool),
) -> (Outcome, StateId, usize) {
    let mut strategy = CounterStrategy::new(model, selector, load);
    let mut state = start;
    if stop.is_some_and(|t| t[state]) {
        return (Outcome::Hit(0), state, 0);
    }
    for step in 0..max_steps {
        let level = strategy.counter().expect("depletion ends the run");
        let choice = strategy.next(state).expect("counter is defined");
        visit(step, state, level, choice.action, choice.defined);
        let next = sample_successor(model, choice.action, rng);
        let after = strategy.step(state, choice.action, next);
        state = next;
        if after.is_none() {
            return (Outcome::Depleted(step + 1), state, step + 1);
        }
        if stop.is_some_and(|t| t[state]) {
            return (Outcome::Hit(step + 1), state, step + 1);
        }
    }
    (Outcome::Censored, state, max_steps)
}

/// Plays `selector` from `(start, load)` until a target is hit, the counter
/// depletes, or `max_steps` transitions have been taken. Fallback actions
/// are recorded with `defined = false`.
pub fn simulate_episode(
    model: &Cmdp,
    selector: &RuleSelector,
    targets: &[StateId],
    start: StateId,
    load: u64,
    max_steps: usize,
    rng: &mut impl Rng,
) -> Episode {
    let mask = model.mask(targets);
    let mut trace = Vec::new();
    let (outcome, last, steps) =
        run(model, selector, (start, load), max_steps, rng, Some(&mask), |step, state, level, action, defined| {
            trace.push(StepRecord { step, state, level: Some(level), action: Some(action), defined });
        });
    let level = match outcome {
        Outcome::Depleted(_) => None,
        _ => final_level(model, &trace, load),
    };
    trace.push(StepRecord { step: steps, state: last, level, action: None, defined: true });
    Episode { outcome, trace }
}

fn final_level(model: &Cmdp, trace: &[StepRecord], load: u64) -> Option<u64> {
    match trace.last() {
        None => Some(load),
        Some(row) => crate::resource::next_level(model, row.state, row.action.unwrap(), row.level),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErtReport {
    pub episodes: usize,
    pub max_steps: usize,
    pub hit_count: usize,
    /// Episodes without a hit, depleted ones included.
    pub censored_count: usize,
    pub depleted_count: usize,
    /// Mean first-hit step over hit episodes.
    pub mean: Option<f64>,
    /// First-hit step of each episode, in episode order.
    pub steps: Vec<Option<usize>>,
}

impl ErtReport {
    /// The mean, or `"M+"` with `M = max_steps` when nothing was hit.
    pub fn mean_display(&self) -> String {
        match self.mean {
            Some(m) => format!("{m}"),
            None => format!("{}+", self.max_steps),
        }
    }
}

/// Runs `config.episodes` independent episodes in parallel and averages the
/// first-hit steps.
pub fn estimate_ert(
    model: &Cmdp,
    selector: &RuleSelector,
    targets: &[StateId],
    config: &SimConfig,
) -> Result<ErtReport, SimError> {
    config.check(model)?;
    let mask = model.mask(targets);
    let outcomes: Vec<Outcome> = (0..config.episodes)
        .into_par_iter()
        .map(|e| {
            let mut rng = episode_rng(config.seed, e);
            run(
                model,
                selector,
                (config.start, config.load),
                config.max_steps,
                &mut rng,
                Some(&mask),
                |_, _, _, _, _| {},
            )
            .0
        })
        .collect();
    let steps: Vec<Option<usize>> = outcomes
        .iter()
        .map(|o| match o {
            Outcome::Hit(i) => Some(*i),
            _ => None,
        })
        .collect();
    let hits: Vec<usize> = steps.iter().flatten().copied().collect();
    let total: u64 = hits.iter().map(|&i| i as u64).sum();
    Ok(ErtReport {
        episodes: config.episodes,
        max_steps: config.max_steps,
        hit_count: hits.len(),
        censored_count: config.episodes - hits.len(),
        depleted_count: outcomes.iter().filter(|o| matches!(o, Outcome::Depleted(_))).count(),
        mean: (!hits.is_empty()).then(|| total as f64 / hits.len() as f64),
        steps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Depleted,
    Fallback { state: StateId, level: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditViolation {
    pub start: StateId,
    pub load: u64,
    pub episode: usize,
    pub step: usize,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub steps: u64,
    pub episodes: usize,
    pub depletions: usize,
    pub fallbacks: usize,
    /// The first few violations found.
    pub examples: Vec<AuditViolation>,
    /// Fewest target visits seen in a single episode.
    pub min_target_visits: Option<usize>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.depletions == 0 && self.fallbacks == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditConfig {
    /// Episodes started from each state with a finite value.
    pub episodes_per_state: usize,
    pub steps_per_episode: usize,
    pub seed: u64,
}

const KEPT_EXAMPLES: usize = 16;

/// Runs the witness `selector` from every `(s, vector(s))` with finite value
/// and reports depletions and fallback-action uses. Episodes keep going after
/// target visits, which are counted.
pub fn audit_safety(
    model: &Cmdp,
    vector: &LevelVector,
    selector: &RuleSelector,
    targets: &[StateId],
    config: &AuditConfig,
) -> AuditReport {
    let mask = model.mask(targets);
    let starts: Vec<(StateId, u64)> = model.states().filter_map(|s| vector[s].finite().map(|l| (s, l))).collect();
    let jobs: Vec<(StateId, u64, usize)> =
        starts.iter().flat_map(|&(s, l)| (0..config.episodes_per_state).map(move |e| (s, l, e))).collect();
    let parts: Vec<AuditReport> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, &(start, load, episode))| {
            let mut rng = episode_rng(config.seed, index);
            let mut part = AuditReport { episodes: 1, ..AuditReport::default() };
            let mut visits = usize::from(mask[start]);
            let (outcome, _, steps) = run(
                model,
                selector,
                (start, load),
                config.steps_per_episode,
                &mut rng,
                None,
                |step, state, level, _, defined| {
                    if step > 0 && mask[state] {
                        visits += 1;
                    }
                    if !defined {
                        part.fallbacks += 1;
                        if part.examples.len() < KEPT_EXAMPLES {
                            part.examples.push(AuditViolation {
                                start,
                                load,
                                episode,
                                step,
                                kind: ViolationKind::Fallback { state, level },
                            });
                        }
                    }
                },
            );
            if let Outcome::Depleted(step) = outcome {
                part.depletions += 1;
                part.examples.push(AuditViolation { start, load, episode, step, kind: ViolationKind::Depleted });
            }
            part.steps = steps as u64;
            part.min_target_visits = Some(visits);
            part
        })
        .collect();
    let mut report = AuditReport::default();
    for part in parts {
        report.steps += part.steps;
        report.episodes += part.episodes;
        report.depletions += part.depletions;
        report.fallbacks += part.fallbacks;
        for v in part.examples {
            if report.examples.len() < KEPT_EXAMPLES {
                report.examples.push(v);
            }
        }
        report.min_target_visits = match (report.min_target_visits, part.min_target_visits) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
    report
}
