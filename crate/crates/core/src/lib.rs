//! Strategy synthesis for consumption Markov decision processes.
//!
//! A consumption MDP tracks a resource that actions consume and reload states
//! replenish up to a capacity. The [`solvers`] compute, per state, the minimal
//! initial load that lets a controller satisfy an objective without ever
//! running out, together with a [`RuleSelector`] witness that is executed as a
//! [`CounterStrategy`].

pub mod env;
pub mod examples;
pub mod format;
pub mod level;
pub mod model;
pub mod oracle;
pub mod resource;
pub mod sim;
pub mod solvers;
pub mod strategy;

pub use env::{generate, heuristic_scenario, random_cmdp, Direction, GridError, GridSpec, RandomSpec};
pub use format::{model_to_json, parse_model, FormatError, ModelDocument};
pub use level::{Level, LevelVector};
pub use model::{
    validate, Action, ActionId, Cmdp, CmdpBuilder, ModelError, Probability, StateId, Transition, ValidationReport,
    Violation,
};
pub use oracle::{AlmostSureKind, ExplicitMdp, OracleError};
pub use resource::{is_safe, next_level, resource_levels, LoadedPath, PathError, ResourceTrace};
pub use sim::{
    audit_safety, estimate_ert, simulate_episode, AuditConfig, AuditReport, ErtReport, Outcome, SimConfig, SimError,
};
pub use solvers::{
    solve, HeuristicMode, ObjectiveKind, ObjectiveSpec, ReachPath, Round, Solution, SolveError, SynthesisResult,
};
pub use strategy::{CounterStrategy, MemorylessStrategy, Rule, RuleSelector, Selection, StrategyError};
