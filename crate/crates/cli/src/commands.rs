use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use cmdp::env::{grid_targets, lattice_grid};
use cmdp::oracle::{self, AlmostSureKind};
use cmdp::sim::episode_rng;
use cmdp::{
    estimate_ert, generate, model_to_json, parse_model, simulate_episode, solve as solve_objective, validate as check,
    Cmdp, GridSpec, HeuristicMode, Level, LevelVector, ObjectiveKind, ObjectiveSpec, Probability, ReachPath,
    RuleSelector, SimConfig, StateId,
};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::{GridworldArgs, Heuristic, Objective, ScalingArgs, SimulateArgs, SolveArgs};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(Cmdp, Option<Vec<StateId>>), CliError> {
    Ok(parse_model(&read(path)?)?)
}

fn require_valid(model: &Cmdp) -> Result<(), CliError> {
    let report = check(model);
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Domain(format!("invalid model:\n{}", report.to_string().trim_end())))
    }
}

/// Targets from `--targets`, else from the file.
fn targets(
    model: &Cmdp,
    flag: Option<&str>,
    from_file: Option<Vec<StateId>>,
) -> Result<Option<Vec<StateId>>, CliError> {
    match flag {
        Some(list) => {
            let names: Vec<&str> = list.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
            Ok(Some(model.states_named(&names)?))
        }
        None => Ok(from_file),
    }
}

fn level_text(level: Level) -> String {
    match level {
        Level::Finite(l) => l.to_string(),
        Level::Infinite => "inf".to_string(),
    }
}

fn level_json(level: Level) -> Value {
    match level {
        Level::Finite(l) => json!(l),
        Level::Infinite => Value::Null,
    }
}

pub fn validate(path: &Path) -> Result<(), CliError> {
    let (model, _) = load(path)?;
    require_valid(&model)?;
    println!("valid: {} states, {} actions, capacity {}", model.num_states(), model.num_actions(), model.capacity());
    Ok(())
}

fn mode(args: &SolveArgs) -> Result<HeuristicMode, CliError> {
    match (args.heuristic, args.theta) {
        (Heuristic::Threshold, theta) => Ok(HeuristicMode::Threshold(theta.unwrap_or(0.0))),
        (_, Some(_)) => Err(CliError::Usage("--theta needs --heuristic threshold".into())),
        (Heuristic::Standard, None) => Ok(HeuristicMode::Standard),
        (Heuristic::Goal, None) => Ok(HeuristicMode::GoalLeaning),
    }
}

fn objective_kind(objective: Objective) -> ObjectiveKind {
    match objective {
        Objective::Safety => ObjectiveKind::Safety,
        Objective::Posreach => ObjectiveKind::PositiveReach,
        Objective::Buchi => ObjectiveKind::AlmostSureBuchi,
        Objective::Asreach => ObjectiveKind::AlmostSureReach,
    }
}

fn objective_name(objective: Objective) -> &'static str {
    match objective {
        Objective::Safety => "safety",
        Objective::Posreach => "posreach",
        Objective::Buchi => "buchi",
        Objective::Asreach => "asreach",
    }
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let mode = mode(args)?;
    let (model, file_targets) = load(&args.model)?;
    require_valid(&model)?;
    let targets = match args.objective {
        Objective::Safety => Vec::new(),
        _ => targets(&model, args.targets.as_deref(), file_targets)?
            .ok_or_else(|| CliError::Usage("this objective needs --targets".into()))?,
    };
    let path = if args.via_product { ReachPath::Product } else { ReachPath::Direct };
    let spec = ObjectiveSpec::new(objective_kind(args.objective), targets);
    let solution = solve_objective(&model, &spec, mode, path)?;
    let cmdp::Solution::Selector(result) = &solution else { unreachable!("selector objectives only") };
    if let Some(out) = &args.out {
        write(out, &result.selector.to_json(&model))?;
    }
    if args.json {
        let values: Map<String, Value> =
            model.states().map(|s| (model.state_name(s).to_string(), level_json(result.vector[s]))).collect();
        let rounds: Vec<Value> =
            result.rounds.iter().map(|r| json!({"reloads": r.reloads, "iterations": r.iterations})).collect();
        let doc = json!({
            "objective": objective_name(args.objective),
            "values": values,
            "iterations": result.iterations,
            "rounds": rounds,
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        print_vector(&model, &result.vector);
        println!("iterations: {} over {} round(s)", result.iterations, result.rounds.len());
    }
    Ok(())
}

fn print_vector(model: &Cmdp, v: &LevelVector) {
    let width = model.states().map(|s| model.state_name(s).len()).max().unwrap_or(0).max(5);
    println!("{:<width$}  min load", "state");
    for s in model.states() {
        println!("{:<width$}  {}", model.state_name(s), level_text(v[s]));
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (model, file_targets) = load(&args.model)?;
    require_valid(&model)?;
    let selector = RuleSelector::from_json(&model, &read(&args.strategy)?)?;
    let start =
        model.state_by_name(&args.from).ok_or_else(|| CliError::Domain(format!("unknown state `{}`", args.from)))?;
    let targets = targets(&model, args.targets.as_deref(), file_targets)?
        .ok_or_else(|| CliError::Usage("simulate needs --targets".into()))?;
    let config =
        SimConfig { episodes: args.episodes, max_steps: args.max_steps, seed: args.seed, start, load: args.load };
    let report = estimate_ert(&model, &selector, &targets, &config)?;
    if let Some(path) = &args.csv {
        write_trace(&model, &selector, &targets, &config, path)?;
    }
    let doc = json!({
        "episodes": report.episodes,
        "hit_count": report.hit_count,
        "censored_count": report.censored_count,
        "depleted_count": report.depleted_count,
        "mean": report.mean,
        "mean_display": report.mean_display(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(())
}

fn write_trace(
    model: &Cmdp,
    selector: &RuleSelector,
    targets: &[StateId],
    config: &SimConfig,
    path: &Path,
) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["episode", "step", "state", "action", "level"]).map_err(io)?;
    for e in 0..config.episodes {
        let mut rng = episode_rng(config.seed, e);
        let episode = simulate_episode(model, selector, targets, config.start, config.load, config.max_steps, &mut rng);
        for row in episode.trace {
            let action = row.action.map(|a| model.action(a).name.as_str()).unwrap_or("");
            let level = row.level.map(|l| l.to_string()).unwrap_or_default();
            w.write_record([
                e.to_string().as_str(),
                &row.step.to_string(),
                model.state_name(row.state),
                action,
                &level,
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_cells(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.split(';')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(|cell| {
            let bad = || CliError::Usage(format!("cell `{cell}` is not `row,col`"));
            let (r, c) = cell.split_once(',').ok_or_else(bad)?;
            Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn gridworld(args: &GridworldArgs) -> Result<(), CliError> {
    let weak_success: Probability =
        args.p.parse().map_err(|_| CliError::Usage(format!("invalid probability `{}`", args.p)))?;
    let spec = GridSpec {
        reloads: parse_cells(&args.reloads)?,
        targets: parse_cells(&args.targets)?,
        weak_cost: args.weak_cost,
        strong_cost: args.strong_cost,
        weak_success,
        ..GridSpec::new(args.size, args.capacity)
    };
    let model = generate(&spec)?;
    let targets = grid_targets(&spec);
    let text = model_to_json(&model, (!targets.is_empty()).then_some(&targets[..]));
    match &args.out {
        Some(path) => write(path, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn mean_seconds(repeats: usize, f: impl Fn()) -> f64 {
    let start = Instant::now();
    for _ in 0..repeats {
        f();
    }
    start.elapsed().as_secs_f64() / repeats as f64
}

pub fn scaling(args: &ScalingArgs) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be positive".into()));
    }
    let kind = objective_kind(args.objective);
    let name = objective_name(args.objective);
    let mut out = std::io::stdout().lock();
    if args.csv {
        writeln!(out, "objective,n,capacity,solver,mean_seconds").unwrap();
    }
    for &n in &args.sizes {
        for &factor in &args.factors {
            let capacity = factor * n as u64;
            let spec = lattice_grid(n, capacity, args.spacing);
            let model = generate(&spec)?;
            let targets = grid_targets(&spec);
            let objective = ObjectiveSpec::new(kind, targets.clone());
            let native = mean_seconds(args.repeats, || {
                solve_objective(&model, &objective, HeuristicMode::Standard, ReachPath::Direct).unwrap();
            });
            let explicit = mean_seconds(args.repeats, || {
                let p = oracle::encode(&model).expect("grid fits the product limit");
                match args.objective {
                    Objective::Safety => oracle::sure_safety(&p),
                    Objective::Posreach => oracle::positive_reach(&p, &targets),
                    Objective::Buchi => oracle::almost_sure(&p, &targets, AlmostSureKind::Buchi),
                    Objective::Asreach => oracle::almost_sure(&p, &targets, AlmostSureKind::Reach),
                };
            });
            for (solver, secs) in [("native", native), ("oracle", explicit)] {
                if args.csv {
                    writeln!(out, "{name},{n},{capacity},{solver},{secs:.6}").unwrap();
                } else {
                    writeln!(out, "{name} n={n} capacity={capacity} {solver}: {:.3} ms", secs * 1e3).unwrap();
                }
            }
        }
    }
    Ok(())
}
