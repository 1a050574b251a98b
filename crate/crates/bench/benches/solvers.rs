use cmdp::env::{grid_targets, lattice_grid};
use cmdp::{
    generate, heuristic_scenario, oracle, solve, AlmostSureKind, HeuristicMode, ObjectiveKind, ObjectiveSpec, ReachPath,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn buchi_on_grids(c: &mut Criterion) {
    let mut group = c.benchmark_group("buchi");
    group.sample_size(20);
    for factor in [1u64, 5, 10] {
        let spec = lattice_grid(20, 20 * factor, 5);
        let model = generate(&spec).unwrap();
        let objective = ObjectiveSpec::new(ObjectiveKind::AlmostSureBuchi, grid_targets(&spec));
        group.bench_with_input(BenchmarkId::new("native", 20 * factor), &model, |b, m| {
            b.iter(|| solve(m, &objective, HeuristicMode::Standard, ReachPath::Direct).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("oracle", 20 * factor), &model, |b, m| {
            b.iter(|| {
                let p = oracle::encode(m).unwrap();
                oracle::almost_sure(&p, &objective.targets, AlmostSureKind::Buchi)
            })
        });
    }
    group.finish();
}

fn heuristics(c: &mut Criterion) {
    let (model, targets) = heuristic_scenario();
    let objective = ObjectiveSpec::new(ObjectiveKind::AlmostSureReach, targets);
    let mut group = c.benchmark_group("asreach");
    group.sample_size(20);
    for (name, mode) in [
        ("standard", HeuristicMode::Standard),
        ("goal", HeuristicMode::GoalLeaning),
        ("threshold-0.5", HeuristicMode::Threshold(0.5)),
    ] {
        group.bench_function(name, |b| b.iter(|| solve(&model, &objective, mode, ReachPath::Direct).unwrap()));
    }
    group.bench_function("product", |b| {
        b.iter(|| solve(&model, &objective, HeuristicMode::Standard, ReachPath::Product).unwrap())
    });
    group.finish();
}

criterion_group!(benches, buchi_on_grids, heuristics);
criterion_main!(benches);
