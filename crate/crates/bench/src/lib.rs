//! Criterion benchmarks for the `cmdp` solvers; see `benches/`.
