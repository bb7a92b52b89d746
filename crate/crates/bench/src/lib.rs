//! Benchmarks for the energy evaluators and lifting solvers; see `benches/`.
