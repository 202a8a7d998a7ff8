//! Benchmarks for the hessdamp solvers; see `benches/`.
