//! Criterion benchmarks for the verification pipeline live under `benches/`.
