//! Criterion benchmarks for the advection pipelines; see `benches/`.
