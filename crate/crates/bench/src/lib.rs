//! Criterion benchmarks for the membrane kernels; see `benches/`.
