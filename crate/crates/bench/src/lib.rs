//! Criterion benchmarks for the rigid-psido kernels live in `benches/`.
