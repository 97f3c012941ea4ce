//! Criterion benchmarks for `pmin-core`; see `benches/kernels.rs`.
