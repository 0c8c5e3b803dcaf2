//! Criterion benchmarks for the `nodesplit` crate; see `benches/`.
