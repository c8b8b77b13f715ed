//! Criterion benchmarks for the signal path and the classifier; see
//! `benches/pipeline.rs`.
