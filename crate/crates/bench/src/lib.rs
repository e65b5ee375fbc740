//! Anchor crate for the criterion benchmarks; see `benches/pipelines.rs`.
