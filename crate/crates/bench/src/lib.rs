//! Benchmark-only crate; see `benches/proofs.rs`.
