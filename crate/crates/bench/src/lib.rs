//! Benchmark-only crate; see `benches/networks.rs`.
