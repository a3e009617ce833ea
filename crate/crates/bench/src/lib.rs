//! Benchmark-only crate; the kernels live in robinspec-core.
