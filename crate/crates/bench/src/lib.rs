//! Criterion benchmarks for the cohomology engine and the certificate verifier; see `benches/`.
