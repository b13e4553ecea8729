use criterion::{criterion_group, criterion_main, Criterion};

use qd_core::cohomeng::{sheaf_cohomology_with, EngineConfig};
use qd_core::theoremkit::{oracle_ext_table_with, paper_certificate_with, replay};
use qd_core::BundleExpr;

fn line_bundles(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let m = BundleExpr::parse("O(0)").unwrap().realize(3, 3).unwrap();
    c.bench_function("h(Q3, O(-2)) p=3", |b| b.iter(|| sheaf_cohomology_with(&m, -2, &cfg).unwrap()));
}

fn spinor_frobenius(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let m = BundleExpr::parse("Frob(Ustar)").unwrap().realize(3, 2).unwrap();
    c.bench_function("h(Q3, F*U*) p=2", |b| b.iter(|| sheaf_cohomology_with(&m, 0, &cfg).unwrap()));
}

fn ext_oracle(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("Ext(F*O, F*O) Q2 p=3", |b| b.iter(|| oracle_ext_table_with(2, 3, &cfg).unwrap()));
    g.finish();
}

fn certificate(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let cert = paper_certificate_with(3, 2, &cfg).unwrap();
    c.bench_function("replay certificate Q3 p=2", |b| b.iter(|| replay(&cert).unwrap()));
}

criterion_group!(benches, line_bundles, spinor_frobenius, ext_oracle, certificate);
criterion_main!(benches);
