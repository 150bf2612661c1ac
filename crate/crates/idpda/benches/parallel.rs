//! Compares the sequential and rayon-parallel batch drivers on the
//! bounded-equivalence scan, plus a baseline for the determinization
//! construction itself.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use idpda::determinize::determinize;
use idpda::verify::{scan_agreement, CheckOptions};
use idpda::witness::{build_a, build_b};
use idpda::Execution;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn bench_scan(c: &mut Criterion) {
    let b2 = build_b(2);
    let det = determinize(&b2).unwrap().automaton;
    let mut group = c.benchmark_group("scan_agreement_b2_len9");
    group.sample_size(10);
    for (name, exec) in modes() {
        let opts = CheckOptions { execution: exec, ..CheckOptions::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| {
                let outcome = scan_agreement(&b2, &det, 9, opts).unwrap();
                assert!(outcome.mismatch.is_none());
                outcome.strings
            })
        });
    }
    group.finish();
}

fn bench_determinize(c: &mut Criterion) {
    let a3 = build_a(3);
    c.bench_function("determinize_a3", |b| {
        b.iter(|| determinize(&a3).unwrap().automaton.n_states())
    });
}

criterion_group!(benches, bench_scan, bench_determinize);
criterion_main!(benches);
