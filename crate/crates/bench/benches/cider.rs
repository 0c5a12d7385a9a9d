use criterion::{criterion_group, criterion_main, Criterion};

use bioprep_bench::captions;
use bioprep_core::eval::{cider_d, DEFAULT_MAX_N, DEFAULT_SIGMA};

fn cider(c: &mut Criterion) {
    let mut group = c.benchmark_group("cider_d");
    for n in [20, 500] {
        let (cands, refs) = captions(n);
        let cands: Vec<&str> = cands.iter().map(String::as_str).collect();
        let refs: Vec<Vec<&str>> = refs.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
        group.bench_function(format!("{n} items x 3 refs"), |b| {
            b.iter(|| cider_d(&cands, &refs, DEFAULT_MAX_N, DEFAULT_SIGMA).unwrap().mean)
        });
    }
    group.finish();
}

criterion_group!(benches, cider);
criterion_main!(benches);
