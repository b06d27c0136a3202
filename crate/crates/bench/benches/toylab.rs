use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mid_core::toylab::{bounded_complexity, enumerate_programs, kraft_sum, Budget};
use mid_core::ByteString;

fn bench_toylab(c: &mut Criterion) {
    let mut g = c.benchmark_group("toylab");
    g.sample_size(10);
    for bits in [12, 16] {
        g.bench_with_input(BenchmarkId::new("enumerate", bits), &bits, |b, &n| {
            b.iter(|| enumerate_programs(n).unwrap().count())
        });
    }
    let budget = Budget::new(16, 10_000);
    let x = ByteString::from_bits("0110").unwrap();
    let y = ByteString::from_bits("01").unwrap();
    g.bench_function("kraft_sum/L16", |b| {
        b.iter(|| kraft_sum(&ByteString::empty(), budget).unwrap())
    });
    g.bench_function("bounded_complexity/L16", |b| {
        b.iter(|| bounded_complexity(&x, &y, budget).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_toylab);
criterion_main!(benches);
