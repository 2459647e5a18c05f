use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hriot_core::grey::{rank_candidates, CriterionSpec, DecisionMatrix, Direction};
use hriot_core::NodeId;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

fn matrix(rows: usize, rng: &mut Xoshiro256PlusPlus) -> DecisionMatrix {
    let criteria: Vec<CriterionSpec> = (0..6)
        .map(|k| {
            let dir = if k % 2 == 0 {
                Direction::Benefit
            } else {
                Direction::Cost
            };
            CriterionSpec::new(format!("c{k}"), dir, 1.0)
        })
        .collect();
    let values: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..6).map(|_| rng.random_range(0.0..1000.0)).collect())
        .collect();
    DecisionMatrix::new((0..rows as u32).map(NodeId).collect(), criteria, &values).unwrap()
}

fn bench_rank(c: &mut Criterion) {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    let mut group = c.benchmark_group("rank_candidates");
    for rows in [4usize, 20, 100] {
        let m = matrix(rows, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(rows), &m, |b, m| {
            b.iter(|| rank_candidates(m).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_rank);
criterion_main!(benches);
