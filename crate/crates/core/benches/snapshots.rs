use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lakeland_core::features::{snapshot_class, snapshot_class_sequential, ModelConfig, SessionAccumulator};
use lakeland_core::{SessionId, TileGrid, TileKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn class(n: usize) -> Vec<SessionAccumulator> {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    (0..n)
        .map(|i| {
            let mut acc = SessionAccumulator::new(SessionId::parse(&format!("bench-{i}")).unwrap(), 0);
            let mut tiles = vec![TileKind::LandEmpty; 256];
            for t in tiles.iter_mut() {
                *t = TileKind::ALL[rng.random_range(0..TileKind::ALL.len())];
            }
            acc.grid = TileGrid::from_tiles(16, 16, tiles).unwrap();
            acc.last_seq = rng.random_range(1..2000);
            acc.population = rng.random_range(0..20);
            acc.deaths_total = rng.random_range(0..10);
            acc.money_earned_total = rng.random_range(0..5000);
            acc.blooms_total = rng.random_range(0..5);
            acc.fields_built_total = rng.random_range(0..30);
            acc.last_input_at = rng.random_range(0..600_000);
            acc
        })
        .collect()
}

fn bench_snapshots(c: &mut Criterion) {
    let cfg = ModelConfig::default();
    let mut group = c.benchmark_group("snapshot_class");
    for n in [20usize, 200, 2000] {
        let accs = class(n);
        group.bench_with_input(BenchmarkId::new("parallel", n), &accs, |b, accs| {
            b.iter(|| snapshot_class(accs, 600_000, &cfg))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &accs, |b, accs| {
            b.iter(|| snapshot_class_sequential(accs, 600_000, &cfg))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_snapshots);
criterion_main!(benches);
