use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use randdehn_bench::{boundary_word, commutator_square, model, walk_word};
use randdehn_core::area::{area_bfs, area_dispatch, area_winding, dehn_greedy, raag_normalization_bound};
use randdehn_core::AreaConfig;

fn area_oracles(c: &mut Criterion) {
    let z2 = model("z2");
    let mut g = c.benchmark_group("area");
    g.sample_size(20);
    // the exact search at k = 3 takes seconds per call
    for k in [1, 2] {
        let w = commutator_square(&z2, k);
        g.bench_with_input(BenchmarkId::new("bfs", k), &w, |b, w| {
            b.iter(|| area_bfs(z2.presentation(), w, None, None).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("winding", k), &w, |b, w| b.iter(|| area_winding(w).unwrap()));
    }
    let genus2 = model("genus2");
    let p3 = model("raag-p3");
    for n in [256, 1024] {
        let w = boundary_word(&genus2, n, 1);
        g.bench_with_input(BenchmarkId::new("dehn-greedy", n), &w, |b, w| {
            b.iter(|| dehn_greedy(&genus2, w).unwrap())
        });
        let w = boundary_word(&p3, n, 1);
        g.bench_with_input(BenchmarkId::new("raag-bound", n), &w, |b, w| {
            b.iter(|| raag_normalization_bound(&p3, w).unwrap())
        });
    }
    g.finish();
}

fn normal_forms(c: &mut Criterion) {
    let mut g = c.benchmark_group("evaluate");
    for name in ["f2", "z2", "raag-p3", "genus2"] {
        let m = model(name);
        let w = walk_word(&m, 512, 2);
        g.bench_function(name, |b| b.iter(|| m.evaluate(&w).unwrap()));
    }
    g.finish();
}

fn dispatch(c: &mut Criterion) {
    let m = model("raag-p3");
    let w = boundary_word(&m, 512, 3);
    let cfg = AreaConfig::default();
    c.bench_function("dispatch/raag-p3/512", |b| b.iter(|| area_dispatch(&m, &w, &cfg).unwrap()));
}

criterion_group!(benches, area_oracles, normal_forms, dispatch);
criterion_main!(benches);
