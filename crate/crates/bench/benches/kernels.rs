use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hilb_bench::{model, poly};
use hilb_core::cr_orbifold::compare_rings;
use hilb_core::egl_cobordism::chern_number;
use hilb_core::fock::FockSpace;
use hilb_core::goettsche::poincare_series;
use hilb_core::heisenberg::{check_relation, Relation};
use hilb_core::taut_ring::ring_table;

fn fock(c: &mut Criterion) {
    let k3 = model("k3");
    c.bench_function("fock_space_k3_weight_4", |b| b.iter(|| FockSpace::new(black_box(&k3), 4)));
    c.bench_function("poincare_series_k3_n_20", |b| {
        b.iter(|| poincare_series(black_box(k3.betti()), 20).unwrap())
    });
}

fn relations(c: &mut Criterion) {
    let mut g = c.benchmark_group("relations");
    g.sample_size(10);
    let p2 = model("p2");
    for r in [Relation::Heisenberg, Relation::Derivative, Relation::CubicBoundary] {
        g.bench_with_input(BenchmarkId::new(r.id(), "p2_weight_3"), &r, |b, r| {
            b.iter(|| check_relation(*r, &p2, 3).unwrap())
        });
    }
    g.finish();
}

fn rings(c: &mut Criterion) {
    let mut g = c.benchmark_group("rings");
    g.sample_size(10);
    let (p2, k3) = (model("p2"), model("k3"));
    g.bench_function("ring_table_p2_n_3", |b| b.iter(|| ring_table(&p2, 3).unwrap()));
    g.bench_function("ring_table_k3_n_2", |b| b.iter(|| ring_table(&k3, 2).unwrap()));
    g.bench_function("compare_rings_k3_n_2", |b| b.iter(|| compare_rings(&k3, 2).unwrap()));
    g.finish();
}

fn chern(c: &mut Criterion) {
    let mut g = c.benchmark_group("chern");
    g.sample_size(10);
    let k3 = model("k3");
    for (n, p) in [(2, "c4"), (3, "c6")] {
        let p = poly(p);
        g.bench_with_input(BenchmarkId::new("k3", n), &n, |b, n| {
            b.iter(|| chern_number(&k3, *n, &p).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fock, relations, rings, chern);
criterion_main!(benches);
