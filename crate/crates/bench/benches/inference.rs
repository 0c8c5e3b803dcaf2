use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use nodesplit::bench::{random_network, BenchInstance, CodingSpec, RandomSpec};
use nodesplit::elimination::{mbe, network_ve};
use nodesplit::graph::min_fill_order;
use nodesplit::jointree::build_jointree;
use nodesplit::search::{split_bnb, SearchOptions, Space};
use nodesplit::strategies::{apply, Heuristic, StrategyConfig};
use nodesplit::{Instantiation, Op};

fn code(sigma: f64, seed: u64) -> BenchInstance {
    BenchInstance::coding(&CodingSpec {
        k: 16,
        m: 24,
        parents_per_parity: 4,
        sigma,
        seed,
    })
    .unwrap()
}

fn exact(c: &mut Criterion) {
    let net = random_network(&RandomSpec::binary(40, 2, 1)).unwrap();
    let e = Instantiation::new();
    let mut g = c.benchmark_group("exact");
    g.bench_function("ve_max_random40", |b| b.iter(|| network_ve(black_box(&net), &e, Op::Max).unwrap()));
    let jt = build_jointree(&net, &min_fill_order(&net));
    g.bench_function("jointree_max_random40", |b| b.iter(|| jt.max_propagate(black_box(&net), &e).unwrap()));
    g.bench_function("jointree_build_random40", |b| {
        b.iter(|| build_jointree(black_box(&net), &min_fill_order(&net)))
    });
    g.finish();
}

fn mini_buckets(c: &mut Criterion) {
    let inst = code(0.5, 3);
    let f = inst.net.conditioned_cpts(&inst.evidence);
    let order = min_fill_order(&inst.net);
    let mut g = c.benchmark_group("mbe_code");
    for ibound in [4, 6, 8] {
        g.bench_with_input(BenchmarkId::from_parameter(ibound), &ibound, |b, &i| {
            b.iter(|| mbe(black_box(&f), &order, i, Op::Max).unwrap())
        });
    }
    g.finish();
}

fn strategies(c: &mut Criterion) {
    let inst = code(0.5, 3);
    let mut g = c.benchmark_group("strategy_code");
    for kind in [Heuristic::Mb, Heuristic::Jt] {
        for limit in [6, 8] {
            let cfg = StrategyConfig::new(kind, limit);
            g.bench_function(format!("{kind}_{limit}"), |b| {
                b.iter(|| apply(black_box(&inst.net), &inst.evidence, &cfg).unwrap())
            });
        }
    }
    g.finish();
}

fn search(c: &mut Criterion) {
    let inst = code(0.5, 3);
    let mut g = c.benchmark_group("search_code");
    g.sample_size(10);
    for kind in [Heuristic::Mb, Heuristic::Jt] {
        let s = apply(&inst.net, &inst.evidence, &StrategyConfig::new(kind, 7)).unwrap();
        for space in [Space::Reduced, Space::Full] {
            let opts = SearchOptions::new(space);
            g.bench_function(format!("{kind}_7_{space}"), |b| {
                b.iter(|| split_bnb(&inst.net, black_box(&s.split), &inst.evidence, &opts).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, exact, mini_buckets, strategies, search);
criterion_main!(benches);
