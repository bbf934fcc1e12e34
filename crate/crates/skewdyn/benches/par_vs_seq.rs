//! Parallel core against a plain sequential loop over the same work.
//! Built with `--no-default-features` both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use skewdyn::arith::qi;
use skewdyn::complexdyn::{generic_points, iterate_orbit, NumericMap};
use skewdyn::cover::choose_markov_level;
use skewdyn::curves::itinerary_to_curve;
use skewdyn::markov::{build_graph, parry};
use skewdyn::{par, PuiseuxSeries, SkewMap};

fn quartic() -> SkewMap {
    skewdyn::skew::map_from_strs(4, 2, &["-z^4"]).unwrap()
}

fn preimage_layers(c: &mut Criterion) {
    let f = quartic();
    let prec = qi(40);
    let seeds: Vec<PuiseuxSeries> = (1..=16).map(|k| format!("{k}*z^3").parse().unwrap()).collect();
    let mut g = c.benchmark_group("preimages");
    g.bench_function(BenchmarkId::new("par", seeds.len()), |b| {
        b.iter(|| par::map(&seeds, |s| f.preimages_rigid(black_box(s), &prec).unwrap().len()))
    });
    g.bench_function(BenchmarkId::new("seq", seeds.len()), |b| {
        b.iter(|| {
            seeds
                .iter()
                .map(|s| f.preimages_rigid(black_box(s), &prec).unwrap().len())
                .collect::<Vec<_>>()
        })
    });
    g.finish();
}

fn curve_synthesis(c: &mut Criterion) {
    let f = quartic();
    let (n, cover) = choose_markov_level(&f, None, 4).unwrap();
    let graph = build_graph(&cover, n).unwrap();
    let p = parry(&graph).unwrap();
    let words: Vec<Vec<usize>> = (0..24).map(|s| p.sample_itinerary(4, s)).collect();
    let prec = qi(60);
    let mut g = c.benchmark_group("curves");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("par", words.len()), |b| {
        b.iter(|| par::map(&words, |w| itinerary_to_curve(&f, &graph, w, &prec).unwrap().m))
    });
    g.bench_function(BenchmarkId::new("seq", words.len()), |b| {
        b.iter(|| {
            words
                .iter()
                .map(|w| itinerary_to_curve(&f, &graph, w, &prec).unwrap().m)
                .collect::<Vec<_>>()
        })
    });
    g.finish();
}

fn complex_orbits(c: &mut Criterion) {
    let nf = NumericMap::new(&quartic());
    let pts = generic_points(&nf, 512, 1);
    let mut g = c.benchmark_group("orbits");
    g.bench_function(BenchmarkId::new("par", pts.len()), |b| {
        b.iter(|| par::map(&pts, |&(z, w)| iterate_orbit(&nf, z, w, 25).unwrap().steps.len()))
    });
    g.bench_function(BenchmarkId::new("seq", pts.len()), |b| {
        b.iter(|| {
            pts.iter()
                .map(|&(z, w)| iterate_orbit(&nf, z, w, 25).unwrap().steps.len())
                .collect::<Vec<_>>()
        })
    });
    g.finish();
}

criterion_group!(benches, preimage_layers, curve_synthesis, complex_orbits);
criterion_main!(benches);
