mod common;

use std::sync::OnceLock;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewdyn::arith::{q, qi};
use skewdyn::berk::BerkPoint;
use skewdyn::cover::{choose_markov_level, classify_point, Classification, Cover};
use skewdyn::curves::{emit_plaques, itinerary_to_curve};
use skewdyn::green::g_na;
use skewdyn::markov::{build_graph, parry, MarkovGraph, ParryData};
use skewdyn::multiplicity::{bound_multiplicity, MultBound};
use skewdyn::{SkewMap, Q};

struct Setup {
    f: SkewMap,
    n: usize,
    cover: Cover,
    graph: MarkovGraph,
    parry: ParryData,
    bound: u64,
}

/// Both small maps that admit a Markov level, built once.
fn setups() -> &'static [Setup] {
    static CELL: OnceLock<Vec<Setup>> = OnceLock::new();
    CELL.get_or_init(|| {
        [QUARTIC, (3, 2, &["z^2"][..])]
            .into_iter()
            .map(|spec| {
                let f = map(spec);
                let (n, cover) = choose_markov_level(&f, None, 5).unwrap();
                let graph = build_graph(&cover, n).unwrap();
                let parry = parry(&graph).unwrap();
                let MultBound::Finite(bound) = bound_multiplicity(&f, &cover, n).unwrap().bound else {
                    panic!("{f}: no finite bound")
                };
                Setup { f, n, cover, graph, parry, bound }
            })
            .collect()
    })
}

const PREC: i64 = 40;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cylinder_masses_are_shift_invariant(seed in any::<u64>(), which in 0usize..2, len in 1usize..6) {
        let s = &setups()[which];
        let w = s.parry.sample_itinerary(len, seed);
        let mass = s.parry.cylinder_mass(&w).unwrap();
        prop_assert!(mass > qi(0));
        let k = s.graph.len();
        let left: Q = (0..k).map(|v| s.parry.cylinder_mass(&[&[v][..], &w[..]].concat()).unwrap()).sum();
        let right: Q = (0..k).map(|v| s.parry.cylinder_mass(&[&w[..], &[v]].concat()).unwrap()).sum();
        prop_assert_eq!(&left, &mass);
        prop_assert_eq!(&right, &mass);
    }

    /// A curve is read back along its own word, up to the letters its
    /// certified order resolves, and it never escapes.
    #[test]
    fn curves_follow_their_itinerary(seed in any::<u64>(), which in 0usize..2, len in 1usize..4) {
        let s = &setups()[which];
        let w = s.parry.sample_itinerary(len, seed);
        let c = itinerary_to_curve(&s.f, &s.graph, &w, &qi(PREC)).unwrap();
        let x = BerkPoint::rigid(c.series.clone());
        let read = s.cover.itinerary(s.n, &x, len).unwrap();
        prop_assert_eq!(&read[..], &w[..read.len()]);
        if c.certified_order < qi(PREC) {
            prop_assert!(read.len() + 1 >= len, "{:?} read as {:?}", w, read);
        }
        match classify_point(&s.f, &x, 20).unwrap() {
            Classification::InCoverAtDepth(k) => prop_assert!(k >= read.len()),
            other => prop_assert!(false, "{:?} classified as {:?}", w, other),
        }
        prop_assert_eq!(s.bound % c.m, 0);
    }

    /// g_na increases toward the root and satisfies g(f x) = (c/d)·g(x).
    #[test]
    fn green_is_monotone_and_equivariant(seed in any::<u64>(), which in 0usize..2) {
        let s = &setups()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_type2(&mut rng);
        let tx = x.t_fin().unwrap().clone();
        let ty = &tx - q(rng.random_range(1..=12), 6);
        prop_assume!(ty > qi(0));
        let y = BerkPoint::type2(&x.center().as_exact(), ty).unwrap();
        let gx = g_na(&s.f, &x, 40).unwrap();
        let gy = g_na(&s.f, &y, 40).unwrap();
        if let (Some(a), Some(b)) = (gx.value(), gy.value()) {
            prop_assert!(a <= b, "g({}) = {} above g({}) = {}", x, a, y, b);
        }
        if let Some(a) = gx.value() {
            let fx = s.f.apply_point(&x).unwrap();
            if let Some(b) = g_na(&s.f, &fx, 40).unwrap().value() {
                prop_assert_eq!(b, &(a * qi(s.f.c() as i64) / qi(s.f.d() as i64)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn certified_order_grows_with_the_word(seed in any::<u64>(), which in 0usize..2) {
        let s = &setups()[which];
        let w = s.parry.sample_itinerary(3, seed);
        let mut prev = qi(0);
        for k in 1..=w.len() {
            let c = itinerary_to_curve(&s.f, &s.graph, &w[..k], &qi(PREC)).unwrap();
            prop_assert!(c.certified_order >= prev, "{:?}: {} after {}", &w[..k], c.certified_order, prev);
            prev = c.certified_order;
        }
    }
}

#[test]
fn cover_levels_nest_and_map_down() {
    for spec in [QUARTIC, (3, 2, &["z^2"][..]), (5, 3, &["z^4", "z^2"][..])] {
        let f = map(spec);
        let Ok(cover) = Cover::build(&f, None, 3) else { continue };
        for n in 1..=cover.depth() {
            let (up, level) = (cover.level(n - 1), cover.level(n));
            for (i, b) in level.iter().enumerate() {
                let parent = &up[b.parent.expect("parent recorded")];
                assert!(parent.contains_ball(b), "{f}: {b} not inside {parent}");
                let img = f.image_ball(b).unwrap();
                assert!(img.same_ball(&up[b.image.expect("image recorded")]), "{f}: image of {b} is {img}");
                for o in &level[i + 1..] {
                    assert!(b.is_disjoint(o), "{f}: {b} meets {o}");
                }
            }
        }
    }
}

#[test]
fn plaque_weights_are_mass_over_multiplicity() {
    for s in setups() {
        let plaques = emit_plaques(&s.f, &s.graph, &s.parry, 6, 3, None, &qi(PREC), 5).unwrap();
        let mut total = qi(0);
        for p in &plaques {
            let mass = s.parry.cylinder_mass(&p.itinerary).unwrap();
            assert_eq!(p.weight, &mass / qi(p.m as i64));
            total += &p.weight * qi(p.m as i64);
        }
        assert!(total <= qi(1), "plaque mass {total}");
    }
}
