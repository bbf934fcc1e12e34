mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewdyn::arith::{q, qi};
use skewdyn::series::newton::{newton_puiseux, poly_eval};
use skewdyn::{Coeff, ExtQ, Mode, PuiseuxSeries as PS};

/// Exact or truncated series with exponents in (1/den)·ℤ.
fn series(seed: u64) -> PS {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = [1, 2, 3, 4, 6][rng.random_range(0..5)];
    let n = rng.random_range(1..=5);
    let s = random_series(&mut rng, den, 0, 6, n);
    if rng.random_bool(0.4) {
        s.truncate(&ExtQ::Fin(q(rng.random_range(20..=60), 6)))
    } else {
        s
    }
}

fn exact(seed: u64) -> PS {
    series(seed).as_exact()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_is_additive(a in any::<u64>(), b in any::<u64>()) {
        let (s, t) = (exact(a), exact(b));
        let want = s.ord().unwrap().add(&t.ord().unwrap());
        prop_assert_eq!(s.mul(&t).ord().unwrap(), want);
    }

    #[test]
    fn strong_triangle(a in any::<u64>(), b in any::<u64>()) {
        let (s, t) = (exact(a), exact(b));
        let (os, ot) = (s.ord().unwrap(), t.ord().unwrap());
        let sum = s.add(&t).ord().unwrap();
        prop_assert!(sum >= os.clone().min_with(ot.clone()));
        if os != ot {
            prop_assert_eq!(sum, os.min_with(ot));
        }
    }

    #[test]
    fn ring_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (series(a), series(b), series(c));
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert!(x.sub(&x).ord_lb() >= *x.trunc());
        prop_assert_eq!(x.mul(&PS::one()), x.clone());
    }

    #[test]
    fn ramify_is_a_ring_morphism(a in any::<u64>(), b in any::<u64>(), k in 1u64..5) {
        let (s, t) = (series(a), series(b));
        prop_assert_eq!(s.mul(&t).ramify(k), s.ramify(k).mul(&t.ramify(k)));
        prop_assert_eq!(s.add(&t).ramify(k), s.ramify(k).add(&t.ramify(k)));
        prop_assert_eq!(s.ramify(k).unramify(k), s);
    }

    #[test]
    fn conjugates_share_support(a in any::<u64>()) {
        let s = exact(a);
        // exact mode handles ramification 1, 2 and 4
        prop_assume!([1, 2, 4].contains(&s.ram()));
        let conj = s.galois_conjugates().unwrap();
        prop_assert_eq!(conj.len() as u64, s.ram());
        for c in &conj {
            prop_assert_eq!(c.terms().keys().collect::<Vec<_>>(), s.terms().keys().collect::<Vec<_>>());
            prop_assert_eq!(c.ord().unwrap(), s.ord().unwrap());
        }
    }

    #[test]
    fn text_round_trip(a in any::<u64>()) {
        let s = series(a);
        let back: PS = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn newton_puiseux_recovers_roots(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prec = qi(16);
        let cut = ExtQ::Fin(prec.clone());
        let mut roots = Vec::new();
        while roots.len() < 3 {
            let den = if roots.len() <= 1 && rng.random_bool(0.4) { 2 } else { 1 };
            let r = random_series(&mut rng, 1, 0, 2, 2)
                .add(&random_series(&mut rng, den, 1, 18, 2))
                .add(&PS::monomial(Coeff::one(), q(1, den) + qi(1)));
            roots.extend(r.galois_conjugates().unwrap());
            if rng.random_bool(0.4) {
                break;
            }
        }
        let mut p = vec![PS::one()];
        for r in &roots {
            let mut next = vec![PS::zero(); p.len() + 1];
            for (k, a) in p.iter().enumerate() {
                next[k + 1] = next[k + 1].add(a);
                next[k] = next[k].sub(&a.mul(r));
            }
            p = next;
        }
        let got = newton_puiseux(&p, &prec, Mode::Exact).unwrap();
        prop_assert_eq!(got.iter().map(|r| r.mult).sum::<usize>(), roots.len());
        for r in &got {
            prop_assert!(poly_eval(&p, &r.series).ord_lb() >= cut);
            prop_assert!(roots.iter().any(|w| w.truncate(&cut) == r.series.truncate(&cut)));
        }
    }
}
