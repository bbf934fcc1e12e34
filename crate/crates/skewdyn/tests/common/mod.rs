//! Generators and independent oracles shared by the integration suites.
#![allow(dead_code)]

use rand::Rng;
use skewdyn::arith::{q, qi};
use skewdyn::berk::BerkPoint;
use skewdyn::normal::BivariateSeries;
use skewdyn::{Coeff, ExtQ, GaussQ, PuiseuxSeries as PS, SkewMap, Q};

pub const QUARTIC: (u64, u64, &[&str]) = (4, 2, &["-z^4"]);
pub const CUBIC: (u64, u64, &[&str]) = (5, 3, &["0", "0", "-3*z"]);

pub fn map(spec: (u64, u64, &[&str])) -> SkewMap {
    skewdyn::skew::map_from_strs(spec.0, spec.1, spec.2).unwrap()
}

pub fn ps(s: &str) -> PS {
    s.parse().unwrap()
}

pub fn small_q<R: Rng>(rng: &mut R) -> Q {
    let num = rng.random_range(-4i64..=4);
    let num = if num == 0 { 1 } else { num };
    q(num, rng.random_range(1..=3))
}

/// Polynomial in z^{1/den} with exponents in [lo, hi], exact.
pub fn random_series<R: Rng>(rng: &mut R, den: i64, lo: i64, hi: i64, terms: usize) -> PS {
    let mut out = PS::zero();
    for _ in 0..terms {
        let e = q(rng.random_range(lo * den..=hi * den), den);
        out = out.add(&PS::monomial(Coeff::from_q(small_q(rng)), e));
    }
    out
}

/// Fiber w^c + Σ h_j w^j whose w-derivative is c·Π(w − r_i) for random
/// integral r_i, so every critical branch is known in closed form.
pub fn random_map_with_crit<R: Rng>(rng: &mut R) -> (SkewMap, Vec<PS>) {
    let d = rng.random_range(3..=6u64);
    let c = rng.random_range(2..d);
    let roots: Vec<PS> = (0..c - 1).map(|_| random_series(rng, 1, 1, 3, 2)).collect();
    // c·Π(w − r_i) coefficientwise, low degree first
    let mut e = vec![PS::constant(Coeff::from_int(c as i64))];
    for r in &roots {
        let mut next = vec![PS::zero(); e.len() + 1];
        for (k, a) in e.iter().enumerate() {
            next[k + 1] = next[k + 1].add(a);
            next[k] = next[k].sub(&a.mul(r));
        }
        e = next;
    }
    let mut h = vec![random_series(rng, 1, 1, 4, 2)];
    for j in 1..c as usize {
        h.push(e[j - 1].scale(&Coeff::from_q(q(1, j as i64))));
    }
    (SkewMap::new(d, c, h).unwrap(), roots)
}

/// Random type-2 point ζ(a, t) with a in a ramified polynomial ring.
pub fn random_type2<R: Rng>(rng: &mut R) -> BerkPoint {
    let den = rng.random_range(1..=3);
    let n = rng.random_range(0..=3);
    let a = random_series(rng, den, 1, 4, n);
    let t = q(rng.random_range(6..=30), 6);
    BerkPoint::type2(&a, t).unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R) -> BerkPoint {
    if rng.random_bool(0.3) {
        let den = rng.random_range(1..=2);
        let n = rng.random_range(1..=3);
        BerkPoint::rigid(random_series(rng, den, 1, 5, n))
    } else {
        random_type2(rng)
    }
}

pub fn ord(s: &PS) -> ExtQ {
    s.ord_lb()
}

/// Coefficients a_k of the fixed curve φ = z^2 + … of (z⁴, w² − z⁴),
/// from φ(u)² − u⁴ = φ(u⁴) solved degree by degree in u = z^{1/4}.
pub fn quartic_fixed_curve(n_max: usize, sign: i64) -> Vec<Q> {
    let len = 4 * n_max + 4;
    let mut a = vec![Q::from_integer(0.into()); len];
    a[2] = qi(sign);
    for n in 5..len {
        let k = n - 2;
        if k >= len {
            break;
        }
        let mut rhs = if n % 4 == 0 { a[n / 4].clone() } else { qi(0) };
        for i in 3..=n - 3 {
            rhs -= &a[i] * &a[n - i];
        }
        a[k] = rhs / qi(2 * sign);
    }
    a
}

pub fn bs(s: &str) -> BivariateSeries {
    s.parse().unwrap()
}

/// Σ c_ij a^i b^j by repeated multiplication, for checking composition.
pub fn subst(s: &BivariateSeries, a: &BivariateSeries, b: &BivariateSeries, trunc: u32) -> BivariateSeries {
    let a = a.with_trunc(trunc);
    let b = b.with_trunc(trunc);
    let mut acc = BivariateSeries::zero(trunc);
    for (&(i, j), c) in s.terms() {
        let mut m = BivariateSeries::one(trunc).scale(c);
        for _ in 0..i {
            m = m.mul(&a);
        }
        for _ in 0..j {
            m = m.mul(&b);
        }
        acc = acc.add(&m);
    }
    acc.with_trunc(trunc.min(s.trunc().saturating_mul(a.ord().min(b.ord()).max(1))))
}

pub fn small_gauss<R: Rng>(rng: &mut R) -> GaussQ {
    if rng.random_bool(0.2) {
        GaussQ::new(small_q(rng), small_q(rng))
    } else {
        GaussQ::real(small_q(rng))
    }
}

/// Random polynomial germ (z^d(1+ε), w^c + …) of total degree < 10.
pub fn random_germ<R: Rng>(rng: &mut R, trunc: u32) -> (BivariateSeries, BivariateSeries) {
    let d = rng.random_range(3..=5u32);
    let c = rng.random_range(2..d);
    let mut fz = vec![((d, 0), GaussQ::one())];
    for _ in 0..rng.random_range(1..=3) {
        let s = rng.random_range(1..=3u32);
        let j = rng.random_range(0..=s);
        if d + s < 10 {
            fz.push(((d + s - j, j), small_gauss(rng)));
        }
    }
    let mut fw = vec![((0, c), GaussQ::one())];
    for _ in 0..rng.random_range(2..=5) {
        let deg = rng.random_range(2..=9u32);
        let i = rng.random_range(0..=deg);
        if i == 0 && deg <= c {
            continue;
        }
        fw.push(((i, deg - i), small_gauss(rng)));
    }
    let build = |v: Vec<((u32, u32), GaussQ)>| {
        v.into_iter()
            .fold(BivariateSeries::zero(trunc), |acc, ((i, j), a)| {
                acc.add(&BivariateSeries::monomial(a, i, j, trunc))
            })
    };
    (build(fz), build(fw))
}
