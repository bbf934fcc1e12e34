//! Truncated Puiseux series Σ a_β z^β known modulo z^T.

pub mod newton;
pub mod roots;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{denom, lcm, q_to_f64, qi, ExtQ, Q};
use crate::coeff::{Coeff, GaussQ, Mode};
use crate::error::{Error, Result};

pub use newton::{newton_puiseux, poly_eval, poly_eval_deriv, Root};

#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries {
    terms: BTreeMap<Q, Coeff>,
    trunc: ExtQ,
}

impl PuiseuxSeries {
    /// Builds a series, dropping zero coefficients and terms at or above `trunc`.
    pub fn new<I: IntoIterator<Item = (Q, Coeff)>>(terms: I, trunc: ExtQ) -> Self {
        let mut map: BTreeMap<Q, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            if ExtQ::Fin(e.clone()) >= trunc {
                continue;
            }
            let slot = map.entry(e).or_insert_with(Coeff::zero);
            *slot = &*slot + &c;
        }
        map.retain(|_, c| !c.is_zero());
        PuiseuxSeries { terms: map, trunc }
    }

    fn from_sorted(terms: BTreeMap<Q, Coeff>, trunc: ExtQ) -> Self {
        PuiseuxSeries { terms, trunc }
    }

    pub fn zero() -> Self {
        Self::from_sorted(BTreeMap::new(), ExtQ::Inf)
    }

    /// The zero series known only modulo z^t.
    pub fn zero_mod(t: Q) -> Self {
        Self::from_sorted(BTreeMap::new(), ExtQ::Fin(t))
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::new([(Q::zero(), c)], ExtQ::Inf)
    }

    pub fn monomial(c: Coeff, e: Q) -> Self {
        Self::new([(e, c)], ExtQ::Inf)
    }

    /// z^e with coefficient 1.
    pub fn z_pow(e: Q) -> Self {
        Self::monomial(Coeff::one(), e)
    }

    pub fn terms(&self) -> &BTreeMap<Q, Coeff> {
        &self.terms
    }

    pub fn trunc(&self) -> &ExtQ {
        &self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_inf()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.trunc.is_inf()
    }

    /// True when every stored coefficient is an exact Gaussian rational.
    pub fn is_exact_mode(&self) -> bool {
        self.terms.values().all(Coeff::is_exact)
    }

    pub fn mode(&self) -> Mode {
        if self.is_exact_mode() {
            Mode::Exact
        } else {
            Mode::Numeric
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lcm of the exponent denominators (1 for the zero series).
    pub fn ram(&self) -> u64 {
        self.terms.keys().fold(1, |acc, e| lcm(acc, denom(e)))
    }

    /// Lcm of denominators of terms strictly below `t`.
    pub fn ram_below(&self, t: &ExtQ) -> u64 {
        self.terms
            .keys()
            .take_while(|e| ExtQ::Fin((*e).clone()) < *t)
            .fold(1, |acc, e| lcm(acc, denom(e)))
    }

    pub fn ord(&self) -> Result<ExtQ> {
        match self.terms.keys().next() {
            Some(e) => Ok(ExtQ::Fin(e.clone())),
            None if self.trunc.is_inf() => Ok(ExtQ::Inf),
            None => Err(Error::IndeterminateOrder),
        }
    }

    /// A certain lower bound for the order: the order itself or the truncation.
    pub fn ord_lb(&self) -> ExtQ {
        match self.terms.keys().next() {
            Some(e) => ExtQ::Fin(e.clone()),
            None => self.trunc.clone(),
        }
    }

    pub fn leading(&self) -> Option<(&Q, &Coeff)> {
        self.terms.iter().next()
    }

    pub fn coeff(&self, e: &Q) -> Coeff {
        self.terms.get(e).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Reduces the precision to min(trunc, t).
    pub fn truncate(&self, t: &ExtQ) -> Self {
        if *t >= self.trunc {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| ExtQ::Fin((*e).clone()) < *t)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self::from_sorted(terms, t.clone())
    }

    pub fn truncate_q(&self, t: &Q) -> Self {
        self.truncate(&ExtQ::Fin(t.clone()))
    }

    /// The stored terms read as an exact polynomial in fractional powers.
    pub fn as_exact(&self) -> Self {
        Self::from_sorted(self.terms.clone(), ExtQ::Inf)
    }

    pub fn with_trunc(&self, t: ExtQ) -> Self {
        self.as_exact().truncate(&t)
    }

    pub fn add(&self, o: &Self) -> Self {
        let trunc = self.trunc.clone().min_with(o.trunc.clone());
        let mut terms = BTreeMap::new();
        for (e, c) in self.terms.iter().chain(o.terms.iter()) {
            if ExtQ::Fin(e.clone()) >= trunc {
                continue;
            }
            let slot = terms.entry(e.clone()).or_insert_with(Coeff::zero);
            *slot = &*slot + c;
        }
        terms.retain(|_, c: &mut Coeff| !c.is_zero());
        Self::from_sorted(terms, trunc)
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        Self::from_sorted(terms, self.trunc.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let trunc = self
            .ord_lb()
            .add(&o.trunc)
            .min_with(o.ord_lb().add(&self.trunc));
        let mut terms: BTreeMap<Q, Coeff> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea + eb;
                if ExtQ::Fin(e.clone()) >= trunc {
                    break;
                }
                let p = ca * cb;
                match terms.get_mut(&e) {
                    Some(slot) => *slot = &*slot + &p,
                    None => {
                        terms.insert(e, p);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self::from_sorted(terms, trunc)
    }

    pub fn scale(&self, k: &Coeff) -> Self {
        if k.is_zero() && k.is_exact() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * k));
        Self::new(terms, self.trunc.clone())
    }

    /// Multiplies by k·z^e.
    pub fn mul_monomial(&self, k: &Coeff, e: &Q) -> Self {
        if k.is_zero() && k.is_exact() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(f, c)| (f + e, c * k));
        Self::new(terms, self.trunc.add_q(e))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Substitutes z ↦ z^{1/k}.
    pub fn ramify(&self, k: u64) -> Self {
        let kq = Q::from_integer(k.into());
        let terms = self.terms.iter().map(|(e, c)| (e / &kq, c.clone())).collect();
        Self::from_sorted(terms, self.trunc.scale(&(Q::one() / &kq)))
    }

    /// Substitutes z ↦ z^k.
    pub fn unramify(&self, k: u64) -> Self {
        let kq = Q::from_integer(k.into());
        let terms = self.terms.iter().map(|(e, c)| (e * &kq, c.clone())).collect();
        Self::from_sorted(terms, self.trunc.scale(&kq))
    }

    pub fn to_numeric(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.to_numeric()));
        Self::new(terms, self.trunc.clone())
    }

    /// Drops coefficients below `tol` in absolute value.
    pub fn chop(&self, tol: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm_f64() >= tol)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self::from_sorted(terms, self.trunc.clone())
    }

    /// Distinct Galois conjugates under z^{1/m} ↦ ζ z^{1/m}, m = `ram()`.
    pub fn galois_conjugates(&self) -> Result<Vec<Self>> {
        self.galois_conjugates_mode(self.mode())
    }

    pub fn galois_conjugates_mode(&self, mode: Mode) -> Result<Vec<Self>> {
        let m = self.ram();
        let exact_units = matches!(m, 1 | 2 | 4);
        if mode == Mode::Exact && self.is_exact_mode() && !exact_units {
            return Err(Error::RootsOfUnityUnavailable(m));
        }
        let mut out = Vec::with_capacity(m as usize);
        for k in 0..m {
            let terms = self.terms.iter().map(|(e, c)| {
                let f = if exact_units && c.is_exact() {
                    // ζ_m^k raised to e·m, with ζ_m a power of i.
                    let pw = (e * qi(4 * k as i64)).to_integer() % num_bigint::BigInt::from(4);
                    Coeff::Exact(GaussQ::i_pow(pw.to_i64().unwrap_or(0)))
                } else {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 * q_to_f64(e);
                    Coeff::Num(Complex64::from_polar(1.0, ang))
                };
                (e.clone(), c * &f)
            });
            out.push(Self::new(terms, self.trunc.clone()));
        }
        Ok(out)
    }

    /// Evaluates Σ a_β t^{mβ}, the parameterization z = t^m.
    pub fn eval_param(&self, t: Complex64, m: u64) -> Complex64 {
        let mq = Q::from_integer(m.into());
        self.terms
            .iter()
            .map(|(e, c)| {
                let k = e * &mq;
                let tp = if k.is_integer() {
                    t.powi(k.to_integer().to_i32().unwrap_or(i32::MAX))
                } else {
                    t.powf(q_to_f64(&k))
                };
                c.to_complex() * tp
            })
            .sum()
    }

    /// Principal-branch evaluation at a complex z.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let zp = if e.is_integer() {
                    z.powi(e.to_integer().to_i32().unwrap_or(i32::MAX))
                } else {
                    z.powf(q_to_f64(e))
                };
                c.to_complex() * zp
            })
            .sum()
    }

    /// Canonical lexicographic key used to pick a representative conjugate.
    pub fn cmp_canonical(&self, o: &Self) -> std::cmp::Ordering {
        let mut a = self.terms.iter();
        let mut b = o.terms.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return std::cmp::Ordering::Equal,
                (None, Some(_)) => return std::cmp::Ordering::Less,
                (Some(_), None) => return std::cmp::Ordering::Greater,
                (Some((ea, ca)), Some((eb, cb))) => {
                    let ord = ea.cmp(eb).then_with(|| ca.cmp_canonical(cb));
                    if ord != std::cmp::Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
    }

    /// Largest exponent magnitude helper for heuristics: max |β| over terms.
    pub fn max_exponent(&self) -> Option<&Q> {
        self.terms.keys().next_back()
    }

    /// True when all exponents are ≥ 0.
    pub fn is_in_unit_ball(&self) -> bool {
        self.terms.keys().all(|e| !e.is_negative())
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_series(self))
    }
}

impl std::str::FromStr for PuiseuxSeries {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        text::parse_series(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    fn ps(s: &str) -> PuiseuxSeries {
        s.parse().unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(ps("z^2 - z^3").ord().unwrap(), ExtQ::Fin(qi(2)));
        assert_eq!(PuiseuxSeries::zero().ord().unwrap(), ExtQ::Inf);
        assert_eq!(ps("-4*z^(3/5)").ord().unwrap(), ExtQ::Fin(q(3, 5)));
        assert_eq!(
            PuiseuxSeries::zero_mod(qi(3)).ord(),
            Err(Error::IndeterminateOrder)
        );
    }

    #[test]
    fn ring_ops() {
        assert_eq!(ps("z^2").mul(&ps("z^3")), ps("z^5"));
        assert_eq!(ps("z^(1/2)").pow(2), ps("z"));
        let a = ps("2*z^(1/5)");
        let lhs = a.pow(3).sub(&ps("3*z^(1/5)").mul(&a.pow(2)));
        assert_eq!(lhs, ps("-4*z^(3/5)"));
    }

    #[test]
    fn product_truncation() {
        let a = ps("z + O(z^3)");
        let b = ps("z^2 + z^5");
        let p = a.mul(&b);
        assert_eq!(p.trunc(), &ExtQ::Fin(qi(5)));
        assert_eq!(p, ps("z^3 + O(z^5)"));
    }

    #[test]
    fn ramification() {
        assert_eq!(ps("z^2").ramify(4), ps("z^(1/2)"));
        assert_eq!(ps("2*z").ramify(5), ps("2*z^(1/5)"));
        assert_eq!(ps("z^(1/2)").unramify(2), ps("z"));
        assert_eq!(ps("-4*z^(3/5)").unramify(5), ps("-4*z^3"));
        let s = ps("z^(1/3) - 2*z^(7/6) + O(z^3)");
        assert_eq!(s.ramify(3).unramify(3), s);
    }

    #[test]
    fn conjugates() {
        assert_eq!(ps("z^2").galois_conjugates().unwrap(), vec![ps("z^2")]);
        let c = ps("z^(1/2)").galois_conjugates().unwrap();
        assert_eq!(c, vec![ps("z^(1/2)"), ps("-z^(1/2)")]);
        let c = ps("z^(1/2) + z^(3/4)").galois_conjugates().unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c[1], ps("-z^(1/2) + (-1*i)*z^(3/4)"));
        assert_eq!(c[2], ps("z^(1/2) - z^(3/4)"));
        assert!(matches!(
            ps("z^(1/3)").galois_conjugates(),
            Err(Error::RootsOfUnityUnavailable(3))
        ));
        assert_eq!(
            ps("z^(1/3)")
                .galois_conjugates_mode(Mode::Numeric)
                .unwrap()
                .len(),
            3
        );
    }
}
