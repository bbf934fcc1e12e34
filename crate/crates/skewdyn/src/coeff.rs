//! Coefficient field: exact Gaussian rationals, or complex doubles in numeric mode.
//!
//! Mixing the two promotes to numeric. Numeric zero testing uses
//! [`NUMERIC_ZERO`]; `PuiseuxSeries::chop` takes an explicit tolerance.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::arith::{q_to_f64, Q};

pub const NUMERIC_ZERO: f64 = 1e-12;

/// Coefficient mode for root finding and conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Numeric,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Numeric => "numeric",
        }
    }
}

/// a + b·i with a, b exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussQ {
    pub re: Q,
    pub im: Q,
}

impl GaussQ {
    pub fn new(re: Q, im: Q) -> Self {
        GaussQ { re, im }
    }

    pub fn real(re: Q) -> Self {
        GaussQ { re, im: Q::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(Q::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::real(Q::zero())
    }

    pub fn one() -> Self {
        Self::real(Q::one())
    }

    pub fn i() -> Self {
        GaussQ::new(Q::zero(), Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussQ::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm2(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm2();
        Some(GaussQ::new(&self.re / &n, -&self.im / &n))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = GaussQ::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }

    /// i^k for any integer k.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => GaussQ::one(),
            1 => GaussQ::i(),
            2 => GaussQ::from_int(-1),
            _ => GaussQ::new(Q::zero(), -Q::one()),
        }
    }
}

impl<'a> Add<&'a GaussQ> for &'a GaussQ {
    type Output = GaussQ;
    fn add(self, o: &GaussQ) -> GaussQ {
        GaussQ::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussQ> for &'a GaussQ {
    type Output = GaussQ;
    fn sub(self, o: &GaussQ) -> GaussQ {
        GaussQ::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussQ> for &'a GaussQ {
    type Output = GaussQ;
    fn mul(self, o: &GaussQ) -> GaussQ {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussQ::real(&self.re * &o.re);
        }
        GaussQ::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussQ {
    type Output = GaussQ;
    fn neg(self) -> GaussQ {
        GaussQ::new(-self.re.clone(), -self.im.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    Exact(GaussQ),
    Num(Complex64),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Exact(GaussQ::zero())
    }

    pub fn one() -> Self {
        Coeff::Exact(GaussQ::one())
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::Exact(GaussQ::from_int(n))
    }

    pub fn from_q(x: Q) -> Self {
        Coeff::Exact(GaussQ::real(x))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Coeff::from_q(Q::from_integer(n))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact(g) => g.is_zero(),
            Coeff::Num(c) => c.norm() < NUMERIC_ZERO,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coeff::Exact(g) => g.is_one(),
            Coeff::Num(c) => (c - Complex64::new(1.0, 0.0)).norm() < NUMERIC_ZERO,
        }
    }

    pub fn exact(&self) -> Option<&GaussQ> {
        match self {
            Coeff::Exact(g) => Some(g),
            Coeff::Num(_) => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coeff::Exact(g) => g.to_complex(),
            Coeff::Num(c) => *c,
        }
    }

    pub fn to_numeric(&self) -> Coeff {
        Coeff::Num(self.to_complex())
    }

    /// Exact real rationals that are negative print with a leading minus.
    pub fn is_negative_real(&self) -> bool {
        match self {
            Coeff::Exact(g) => g.im.is_zero() && g.re.is_negative(),
            Coeff::Num(_) => false,
        }
    }

    pub fn inv(&self) -> Option<Coeff> {
        match self {
            Coeff::Exact(g) => g.inv().map(Coeff::Exact),
            Coeff::Num(c) => {
                if c.norm() == 0.0 {
                    None
                } else {
                    Some(Coeff::Num(c.inv()))
                }
            }
        }
    }

    pub fn pow(&self, e: u64) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(g.pow(e)),
            Coeff::Num(c) => Coeff::Num(c.powu(e as u32)),
        }
    }

    pub fn norm_f64(&self) -> f64 {
        self.to_complex().norm()
    }

    /// Canonical order: lexicographic on (real, imaginary) parts.
    pub fn cmp_canonical(&self, other: &Coeff) -> Ordering {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im)),
            _ => {
                let (a, b) = (self.to_complex(), other.to_complex());
                a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im))
            }
        }
    }
}

macro_rules! coeff_binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a Coeff> for &'a Coeff {
            type Output = Coeff;
            fn $m(self, o: &Coeff) -> Coeff {
                match (self, o) {
                    (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a.$m(b)),
                    _ => Coeff::Num(self.to_complex().$m(o.to_complex())),
                }
            }
        }
        impl $tr for Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                (&self).$m(&o)
            }
        }
    };
}

coeff_binop!(Add, add);
coeff_binop!(Sub, sub);
coeff_binop!(Mul, mul);

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(-g),
            Coeff::Num(c) => Coeff::Num(-c),
        }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    #[test]
    fn gaussian_field_ops() {
        let a = GaussQ::new(q(1, 2), q(3, 1));
        let inv = a.inv().unwrap();
        assert!((&a * &inv).is_one());
        assert_eq!(GaussQ::i().pow(2), GaussQ::from_int(-1));
        assert_eq!(GaussQ::i_pow(-1), GaussQ::new(Q::zero(), -Q::one()));
    }

    #[test]
    fn mixing_promotes_to_numeric() {
        let a = Coeff::from_int(2);
        let b = Coeff::Num(Complex64::new(0.5, 0.0));
        assert!(matches!(&a * &b, Coeff::Num(_)));
        assert!((&a * &b).is_one());
    }

    #[test]
    fn canonical_order() {
        let a = Coeff::Exact(GaussQ::new(q(-1, 1), q(5, 1)));
        let b = Coeff::Exact(GaussQ::new(q(-1, 1), q(6, 1)));
        assert_eq!(a.cmp_canonical(&b), Ordering::Less);
    }
}
